#include "pcac/artifacts.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

namespace pcac {

using nlohmann::json;

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::vector<std::string> table_header(Eigen::Index p, Eigen::Index m, Eigen::Index theta_size) {
    std::vector<std::string> h{"k"};
    for (Eigen::Index i = 0; i < p; ++i) h.push_back("y" + std::to_string(i));
    for (Eigen::Index i = 0; i < m; ++i) h.push_back("u" + std::to_string(i));
    for (Eigen::Index i = 0; i < m; ++i) h.push_back("v" + std::to_string(i));
    for (Eigen::Index i = 0; i < theta_size; ++i) h.push_back("theta" + std::to_string(i));
    for (const char* c : {"beta", "closed_loop", "step_flag", "gain_step", "certified", "alpha_cc", "beta_cc",
                          "zeta1", "zeta2", "zeta3_min_eig", "alpha_tc", "beta_tc", "cc1", "cc2", "tc1", "tc2",
                          "tc3", "cc_pass", "tc_pass", "all_pass", "cert_flag"}) {
        h.emplace_back(c);
    }
    return h;
}

namespace {

// Flag strings never contain commas, but keep the table parseable regardless.
std::string sanitize(std::string s) {
    for (char& c : s) {
        if (c == ',' || c == '\n' || c == '\r' || c == '"') c = ';';
    }
    return s;
}

std::string join_reasons(const CertificatePair& c) {
    std::string out;
    if (c.circle.flagged) out += "cc:" + c.circle.reason;
    if (c.tsypkin.flagged) out += (out.empty() ? "" : "|") + std::string("tc:") + c.tsypkin.reason;
    return sanitize(out);
}

}  // namespace

void write_table(std::ostream& os, const std::vector<StepRecord>& rows) {
    if (rows.empty()) return;
    const auto& first = rows.front();
    const auto header = table_header(first.y.size(), first.u.size(), first.theta.size());
    for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
    os << '\n';

    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (const auto& r : rows) {
        os << r.k;
        for (Eigen::Index i = 0; i < r.y.size(); ++i) os << ',' << format_double(r.y(i));
        for (Eigen::Index i = 0; i < r.u.size(); ++i) os << ',' << format_double(r.u(i));
        for (Eigen::Index i = 0; i < r.v.size(); ++i) os << ',' << format_double(r.v(i));
        for (Eigen::Index i = 0; i < r.theta.size(); ++i) os << ',' << format_double(r.theta(i));
        os << ',' << format_double(r.beta) << ',' << int(r.closed_loop) << ',' << sanitize(r.flag);
        if (r.cert) {
            const auto& cc = r.cert->circle;
            const auto& tc = r.cert->tsypkin;
            os << ',' << r.gain_step << ",1," << format_double(cc.alpha_cc) << ',' << format_double(cc.beta_cc) << ','
               << format_double(tc.zeta1) << ',' << tc.zeta2 << ',' << format_double(tc.zeta3_min_eig) << ','
               << format_double(tc.alpha_tc) << ',' << format_double(tc.beta_tc) << ',' << int(cc.cc1_pass) << ','
               << int(cc.cc2_pass) << ',' << int(tc.tc1_pass) << ',' << int(tc.tc2_pass) << ',' << int(tc.tc3_pass)
               << ',' << int(cc.pass()) << ',' << int(tc.pass()) << ',' << int(cc.pass() && tc.pass()) << ','
               << join_reasons(*r.cert);
        } else {
            const std::string n = format_double(nan);
            os << ",,0," << n << ',' << n << ',' << n << ",," << n << ',' << n << ',' << n << ",,,,,,,,,";
        }
        os << '\n';
    }
}

json summary_json(const RunSummary& s) {
    auto opt_step = [](long k) { return k < 0 ? json(nullptr) : json(k); };
    json j{
        {"schema_version", RunSummary::kSchemaVersion},
        {"table_schema_version", kTableSchemaVersion},
        {"name", s.name},
        {"steps", s.steps},
        {"control_start", s.control_start},
        {"seed", s.seed ? json(*s.seed) : json(nullptr)},
        {"config_hash", s.config_hash},
        {"wall_time_s", s.wall_time_s},
        {"final_abs_y", s.final_abs_y},
        {"flagged_steps", s.flagged_steps},
        {"first_pass", {{"circle", opt_step(s.first_circle_pass)}, {"tsypkin", opt_step(s.first_tsypkin_pass)}, {"all", opt_step(s.first_all_pass)}}},
        {"pass_through_end_from",
         {{"circle", opt_step(s.circle_pass_from)}, {"tsypkin", opt_step(s.tsypkin_pass_from)}, {"all", opt_step(s.all_pass_from)}}},
        {"closed_loop_fail_fraction", {{"circle", s.circle_fail_fraction}, {"tsypkin", s.tsypkin_fail_fraction}}},
    };
    return j;
}

void write_roa_csv(std::ostream& os, const RoaResult& roa) {
    if (roa.points.empty()) return;
    const auto n = roa.points.front().x0.size();
    for (Eigen::Index i = 0; i < n; ++i) os << "x0_" << i << ',';
    os << "converged,tail_max\n";
    for (const auto& p : roa.points) {
        for (Eigen::Index i = 0; i < n; ++i) os << format_double(p.x0(i)) << ',';
        os << int(p.converged) << ',' << format_double(p.tail_max) << '\n';
    }
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

}  // namespace

void write_artifacts(const std::filesystem::path& dir, const RunArtifacts& art, const ScenarioConfig& cfg) {
    std::filesystem::create_directories(dir);
    {
        auto out = open_out(dir / "steps.csv");
        write_table(out, art.rows);
    }
    {
        auto out = open_out(dir / "summary.json");
        out << summary_json(art.summary).dump(2) << '\n';
    }
    {
        auto out = open_out(dir / "config.json");
        out << cfg.source.dump(2) << '\n';
    }
}

int Table::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return static_cast<int>(i);
    }
    return -1;
}

std::vector<int> Table::indexed(const std::string& prefix) const {
    std::vector<int> out;
    for (std::size_t i = 0; i < header.size(); ++i) {
        const auto& h = header[i];
        if (h.size() > prefix.size() && h.compare(0, prefix.size(), prefix) == 0 &&
            h.find_first_not_of("0123456789", prefix.size()) == std::string::npos) {
            out.push_back(static_cast<int>(i));
        }
    }
    return out;
}

Table read_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    Table t;
    std::string line;
    if (!std::getline(in, line)) return t;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) t.header.push_back(cell);
    }
    t.columns.resize(t.header.size());
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::size_t col = 0, start = 0;
        while (col < t.header.size()) {
            const auto end = line.find(',', start);
            const std::string cell = line.substr(start, end == std::string::npos ? std::string::npos : end - start);
            double value = std::numeric_limits<double>::quiet_NaN();
            if (!cell.empty()) {
                char* stop = nullptr;
                const double parsed = std::strtod(cell.c_str(), &stop);
                if (stop && *stop == '\0') value = parsed;
            }
            t.columns[col++].push_back(value);
            if (end == std::string::npos) break;
            start = end + 1;
        }
        for (; col < t.header.size(); ++col) t.columns[col].push_back(std::numeric_limits<double>::quiet_NaN());
    }
    return t;
}

}  // namespace pcac
