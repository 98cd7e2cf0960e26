#include "pcac/scenario.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "pcac/error.hpp"
#include "pcac/parallel.hpp"

namespace pcac {

using nlohmann::json;

namespace {

// ---- JSON helpers -----------------------------------------------------------

Matrix matrix_from(const json& j, const std::string& field) {
    try {
        if (j.is_number()) return Matrix::Constant(1, 1, j.get<double>());
        if (j.is_object() && j.contains("diag")) {
            const auto d = j.at("diag").get<std::vector<double>>();
            return Eigen::Map<const Vector>(d.data(), static_cast<Eigen::Index>(d.size())).asDiagonal();
        }
        if (j.is_array() && !j.empty() && j.front().is_array()) {
            const auto rows = static_cast<Eigen::Index>(j.size());
            const auto cols = static_cast<Eigen::Index>(j.front().size());
            Matrix out(rows, cols);
            for (Eigen::Index r = 0; r < rows; ++r) {
                const auto& row = j[static_cast<std::size_t>(r)];
                if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
                    throw ConfigError(field, "rows must have equal length");
                }
                for (Eigen::Index c = 0; c < cols; ++c) out(r, c) = row[static_cast<std::size_t>(c)].get<double>();
            }
            return out;
        }
    } catch (const json::exception& e) {
        throw ConfigError(field, e.what());
    }
    throw ConfigError(field, "expected a number, a nested array or {\"diag\": [...]}");
}

// A scalar s stands for s * I_n when the expected size is known.
Matrix square_from(const json& j, const std::string& field, Eigen::Index n) {
    if (j.is_number()) return j.get<double>() * Matrix::Identity(n, n);
    Matrix M = matrix_from(j, field);
    if (M.rows() != n || M.cols() != n) {
        throw ConfigError(field, "expected a " + std::to_string(n) + "x" + std::to_string(n) + " matrix");
    }
    return M;
}

Vector vector_from(const json& j, const std::string& field, Eigen::Index n) {
    try {
        if (j.is_number()) return Vector::Constant(n, j.get<double>());
        const auto v = j.get<std::vector<double>>();
        if (static_cast<Eigen::Index>(v.size()) != n) {
            throw ConfigError(field, "expected " + std::to_string(n) + " entries");
        }
        return Eigen::Map<const Vector>(v.data(), n);
    } catch (const json::exception& e) {
        throw ConfigError(field, e.what());
    }
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback, const std::string& field) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(field + "." + key, e.what());
    }
}

json matrix_json(const Matrix& M) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < M.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
        rows.push_back(row);
    }
    return rows;
}

json vector_json(const Vector& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

Nonlinearity nonlinearity_from(const json& j) {
    const auto kind = get_or<std::string>(j, "kind", "tanh", "nonlinearity");
    try {
        if (kind == "tanh") return Nonlinearity::tanh();
        if (kind == "saturation") return Nonlinearity::saturation(get_or(j, "limit", 1.0, "nonlinearity"));
        if (kind == "linear") return Nonlinearity::linear_gain(get_or(j, "gain", 1.0, "nonlinearity"));
        if (kind == "deadzone") return Nonlinearity::dead_zone(get_or(j, "width", 1.0, "nonlinearity"));
    } catch (const Error& e) {
        throw ConfigError("nonlinearity", e.what());
    }
    throw ConfigError("nonlinearity.kind", "unknown kind '" + kind + "'");
}

json nonlinearity_json(const Nonlinearity& g) {
    json out{{"kind", g.name()}};
    switch (g.kind()) {
        case Nonlinearity::Kind::Saturation: out["limit"] = g.parameter(); break;
        case Nonlinearity::Kind::LinearGain: out["gain"] = g.parameter(); break;
        case Nonlinearity::Kind::DeadZone: out["width"] = g.parameter(); break;
        case Nonlinearity::Kind::Tanh: break;
    }
    return out;
}

Matrix first_state_weight(Eigen::Index n) {
    Matrix W = Matrix::Zero(n, n);
    W(0, 0) = 1.0;
    return W;
}

// ---- SplitMix64 / Box-Muller ---------------------------------------------------

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

double unit_uniform(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

double standard_normal(std::uint64_t seed, long k, Eigen::Index component) {
    const std::uint64_t key = splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(k) * 0x100000001B3ULL +
                                                           static_cast<std::uint64_t>(component)));
    const std::uint64_t second = splitmix64(key);
    const double u1 = unit_uniform(key);
    const double u2 = unit_uniform(second);
    return std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace

// ---- configuration ------------------------------------------------------------

std::vector<std::pair<long, double>> default_impulse_schedule() {
    return {{1000, 1.0}, {1200, -1.0}, {1400, 1.0}, {1600, -1.0}, {1800, 1.0}, {2000, -1.0}};
}

ScenarioConfig example1_config() {
    json doc{{"preset", "example1"}};
    return parse_config(doc);
}

ScenarioConfig parse_config(const json& doc) {
    if (!doc.is_object()) throw ConfigError("<root>", "expected a JSON object");
    const auto preset = get_or<std::string>(doc, "preset", "", "<root>");
    const bool ex1 = preset == "example1";
    if (!preset.empty() && !ex1) throw ConfigError("preset", "unknown preset '" + preset + "'");

    ScenarioConfig cfg;
    cfg.name = get_or<std::string>(doc, "name", ex1 ? "example1" : "scenario", "<root>");

    // Plant
    Matrix A, B, C;
    if (doc.contains("plant")) {
        const json& pl = doc.at("plant");
        if (!pl.contains("A") || !pl.contains("B") || !pl.contains("C")) {
            throw ConfigError("plant", "needs A, B and C");
        }
        A = matrix_from(pl.at("A"), "plant.A");
        B = matrix_from(pl.at("B"), "plant.B");
        C = matrix_from(pl.at("C"), "plant.C");
    } else if (ex1) {
        A.resize(2, 2);
        A << 1.0, -0.5, 1.0, 0.0;
        B.resize(2, 1);
        B << 1.0, 0.0;
        C.resize(1, 2);
        C << 1.0, -1.0;
    } else {
        throw ConfigError("plant", "missing (and no preset given)");
    }
    try {
        cfg.plant = StateSpace::strictly_proper(A, B, C);
    } catch (const Error& e) {
        throw ConfigError("plant", e.what());
    }
    const auto n = cfg.plant.states();
    const auto m = cfg.plant.inputs();
    const auto p = cfg.plant.outputs();
    if (m != p) throw ConfigError("plant", "componentwise nonlinearity requires as many inputs as outputs");

    cfg.gamma = doc.contains("nonlinearity") ? nonlinearity_from(doc.at("nonlinearity")) : Nonlinearity::tanh();

    // Sector data
    const json sector = doc.value("sector", json::object());
    try {
        const Matrix M1 = sector.contains("M1") ? square_from(sector.at("M1"), "sector.M1", p) : Matrix::Zero(m, p);
        const Matrix M2 = sector.contains("M2") ? square_from(sector.at("M2"), "sector.M2", p)
                                                : Matrix::Identity(m, p);
        cfg.sector = SectorBound(M1, M2);
    } catch (const Error& e) {
        throw ConfigError("sector", e.what());
    }
    const json tsy = doc.value("tsypkin", json::object());
    cfg.M = tsy.contains("M") ? square_from(tsy.at("M"), "tsypkin.M", m) : Matrix::Identity(m, m);
    if (tsy.contains("N")) {
        const json& jn = tsy.at("N");
        if (jn.is_number()) {
            cfg.N = jn.get<double>() * Matrix::Identity(m, m);
        } else if (jn.is_array() && !jn.empty() && jn.front().is_array()) {
            cfg.N = square_from(jn, "tsypkin.N", m);
        } else {
            cfg.N = vector_from(jn, "tsypkin.N", m).asDiagonal();
        }
    } else {
        cfg.N = 0.08 * Matrix::Identity(m, m);
    }

    // Identification
    const json rls = doc.value("rls", json::object());
    RlsConfig& r = cfg.pcac.rls;
    r.order = get_or(rls, "order", 10, "rls");
    if (r.order < 1) throw ConfigError("rls.order", "must be at least 1");
    r.outputs = static_cast<int>(p);
    r.inputs = static_cast<int>(m);
    const auto np = r.parameter_count();
    r.theta0 = rls.contains("theta0") ? vector_from(rls.at("theta0"), "rls.theta0", np) : Vector::Constant(np, 1e-10);
    r.psi0 = rls.contains("psi0") ? square_from(rls.at("psi0"), "rls.psi0", np) : Matrix(1e-4 * Matrix::Identity(np, np));
    r.tau_n = get_or(rls, "tau_n", 40, "rls");
    r.tau_d = get_or(rls, "tau_d", 200, "rls");
    r.eta = get_or(rls, "eta", 0.1, "rls");
    r.alpha = get_or(rls, "alpha", 0.001, "rls");
    cfg.pcac.identify_during_open_loop = get_or(rls, "identify_during_open_loop", true, "rls");

    // Receding horizon
    const json bp = doc.value("bpre", json::object());
    BpreConfig& b = cfg.pcac.bpre;
    const Eigen::Index nm = static_cast<Eigen::Index>(r.order) * p;
    b.horizon = get_or(bp, "horizon", 20, "bpre");
    b.R1 = bp.contains("R1") ? square_from(bp.at("R1"), "bpre.R1", nm) : first_state_weight(nm);
    b.R2 = bp.contains("R2") ? square_from(bp.at("R2"), "bpre.R2", m) : Matrix(1e-4 * Matrix::Identity(m, m));
    b.P_term = bp.contains("P_term") ? square_from(bp.at("P_term"), "bpre.P_term", nm) : first_state_weight(nm);
    if (bp.contains("E1")) {
        b.E1 = matrix_from(bp.at("E1"), "bpre.E1");
    } else if (!bp.contains("R1")) {
        Matrix E1 = Matrix::Zero(1, nm);
        E1(0, 0) = 1.0;
        b.E1 = E1;
    }

    cfg.steps = get_or(doc, "steps", 1000L, "<root>");
    cfg.pcac.control_start = get_or(doc, "control_start", 100L, "<root>");
    if (doc.contains("x0")) {
        cfg.x0 = vector_from(doc.at("x0"), "x0", n);
    } else if (ex1) {
        cfg.x0 = 1000.0 * cfg.plant.B().col(0);
    } else {
        cfg.x0 = Vector::Zero(n);
    }

    // Dither
    if (doc.contains("dither")) {
        const json& d = doc.at("dither");
        const auto kind = d.is_string() ? d.get<std::string>() : get_or<std::string>(d, "kind", "none", "dither");
        const json opts = d.is_object() ? d : json::object();
        if (kind == "none") {
            cfg.dither.kind = Dither::Kind::None;
        } else if (kind == "impulse") {
            cfg.dither.kind = Dither::Kind::Impulse;
            if (opts.contains("schedule")) {
                try {
                    cfg.dither.schedule = opts.at("schedule").get<std::vector<std::pair<long, double>>>();
                } catch (const json::exception& e) {
                    throw ConfigError("dither.schedule", e.what());
                }
            } else {
                cfg.dither.schedule = default_impulse_schedule();
            }
        } else if (kind == "gaussian") {
            cfg.dither.kind = Dither::Kind::Gaussian;
            cfg.dither.start = get_or(opts, "start", 1000L, "dither");
            cfg.dither.end = get_or(opts, "end", 1500L, "dither");
            cfg.dither.stddev = get_or(opts, "std", 1.0, "dither");
            if (opts.contains("seed")) cfg.dither.seed = get_or<std::uint64_t>(opts, "seed", 0, "dither");
        } else {
            throw ConfigError("dither.kind", "unknown kind '" + kind + "'");
        }
    }

    const json ce = doc.value("certify", json::object());
    cfg.certify.enabled = get_or(ce, "enabled", true, "certify");
    cfg.certify.grid_points = get_or(ce, "grid_points", FrequencyGrid::kDefaultCount, "certify");
    cfg.certify.every = get_or(ce, "every", 1, "certify");
    cfg.certify.refine_iterations = get_or(ce, "refine_iterations", 30, "certify");
    cfg.certify.margin = get_or(ce, "margin", 0.0, "certify");
    const auto gain = get_or<std::string>(ce, "gain", "previous", "certify");
    if (gain != "previous" && gain != "current") throw ConfigError("certify.gain", "expected 'previous' or 'current'");
    cfg.certify.use_previous_gain = gain == "previous";
    cfg.certify.threads = get_or(ce, "threads", 0u, "certify");

    const json ro = doc.value("roa", json::object());
    cfg.roa.extent = get_or(ro, "extent", 1e6, "roa");
    cfg.roa.points_per_axis = get_or(ro, "points_per_axis", 21, "roa");
    cfg.roa.horizon = get_or(ro, "horizon", 5000, "roa");
    cfg.roa.window = get_or(ro, "window", 100, "roa");
    cfg.roa.tolerance = get_or(ro, "tolerance", 1e-6, "roa");
    cfg.roa.freeze_step = get_or(ro, "freeze_step", 1000L, "roa");
    cfg.roa.threads = get_or(ro, "threads", 0u, "roa");

    const json out = doc.value("output", json::object());
    cfg.output_dir = get_or<std::string>(out, "dir", "", "output");
    cfg.emit_plots = get_or(out, "emit_plots", false, "output");

    // Effective configuration, written back in canonical form.
    cfg.source = json{
        {"name", cfg.name},
        {"plant", {{"A", matrix_json(cfg.plant.A())}, {"B", matrix_json(cfg.plant.B())}, {"C", matrix_json(cfg.plant.C())}}},
        {"nonlinearity", nonlinearity_json(cfg.gamma)},
        {"sector", {{"M1", matrix_json(cfg.sector.M1())}, {"M2", matrix_json(cfg.sector.M2())}}},
        {"tsypkin", {{"M", matrix_json(cfg.M)}, {"N", matrix_json(cfg.N)}}},
        {"rls",
         {{"order", r.order}, {"theta0", vector_json(r.theta0)}, {"psi0", matrix_json(r.psi0)}, {"tau_n", r.tau_n},
          {"tau_d", r.tau_d}, {"eta", r.eta}, {"alpha", r.alpha},
          {"identify_during_open_loop", cfg.pcac.identify_during_open_loop}}},
        {"bpre", {{"horizon", b.horizon}, {"R1", matrix_json(b.R1)}, {"R2", matrix_json(b.R2)}, {"P_term", matrix_json(b.P_term)}}},
        {"steps", cfg.steps},
        {"control_start", cfg.pcac.control_start},
        {"x0", vector_json(cfg.x0)},
        {"certify",
         {{"enabled", cfg.certify.enabled}, {"grid_points", cfg.certify.grid_points}, {"every", cfg.certify.every},
          {"refine_iterations", cfg.certify.refine_iterations}, {"margin", cfg.certify.margin}, {"gain", gain}}},
        {"roa",
         {{"extent", cfg.roa.extent}, {"points_per_axis", cfg.roa.points_per_axis}, {"horizon", cfg.roa.horizon},
          {"window", cfg.roa.window}, {"tolerance", cfg.roa.tolerance}, {"freeze_step", cfg.roa.freeze_step}}},
    };
    json dj{{"kind", cfg.dither.kind == Dither::Kind::None      ? "none"
                     : cfg.dither.kind == Dither::Kind::Impulse ? "impulse"
                                                                : "gaussian"}};
    if (cfg.dither.kind == Dither::Kind::Impulse) dj["schedule"] = cfg.dither.schedule;
    if (cfg.dither.kind == Dither::Kind::Gaussian) {
        dj["start"] = cfg.dither.start;
        dj["end"] = cfg.dither.end;
        dj["std"] = cfg.dither.stddev;
        if (cfg.dither.seed) dj["seed"] = *cfg.dither.seed;
    }
    cfg.source["dither"] = dj;

    cfg.validate();
    return cfg;
}

void ScenarioConfig::validate() const {
    try {
        pcac.validate();
    } catch (const Error& e) {
        std::string what = e.what();
        const auto colon = what.find(": ");
        std::string rest = colon == std::string::npos ? what : what.substr(colon + 2);
        const auto field_end = rest.find(':');
        throw ConfigError(field_end == std::string::npos ? "pcac" : rest.substr(0, field_end), rest);
    }
    if (steps < 0) throw ConfigError("steps", "must be nonnegative");
    if (x0.size() != plant.states()) throw ConfigError("x0", "dimension must match the plant state");
    if (M.rows() != plant.inputs()) throw ConfigError("tsypkin.M", "must be m x m");
    if (!(N.isDiagonal(0.0) && N.diagonal().minCoeff() > 0.0)) {
        throw ConfigError("tsypkin.N", "must be diagonal with positive entries");
    }
    if (dither.kind == Dither::Kind::Gaussian && !dither.seed) {
        throw ConfigError("dither.seed", "required for gaussian dither");
    }
    if (dither.kind == Dither::Kind::Gaussian && !(dither.stddev >= 0.0)) {
        throw ConfigError("dither.std", "must be nonnegative");
    }
    if (certify.grid_points < 2) throw ConfigError("certify.grid_points", "must be at least 2");
    if (certify.every < 1) throw ConfigError("certify.every", "must be at least 1");
    if (roa.points_per_axis < 1) throw ConfigError("roa.points_per_axis", "must be at least 1");
    if (roa.window < 1 || roa.window > roa.horizon) throw ConfigError("roa.window", "must lie in [1, horizon]");
    if (!(roa.tolerance > 0.0)) throw ConfigError("roa.tolerance", "must be positive");
}

ScenarioConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("<file>", "cannot open " + path.string());
    json doc;
    try {
        doc = json::parse(in, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        throw ConfigError("<file>", e.what());
    }
    return parse_config(doc);
}

std::string config_hash(const json& source) {
    // FNV-1a over the canonical dump.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : source.dump()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << h;
    return os.str();
}

// ---- simulation ---------------------------------------------------------------

Vector gen_perturbation(const ScenarioConfig& cfg, long k) {
    const auto m = cfg.plant.inputs();
    Vector v = Vector::Zero(m);
    switch (cfg.dither.kind) {
        case Dither::Kind::None: break;
        case Dither::Kind::Impulse:
            for (const auto& [step, value] : cfg.dither.schedule) {
                if (step == k) v.setConstant(value);
            }
            break;
        case Dither::Kind::Gaussian:
            if (k >= cfg.dither.start && k <= cfg.dither.end) {
                const std::uint64_t seed = cfg.dither.seed.value_or(0);
                for (Eigen::Index i = 0; i < m; ++i) v(i) = cfg.dither.stddev * standard_normal(seed, k, i);
            }
            break;
    }
    return v;
}

namespace {

struct LoopOutput {
    std::vector<StepRecord> rows;
    std::vector<StateSpace> realizations;  // one per certified row
};

// Runs steps 0..last and records the closed loop at rows selected by `certify_row`.
template <typename Select>
LoopOutput run_loop(const ScenarioConfig& cfg, long last, Select certify_row) {
    const LurePlant plant(cfg.plant, cfg.gamma);
    PcacState state(cfg.pcac);
    LoopOutput out;
    out.rows.reserve(static_cast<std::size_t>(last) + 1);

    Vector x = cfg.x0;
    Vector u = Vector::Zero(cfg.plant.inputs());  // u_0 = 0
    long gain_step = -1;                          // -1: gain from theta_0
    for (long k = 0; k <= last; ++k) {
        StepRecord row;
        row.k = k;
        row.v = gen_perturbation(cfg, k);
        row.u = u;
        row.closed_loop = k >= cfg.pcac.control_start;

        const PlantStep ps = step_plant(plant, x, u, row.v);
        row.y = ps.y;
        if (!ps.x_next.allFinite() || !row.y.allFinite()) {
            throw SimulationFailure("plant state became non-finite at step " + std::to_string(k));
        }

        const bool certify_here = certify_row(k);
        const BocfModel previous_model = state.model;
        const Matrix previous_gain = state.gain;
        const long previous_gain_step = gain_step;

        const PcacStepResult res = pcac_step(state, row.y, u, cfg.pcac);
        if (!res.flagged || res.reason == "DegenerateVariance") gain_step = k;
        row.theta = state.rls.theta;
        row.beta = res.beta;
        row.flagged = res.flagged;
        row.flag = res.reason;

        if (certify_here) {
            const bool prev = cfg.certify.use_previous_gain;
            out.realizations.push_back(closed_loop_realization(
                cfg.plant, prev ? controller_realization(previous_model, previous_gain)
                                : controller_realization(state.model, state.gain)));
            row.gain_step = prev ? previous_gain_step : gain_step;
        }

        out.rows.push_back(std::move(row));
        x = ps.x_next;
        u = res.u_next;
    }
    return out;
}

}  // namespace

RunArtifacts run_scenario(const ScenarioConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    auto select = [&](long k) {
        return cfg.certify.enabled && k >= cfg.pcac.control_start && k % cfg.certify.every == 0;
    };
    LoopOutput loop = run_loop(cfg, cfg.steps, select);

    RunArtifacts art;
    art.rows = std::move(loop.rows);
    art.realizations = std::move(loop.realizations);
    if (cfg.certify.enabled && !art.realizations.empty()) {
        CertifyOptions opts{FrequencyGrid(cfg.certify.grid_points), cfg.certify.refine_iterations, cfg.certify.margin};
        const SectorBound bound = cfg.sector;
        std::vector<CertificatePair> trace =
            certificate_trace(art.realizations, bound, cfg.M, cfg.N, opts, cfg.certify.threads);
        std::size_t next = 0;
        for (auto& row : art.rows) {
            if (select(row.k)) row.cert = std::move(trace[next++]);
        }
    }
    art.summary = summarize(cfg, art.rows);
    art.summary.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return art;
}

StateSpace closed_loop_at(const ScenarioConfig& cfg, long k) {
    if (k < 0) throw ConfigError("snapshot", "step must be nonnegative");
    LoopOutput loop = run_loop(cfg, k, [k](long step) { return step == k; });
    return loop.realizations.back();
}

RunSummary summarize(const ScenarioConfig& cfg, const std::vector<StepRecord>& rows) {
    RunSummary s;
    s.name = cfg.name;
    s.steps = cfg.steps;
    s.control_start = cfg.pcac.control_start;
    if (cfg.dither.kind == Dither::Kind::Gaussian) s.seed = cfg.dither.seed;
    s.config_hash = config_hash(cfg.source);
    if (!rows.empty()) s.final_abs_y = rows.back().y.cwiseAbs().maxCoeff();

    long certified_cl = 0, circle_fail = 0, tsypkin_fail = 0;
    for (const auto& row : rows) {
        if (row.flagged) ++s.flagged_steps;
        if (!row.cert) continue;
        const bool cc = row.cert->circle.pass();
        const bool tc = row.cert->tsypkin.pass();
        if (cc && s.first_circle_pass < 0) s.first_circle_pass = row.k;
        if (tc && s.first_tsypkin_pass < 0) s.first_tsypkin_pass = row.k;
        if (cc && tc && s.first_all_pass < 0) s.first_all_pass = row.k;
        if (row.closed_loop) {
            ++certified_cl;
            if (!cc) ++circle_fail;
            if (!tc) ++tsypkin_fail;
        }
    }
    if (certified_cl > 0) {
        s.circle_fail_fraction = static_cast<double>(circle_fail) / static_cast<double>(certified_cl);
        s.tsypkin_fail_fraction = static_cast<double>(tsypkin_fail) / static_cast<double>(certified_cl);
    }

    // Walk backwards: the pass-through-end step is the start of the final passing run.
    bool cc_run = true, tc_run = true;
    for (auto it = rows.rbegin(); it != rows.rend(); ++it) {
        if (!it->cert) continue;
        cc_run = cc_run && it->cert->circle.pass();
        tc_run = tc_run && it->cert->tsypkin.pass();
        if (cc_run) s.circle_pass_from = it->k;
        if (tc_run) s.tsypkin_pass_from = it->k;
        if (cc_run && tc_run) s.all_pass_from = it->k;
        if (!cc_run && !tc_run) break;
    }
    return s;
}

// ---- region of attraction ------------------------------------------------------

std::vector<Vector> roa_grid(Eigen::Index plant_states, const RoaSettings& s) {
    std::vector<double> axis(static_cast<std::size_t>(s.points_per_axis));
    for (int i = 0; i < s.points_per_axis; ++i) {
        axis[static_cast<std::size_t>(i)] =
            s.points_per_axis == 1 ? 0.0 : -s.extent + 2.0 * s.extent * i / (s.points_per_axis - 1);
    }
    std::vector<Vector> out;
    if (plant_states == 1) {
        for (double a : axis) out.push_back(Vector::Constant(1, a));
        return out;
    }
    for (double a : axis) {
        for (double b : axis) {
            Vector x = Vector::Zero(plant_states);
            x(0) = a;
            x(1) = b;
            out.push_back(std::move(x));
        }
    }
    return out;
}

RoaResult roa_sweep(const LurePlant& loop, std::span<const Vector> plant_x0, const RoaSettings& s) {
    RoaResult res;
    res.points.resize(plant_x0.size());
    const auto dim = loop.linear.states();
    const Vector zero = Vector::Zero(loop.linear.inputs());
    parallel_for(plant_x0.size(), s.threads, [&](std::size_t i) {
        Vector x = Vector::Zero(dim);
        x.head(plant_x0[i].size()) = plant_x0[i];
        double tail = 0.0;
        for (int k = 0; k <= s.horizon; ++k) {
            PlantStep st = step_plant(loop, x, zero, zero);
            if (k > s.horizon - s.window) {
                const double ay = st.y.cwiseAbs().maxCoeff();
                tail = std::isfinite(ay) ? std::max(tail, ay) : std::numeric_limits<double>::infinity();
            }
            x = std::move(st.x_next);
        }
        res.points[i].x0 = plant_x0[i];
        res.points[i].tail_max = tail;
        res.points[i].converged = tail < s.tolerance;
    });
    for (const auto& p : res.points) res.converged += p.converged ? 1 : 0;
    return res;
}

RoaResult roa_sweep(const ScenarioConfig& cfg, RoaSource source) {
    const std::vector<Vector> grid = roa_grid(cfg.plant.states(), cfg.roa);
    if (source == RoaSource::OpenLoop) {
        return roa_sweep(LurePlant(cfg.plant, cfg.gamma), grid, cfg.roa);
    }
    // Controller state starts at zero for every grid point.
    const StateSpace frozen = closed_loop_at(cfg, cfg.roa.freeze_step);
    return roa_sweep(LurePlant(frozen, cfg.gamma), grid, cfg.roa);
}

}  // namespace pcac
