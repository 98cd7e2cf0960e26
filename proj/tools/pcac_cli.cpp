// pcac: run, sweep, certify and plot Lur'e/PCAC scenarios.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "pcac/artifacts.hpp"
#include "pcac/error.hpp"
#include "pcac/scenario.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<long> steps;
    std::optional<long> kc;
    std::optional<int> grid_points;
    std::optional<int> cert_every;
    std::string out;
    bool emit_plots = false;
};

pcac::ScenarioConfig load(const std::string& path, const Overrides& o) {
    nlohmann::json doc;
    if (path == "example1") {
        doc = {{"preset", "example1"}};
    } else {
        std::ifstream in(path);
        if (!in) throw pcac::ConfigError("<file>", "cannot open " + path);
        try {
            doc = nlohmann::json::parse(in, nullptr, true, true);
        } catch (const nlohmann::json::parse_error& e) {
            throw pcac::ConfigError("<file>", e.what());
        }
    }
    if (o.steps) doc["steps"] = *o.steps;
    if (o.kc) doc["control_start"] = *o.kc;
    if (o.grid_points) doc["certify"]["grid_points"] = *o.grid_points;
    if (o.cert_every) doc["certify"]["every"] = *o.cert_every;
    if (o.seed) {
        if (!doc.contains("dither") || !doc["dither"].is_object()) {
            throw pcac::ConfigError("--seed", "only applies to a gaussian dither object");
        }
        doc["dither"]["seed"] = *o.seed;
    }
    if (!o.out.empty()) doc["output"]["dir"] = o.out;
    if (o.emit_plots) doc["output"]["emit_plots"] = true;
    return pcac::parse_config(doc);
}

std::filesystem::path out_dir(const pcac::ScenarioConfig& cfg) {
    return cfg.output_dir.empty() ? std::filesystem::path("out") / cfg.name : std::filesystem::path(cfg.output_dir);
}

int cmd_run(const std::string& config, const Overrides& o) {
    const auto cfg = load(config, o);
    const auto art = pcac::run_scenario(cfg);
    const auto dir = out_dir(cfg);
    pcac::write_artifacts(dir, art, cfg);
    if (cfg.emit_plots) {
        for (const auto& f : pcac::emit_plots(dir)) std::cout << "wrote " << f.string() << '\n';
    }
    std::cout << pcac::summary_json(art.summary).dump(2) << '\n';
    return kExitOk;
}

int cmd_roa(const std::string& config, const std::string& source, const Overrides& o) {
    const auto cfg = load(config, o);
    const auto src = source == "open" ? pcac::RoaSource::OpenLoop : pcac::RoaSource::FrozenClosedLoop;
    const auto roa = pcac::roa_sweep(cfg, src);
    const auto dir = out_dir(cfg);
    std::filesystem::create_directories(dir);
    const auto path = dir / ("roa_" + source + ".csv");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    pcac::write_roa_csv(out, roa);
    std::cout << source << ": " << roa.converged << " of " << roa.points.size() << " grid points converged ("
              << path.string() << ")\n";
    return kExitOk;
}

void print_circle(const pcac::CircleReport& r) {
    std::printf("circle   alpha=%.10g beta=%.10g argmin_psi=%.6g CC1=%d CC2=%d%s%s\n", r.alpha_cc, r.beta_cc,
                r.argmin_psi, int(r.cc1_pass), int(r.cc2_pass), r.flagged ? " flag=" : "", r.reason.c_str());
}

void print_tsypkin(const pcac::TsypkinReport& r) {
    std::printf(
        "tsypkin  zeta1=%.10g zeta2=%d/%d zeta3=%.10g alpha=%.10g beta=%.10g argmin_psi=%.6g TC1=%d TC2=%d "
        "TC3=%d%s%s\n",
        r.zeta1, r.zeta2, r.full_dimension, r.zeta3_min_eig, r.alpha_tc, r.beta_tc, r.argmin_psi, int(r.tc1_pass),
        int(r.tc2_pass), int(r.tc3_pass), r.flagged ? " flag=" : "", r.reason.c_str());
}

int cmd_certify(const std::string& config, long snapshot, bool open_loop, const Overrides& o) {
    const auto cfg = load(config, o);
    const pcac::StateSpace sys = open_loop ? cfg.plant : pcac::closed_loop_at(cfg, snapshot);
    const pcac::CertifyOptions opts{pcac::FrequencyGrid(cfg.certify.grid_points), cfg.certify.refine_iterations,
                                    cfg.certify.margin};
    std::printf("%s (order %ld)\n", open_loop ? "open loop" : ("closed loop at k=" + std::to_string(snapshot)).c_str(),
                static_cast<long>(sys.states()));
    print_circle(pcac::circle_certificate(sys, cfg.sector, opts));
    print_tsypkin(pcac::tsypkin_certificate(sys, cfg.M, cfg.N, opts));
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Lur'e plant simulation under predictive cost adaptive control"};
    app.require_subcommand(1);
    Overrides o;
    auto add_common = [&o](CLI::App* sub) {
        sub->add_option("--steps", o.steps, "Number of steps");
        sub->add_option("--kc", o.kc, "Control start step");
        sub->add_option("--seed", o.seed, "Gaussian dither seed");
        sub->add_option("--grid-points", o.grid_points, "Frequency grid size");
        sub->add_option("--cert-every", o.cert_every, "Certify every n-th step");
        sub->add_option("--out", o.out, "Output directory");
        sub->add_flag("--emit-plots", o.emit_plots, "Render SVG charts after the run");
    };

    std::string config;
    auto* run = app.add_subcommand("run", "Simulate a scenario and write artifacts");
    run->add_option("config", config, "Scenario JSON file, or 'example1'")->required();
    add_common(run);

    std::string source = "frozen";
    auto* roa = app.add_subcommand("roa", "Region-of-attraction grid sweep");
    roa->add_option("config", config, "Scenario JSON file, or 'example1'")->required();
    roa->add_option("--source", source, "open | frozen")->check(CLI::IsMember({"open", "frozen"}));
    add_common(roa);

    long snapshot = 0;
    bool open_loop = false;
    auto* cert = app.add_subcommand("certify", "Certificate reports for one step");
    cert->add_option("config", config, "Scenario JSON file, or 'example1'")->required();
    cert->add_option("--snapshot", snapshot, "Step whose closed loop is certified");
    cert->add_flag("--open-loop", open_loop, "Certify the plant alone");
    add_common(cert);

    std::string artifacts_dir;
    auto* plot = app.add_subcommand("plot", "Render SVG charts from an artifacts directory");
    plot->add_option("dir", artifacts_dir, "Directory containing steps.csv")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*run) return cmd_run(config, o);
        if (*roa) return cmd_roa(config, source, o);
        if (*cert) return cmd_certify(config, snapshot, open_loop, o);
        if (*plot) {
            for (const auto& f : pcac::emit_plots(artifacts_dir)) std::cout << "wrote " << f.string() << '\n';
            return kExitOk;
        }
    } catch (const pcac::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const pcac::Error& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const pcac::SimulationFailure& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return kExitOk;
}
