#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "pcac/artifacts.hpp"
#include "pcac/scenario.hpp"
#include "test_support.hpp"

namespace pcac {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

ScenarioConfig short_run(long steps, json extra = json::object()) {
    json doc{{"preset", "example1"}, {"steps", steps}, {"certify", {{"grid_points", 256}, {"threads", 1}}}};
    doc.update(extra);
    return parse_config(doc);
}

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("pcac_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

long step_or_none(const json& j) { return j.is_null() ? -1 : j.get<long>(); }

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

TEST(Perturbation, ImpulseSchedule) {
    const ScenarioConfig cfg = parse_config({{"preset", "example1"}, {"dither", "impulse"}});
    EXPECT_EQ(gen_perturbation(cfg, 1000)(0), 1.0);
    EXPECT_EQ(gen_perturbation(cfg, 1200)(0), -1.0);
    EXPECT_EQ(gen_perturbation(cfg, 2000)(0), -1.0);
    EXPECT_EQ(gen_perturbation(cfg, 999)(0), 0.0);
    EXPECT_EQ(gen_perturbation(cfg, 1001)(0), 0.0);
}

TEST(Perturbation, GaussianWindowAndValue) {
    const ScenarioConfig cfg =
        parse_config({{"preset", "example1"}, {"dither", {{"kind", "gaussian"}, {"seed", 7}}}});
    EXPECT_EQ(gen_perturbation(cfg, 999)(0), 0.0);
    EXPECT_EQ(gen_perturbation(cfg, 1501)(0), 0.0);
    // SplitMix64 + Box-Muller, computed independently for seed 7.
    EXPECT_NEAR(gen_perturbation(cfg, 1250)(0), -0.38399934807905695, 1e-15);
    EXPECT_EQ(gen_perturbation(cfg, 1250), gen_perturbation(cfg, 1250));
}

TEST(Perturbation, GaussianMoments) {
    const ScenarioConfig cfg = parse_config(
        {{"preset", "example1"}, {"dither", {{"kind", "gaussian"}, {"seed", 11}, {"start", 0}, {"end", 199999}}}});
    double sum = 0, sq = 0;
    const int count = 200000;
    for (long k = 0; k < count; ++k) {
        const double v = gen_perturbation(cfg, k)(0);
        sum += v;
        sq += v * v;
    }
    EXPECT_NEAR(sum / count, 0.0, 0.01);
    EXPECT_NEAR(sq / count, 1.0, 0.02);
}

TEST(Config, ErrorsNameTheField) {
    try {
        parse_config({{"preset", "example1"}, {"rls", {{"eta", -1.0}}}});
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.field(), "rls.eta");
    }
    try {
        parse_config({{"preset", "example1"}, {"dither", {{"kind", "gaussian"}}}});
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.field(), "dither.seed");
    }
    try {
        parse_config({{"preset", "example1"}, {"x0", {1.0, 2.0, 3.0}}});
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.field(), "x0");
    }
    EXPECT_THROW(parse_config({{"steps", 10}}), ConfigError);
    EXPECT_THROW(parse_config({{"preset", "nope"}}), ConfigError);
}

TEST(Config, PresetDefaults) {
    const ScenarioConfig cfg = example1_config();
    EXPECT_EQ(cfg.pcac.rls.order, 10);
    EXPECT_EQ(cfg.pcac.rls.tau_n, 40);
    EXPECT_EQ(cfg.pcac.rls.tau_d, 200);
    EXPECT_EQ(cfg.pcac.bpre.horizon, 20);
    EXPECT_EQ(cfg.pcac.bpre.R2(0, 0), 1e-4);
    EXPECT_EQ(cfg.N(0, 0), 0.08);
    EXPECT_EQ(cfg.x0, (Vector(2) << 1000.0, 0.0).finished());
    EXPECT_EQ(cfg.pcac.control_start, 100);
}

TEST(Config, HashTracksEffectiveConfig) {
    EXPECT_EQ(config_hash(short_run(50).source), config_hash(short_run(50).source));
    EXPECT_NE(config_hash(short_run(50).source), config_hash(short_run(51).source));
    EXPECT_EQ(config_hash(short_run(50).source).size(), 16u);
}

TEST(RunScenario, ZeroStepsGivesOneRow) {
    const RunArtifacts art = run_scenario(short_run(0));
    ASSERT_EQ(art.rows.size(), 1u);
    EXPECT_EQ(art.rows[0].k, 0);
    EXPECT_EQ(art.rows[0].y(0), 1000.0);
}

TEST(RunScenario, RowCountAndCertifiedRows) {
    const ScenarioConfig cfg = short_run(130);
    const RunArtifacts art = run_scenario(cfg);
    ASSERT_EQ(art.rows.size(), 131u);
    for (const StepRecord& r : art.rows) {
        EXPECT_EQ(r.closed_loop, r.k >= cfg.pcac.control_start);
        EXPECT_EQ(r.cert.has_value(), r.closed_loop) << r.k;
        if (r.cert) {
            EXPECT_EQ(r.gain_step, r.k - 1);
        }
    }
    EXPECT_EQ(art.realizations.size(), 31u);
    EXPECT_EQ(art.realizations.front().states(), 12);
}

TEST(RunScenario, OpenLoopRowsHaveZeroControl) {
    const RunArtifacts art = run_scenario(short_run(99));
    for (const StepRecord& r : art.rows) EXPECT_EQ(r.u(0), 0.0);
}

TEST(RunScenario, TableIsByteIdentical) {
    const ScenarioConfig cfg = short_run(120, {{"dither", {{"kind", "gaussian"}, {"seed", 3}, {"start", 105}, {"end", 115}}}});
    std::ostringstream a, b;
    write_table(a, run_scenario(cfg).rows);
    write_table(b, run_scenario(cfg).rows);
    EXPECT_EQ(a.str(), b.str());
    EXPECT_FALSE(a.str().empty());
}

TEST(RunScenario, ClosedLoopAtMatchesTrace) {
    const ScenarioConfig cfg = short_run(115);
    const RunArtifacts art = run_scenario(cfg);
    const StateSpace frozen = closed_loop_at(cfg, 110);
    EXPECT_EQ(frozen.A(), art.realizations[10].A());
    EXPECT_EQ(frozen.C(), art.realizations[10].C());
}

TEST(RunScenario, CurrentGainConvention) {
    const ScenarioConfig prev = short_run(110);
    const ScenarioConfig curr = short_run(110, {{"certify", {{"grid_points", 256}, {"gain", "current"}}}});
    const RunArtifacts a = run_scenario(prev);
    const RunArtifacts b = run_scenario(curr);
    EXPECT_EQ(b.rows.back().gain_step, 110);
    // Row k under "current" certifies what row k + 1 certifies under "previous".
    EXPECT_EQ(b.realizations[0].A(), a.realizations[1].A());
}

TEST(Summary, DerivableFromTable) {
    const ScenarioConfig cfg = short_run(140, {{"output", {{"dir", scratch_dir("summary").string()}}}});
    const RunArtifacts art = run_scenario(cfg);
    const fs::path dir = cfg.output_dir;
    write_artifacts(dir, art, cfg);
    const Table t = read_table(dir / "steps.csv");
    ASSERT_EQ(t.rows(), art.rows.size());

    const int certified = t.column("certified"), closed = t.column("closed_loop");
    const int cc = t.column("cc_pass"), all = t.column("all_pass");
    ASSERT_GE(certified, 0);
    long first_cc = -1, first_all = -1, all_from = -1;
    int cc_fail = 0, rows = 0;
    for (std::size_t i = 0; i < t.rows(); ++i) {
        if (t.columns[static_cast<std::size_t>(certified)][i] != 1.0) continue;
        const long k = static_cast<long>(t.columns[0][i]);
        const bool c = t.columns[static_cast<std::size_t>(cc)][i] == 1.0;
        const bool a = t.columns[static_cast<std::size_t>(all)][i] == 1.0;
        if (c && first_cc < 0) first_cc = k;
        if (a && first_all < 0) first_all = k;
        if (a && all_from < 0) all_from = k;
        if (!a) all_from = -1;
        if (t.columns[static_cast<std::size_t>(closed)][i] == 1.0) {
            ++rows;
            if (!c) ++cc_fail;
        }
    }
    const json s = json::parse(slurp(dir / "summary.json"));
    EXPECT_EQ(s.at("schema_version"), RunSummary::kSchemaVersion);
    EXPECT_EQ(step_or_none(s.at("first_pass").at("circle")), first_cc);
    EXPECT_EQ(step_or_none(s.at("first_pass").at("all")), first_all);
    EXPECT_EQ(step_or_none(s.at("pass_through_end_from").at("all")), all_from);
    EXPECT_NEAR(s.at("closed_loop_fail_fraction").at("circle").get<double>(), static_cast<double>(cc_fail) / rows, 1e-15);
    EXPECT_EQ(s.at("config_hash").get<std::string>(), config_hash(cfg.source));
    EXPECT_NEAR(s.at("final_abs_y").get<double>(), std::abs(art.rows.back().y(0)), 0.0);

    // config.json reproduces the same effective configuration.
    const ScenarioConfig again = load_config(dir / "config.json");
    EXPECT_EQ(config_hash(again.source), config_hash(cfg.source));
}

TEST(Artifacts, FormatDoubleRoundTrips) {
    std::mt19937_64 rng(91);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 1000; ++i) {
        const double x = u(rng) * std::pow(10.0, i % 40 - 20);
        EXPECT_EQ(std::stod(format_double(x)), x);
    }
    EXPECT_EQ(format_double(std::numeric_limits<double>::quiet_NaN()), "nan");
    EXPECT_EQ(format_double(-std::numeric_limits<double>::infinity()), "-inf");
}

TEST(Artifacts, TableRoundTrip) {
    const ScenarioConfig cfg = short_run(105);
    const RunArtifacts art = run_scenario(cfg);
    const fs::path dir = scratch_dir("roundtrip");
    write_artifacts(dir, art, cfg);
    const Table t = read_table(dir / "steps.csv");
    const auto thetas = t.indexed("theta");
    ASSERT_EQ(thetas.size(), 20u);
    for (std::size_t i = 0; i < art.rows.size(); ++i) {
        EXPECT_EQ(t.columns[static_cast<std::size_t>(t.column("y0"))][i], art.rows[i].y(0));
        EXPECT_EQ(t.columns[static_cast<std::size_t>(thetas[3])][i], art.rows[i].theta(3));
    }
    const int beta = t.column("beta_cc");
    EXPECT_EQ(t.columns[static_cast<std::size_t>(beta)].back(), art.rows.back().cert->circle.beta_cc);
}

TEST(Plots, EmptyTableWritesNothing) {
    const fs::path dir = scratch_dir("plots_empty");
    std::ofstream(dir / "steps.csv") << "";
    EXPECT_TRUE(emit_plots(dir).empty());
}

TEST(Plots, RendersBothCharts) {
    const ScenarioConfig cfg = short_run(130);
    const fs::path dir = scratch_dir("plots");
    write_artifacts(dir, run_scenario(cfg), cfg);
    const auto files = emit_plots(dir);
    ASSERT_EQ(files.size(), 2u);
    for (const auto& f : files) EXPECT_TRUE(fs::exists(f));
    const std::string certs = slurp(dir / "certificates.svg");
    EXPECT_NE(certs.find("<svg"), std::string::npos);
    // Pass/fail colouring: CC1 (1 - alpha) is positive for this run, beta_cc negative somewhere.
    EXPECT_NE(certs.find("#1f77b4"), std::string::npos);
    EXPECT_NE(certs.find("#d62728"), std::string::npos);
}

TEST(Roa, OriginConvergesAndToleranceIsMonotone) {
    const LurePlant loop(testing::example1_plant(), Nonlinearity::tanh());
    RoaSettings s;
    s.points_per_axis = 5;
    s.extent = 10.0;
    s.horizon = 400;
    s.window = 50;
    s.threads = 1;
    const auto grid = roa_grid(2, s);
    ASSERT_EQ(grid.size(), 25u);
    EXPECT_TRUE(grid[12].isZero(0.0));
    int previous = -1;
    for (double tol : {1e-6, 1e-2, 1.0, 10.0, 100.0}) {
        s.tolerance = tol;
        const RoaResult r = roa_sweep(loop, grid, s);
        EXPECT_TRUE(r.points[12].converged);
        EXPECT_GE(r.converged, previous);
        previous = r.converged;
    }
    EXPECT_EQ(previous, 25);
}

TEST(Roa, StableLinearLoopConvergesEverywhere) {
    Matrix A(2, 2);
    A << 0.5, 0.1, 0.0, 0.3;
    const LurePlant loop(StateSpace::strictly_proper(A, (Matrix(2, 1) << 0.1, 0.0).finished(),
                                                     (Matrix(1, 2) << 1.0, 0.0).finished()),
                         Nonlinearity::tanh());
    RoaSettings s;
    s.points_per_axis = 7;
    s.horizon = 500;
    s.window = 50;
    const RoaResult r = roa_sweep(loop, roa_grid(2, s), s);
    EXPECT_EQ(r.converged, 49);
}

}  // namespace
}  // namespace pcac
