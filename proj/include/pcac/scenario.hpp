#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pcac/certify.hpp"
#include "pcac/controller.hpp"
#include "pcac/lure.hpp"
#include "pcac/sslin.hpp"

namespace pcac {

/// Malformed or inconsistent scenario configuration; `field` names the key.
class ConfigError : public std::runtime_error {
   public:
    ConfigError(std::string field, const std::string& why)
        : std::runtime_error(field + ": " + why), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

   private:
    std::string field_;
};

/// The simulation could not continue (e.g. the plant state became non-finite).
class SimulationFailure : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

struct Dither {
    enum class Kind { None, Impulse, Gaussian };
    Kind kind = Kind::None;
    std::vector<std::pair<long, double>> schedule;  // impulse: (step, value)
    long start = 1000;                              // gaussian window, inclusive
    long end = 1500;
    double stddev = 1.0;
    std::optional<std::uint64_t> seed;
};

struct CertifySettings {
    bool enabled = true;
    int grid_points = FrequencyGrid::kDefaultCount;
    int every = 1;  // certify closed-loop rows with k % every == 0
    int refine_iterations = 30;
    double margin = 0.0;
    /// Row k certifies the controller that produced u_k (theta_k, K_k from the
    /// pass of step k-1). When false, use theta_{k+1}, K_{k+1} from step k.
    bool use_previous_gain = true;
    unsigned threads = 0;
};

struct RoaSettings {
    double extent = 1e6;      // grid spans [-extent, extent] on the first two plant states
    int points_per_axis = 21;
    int horizon = 5000;
    int window = 100;         // convergence judged on the final `window` outputs
    double tolerance = 1e-6;
    long freeze_step = 1000;  // closed loop frozen at this step of the scenario run
    unsigned threads = 0;
};

struct ScenarioConfig {
    std::string name = "scenario";
    StateSpace plant;
    Nonlinearity gamma = Nonlinearity::tanh();
    SectorBound sector = SectorBound::scalar(0.0, 1.0);
    Matrix M;  // Tsypkin sector [0, M]
    Matrix N;  // Tsypkin multiplier, positive diagonal
    PcacConfig pcac;
    long steps = 1000;
    Vector x0;
    Dither dither;
    CertifySettings certify;
    RoaSettings roa;
    std::string output_dir;
    bool emit_plots = false;
    nlohmann::json source;  // effective configuration, used for the hash

    /// Throws ConfigError on inconsistent dimensions or values.
    void validate() const;
};

/// The plant, nonlinearity, hyperparameters and horizon of the worked example
/// (G = (q - 1)/(q^2 - q + 0.5), tanh, n-hat = 10, l = 20, ...).
ScenarioConfig example1_config();

/// Parses a JSON scenario. `"preset": "example1"` seeds every field, explicit
/// keys override it.
ScenarioConfig parse_config(const nlohmann::json& doc);
ScenarioConfig load_config(const std::filesystem::path& path);

/// Default impulse schedule: +1 at 1000, 1400, 1800; -1 at 1200, 1600, 2000.
std::vector<std::pair<long, double>> default_impulse_schedule();

/// v_k for the configured dither. Gaussian draws are a pure function of
/// (seed, k, component): SplitMix64 feeds a Box-Muller transform.
Vector gen_perturbation(const ScenarioConfig& cfg, long k);

struct StepRecord {
    long k = 0;
    Vector y, u, v;
    Vector theta;  // theta_{k+1}
    double beta = 1.0;
    bool closed_loop = false;
    bool flagged = false;
    std::string flag;
    long gain_step = 0;  // step whose pass produced the certified gain
    std::optional<CertificatePair> cert;
};

struct RunSummary {
    static constexpr int kSchemaVersion = 1;
    std::string name;
    long steps = 0;
    long control_start = 0;
    std::optional<std::uint64_t> seed;
    std::string config_hash;
    double wall_time_s = 0.0;
    double final_abs_y = 0.0;
    long flagged_steps = 0;
    // First certified row where the criterion passes (-1: never).
    long first_circle_pass = -1;
    long first_tsypkin_pass = -1;
    long first_all_pass = -1;
    // Earliest step from which every certified row passes through the end (-1: never).
    long circle_pass_from = -1;
    long tsypkin_pass_from = -1;
    long all_pass_from = -1;
    double circle_fail_fraction = 0.0;  // over certified closed-loop rows
    double tsypkin_fail_fraction = 0.0;
};

struct RunArtifacts {
    std::vector<StepRecord> rows;  // steps + 1 rows
    RunSummary summary;
    std::vector<StateSpace> realizations;  // closed loop certified at row k
};

/// Runs the plant/PCAC loop, then evaluates certificates on the recorded
/// closed-loop realizations. Numerical step failures are flagged in-row.
RunArtifacts run_scenario(const ScenarioConfig& cfg);

/// Closed-loop realization certified at step k (runs the loop up to k).
StateSpace closed_loop_at(const ScenarioConfig& cfg, long k);

RunSummary summarize(const ScenarioConfig& cfg, const std::vector<StepRecord>& rows);

std::string config_hash(const nlohmann::json& source);

struct RoaPoint {
    Vector x0;
    bool converged = false;
    double tail_max = 0.0;  // max |y| over the convergence window
};

struct RoaResult {
    std::vector<RoaPoint> points;
    int converged = 0;
};

/// Grid of initial plant states: `points_per_axis` values on [-extent, extent]
/// along the first two coordinates (first only when n = 1), others zero.
std::vector<Vector> roa_grid(Eigen::Index plant_states, const RoaSettings& s);

/// Simulates loop (a Lur'e system) from [x0; 0] for every grid point and
/// classifies convergence by max |y| over the final window.
RoaResult roa_sweep(const LurePlant& loop, std::span<const Vector> plant_x0, const RoaSettings& s);

enum class RoaSource { OpenLoop, FrozenClosedLoop };
RoaResult roa_sweep(const ScenarioConfig& cfg, RoaSource source);

}  // namespace pcac
