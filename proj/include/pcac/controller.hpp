#pragma once

#include <string>

#include "pcac/bocf.hpp"
#include "pcac/bpre.hpp"
#include "pcac/rls.hpp"
#include "pcac/sslin.hpp"

namespace pcac {

struct PcacConfig {
    RlsConfig rls;
    BpreConfig bpre;
    /// First step whose requested control is applied; earlier controls are zero.
    long control_start = 100;
    /// Run identification during the open-loop phase. When false, the
    /// estimator starts fresh at control_start with its own step clock.
    bool identify_during_open_loop = true;

    void validate() const;
};

/// Everything live after step k: theta_{k+1}, the model built from it,
/// K_{k+1}, x_{m,k+1} and the requested control u_{k+1}.
struct PcacState {
    RlsState rls;
    BocfModel model;
    Matrix gain;
    Vector x_m;
    Vector u_next;
    long k = 0;

    /// Initial model and gain come from theta_0; u_0 = 0.
    explicit PcacState(const PcacConfig& cfg);
};

struct PcacStepResult {
    Vector u_next;
    double beta = 1.0;
    bool flagged = false;
    std::string reason;
};

/// Identification -> realization -> gain -> control for one step, given the
/// measurement y_k and the control u_k that was applied. Any numerical failure
/// yields u_{k+1} = 0 and a flagged result.
PcacStepResult pcac_step(PcacState& state, const Vector& y, const Vector& u_applied, const PcacConfig& cfg);

/// Controller x_{c,k+1} = A_c x_{c,k} + B_c y_k, u_k = C_c x_{c,k}.
struct ControllerRealization {
    Matrix Ac;  // A_m - F C_m + B_m K
    Matrix Bc;  // F = [-F_1; ...; -F_n]
    Matrix Cc;  // K
};

ControllerRealization controller_realization(const BocfModel& model, const Matrix& K);

/// Positive-feedback interconnection of the plant and the controller:
/// A~ = [[A, B C_c], [B_c C, A_c]], B~ = [B; 0], C~ = [C 0].
StateSpace closed_loop_realization(const StateSpace& plant, const ControllerRealization& ctrl);

}  // namespace pcac
