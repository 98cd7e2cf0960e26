#pragma once

#include <deque>
#include <span>

#include "pcac/sslin.hpp"

namespace pcac {

/// Inverse CDF of the F(d1, d2) distribution.
double f_inverse_cdf(double probability, double d1, double d2);

/// Hyperparameters of RLS with F-test variable-rate forgetting.
struct RlsConfig {
    int order = 1;    // model order n-hat
    int outputs = 1;  // p
    int inputs = 1;   // m
    Vector theta0;
    Matrix psi0;
    int tau_n = 40;
    int tau_d = 200;
    double eta = 0.1;
    double alpha = 0.001;

    Eigen::Index parameter_count() const {
        return static_cast<Eigen::Index>(order) * outputs * (inputs + outputs);
    }
    /// Throws Error(InvalidArgument) naming the offending field.
    void validate() const;
};

/// Live estimator state at step k. Histories are newest-first for y and u
/// (front = y_{k-1}) and oldest-first for identification errors.
struct RlsState {
    Vector theta;
    Matrix psi;
    std::deque<Vector> past_y;
    std::deque<Vector> past_u;
    std::deque<Vector> errors;
    std::size_t capacity = 0;
    long k = 0;

    explicit RlsState(const RlsConfig& cfg);

    /// y_{k-i} for i >= 1; zero before the first sample.
    Vector y_lag(int i) const;
    Vector u_lag(int i) const;
};

/// phi_k = [-y_{k-1}^T ... -y_{k-n}^T  u_{k-1}^T ... u_{k-n}^T] (x) I_p.
Matrix regressor(const RlsState& state, const RlsConfig& cfg);

struct ForgettingFactor {
    double beta = 1.0;
    double g = 0.0;           // test statistic before the unit-step gate
    bool degenerate = false;  // long-window error energy at machine floor
};

/// beta_j from the last identification errors (oldest first, ending with e_j).
/// For j >= tau_d: g = F_hat / F_crit - 1 with F_hat the ratio of the mean
/// squared error over the last tau_n steps to that over the last tau_d steps and
/// F_crit the (1 - alpha) quantile of F(tau_n, tau_d); beta = 1 + eta max(g, 0).
ForgettingFactor vrf_beta(std::span<const Vector> errors, const RlsConfig& cfg, long j);

struct RlsStepInfo {
    ForgettingFactor forgetting;
    Vector error;  // e_k(theta_k)
};

/// One RLS step with measurement y_k and applied control u_k. theta_{k+1} and
/// Psi_{k+1} replace the state's estimates and the histories advance.
RlsStepInfo rls_update(RlsState& state, const RlsConfig& cfg, const Vector& y, const Vector& u);

/// Direct minimizer of the cumulative cost J_k using data y_0..y_k, u_0..u_{k-1}
/// and forgetting factors lambda_0..lambda_k. Solves the weighted regularized
/// least-squares problem in one shot; used to cross-check rls_update.
Vector batch_oracle(const RlsConfig& cfg, std::span<const Vector> ys, std::span<const Vector> us,
                    std::span<const double> lambdas);

}  // namespace pcac
