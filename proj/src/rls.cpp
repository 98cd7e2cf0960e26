#include "pcac/rls.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "pcac/error.hpp"

namespace pcac {

namespace {

void invalid(const std::string& field, const std::string& why) {
    throw Error(ErrorCode::InvalidArgument, "rls." + field + ": " + why);
}

// Mean squared error below this is treated as a degenerate variance estimate.
constexpr double kVarianceFloor = 1e-300;

}  // namespace

void RlsConfig::validate() const {
    if (order < 1) invalid("order", "must be at least 1");
    if (outputs < 1 || inputs < 1) invalid("outputs/inputs", "must be at least 1");
    const auto np = parameter_count();
    if (theta0.size() != np) invalid("theta0", "length must be order*p*(m+p) = " + std::to_string(np));
    if (psi0.rows() != np || psi0.cols() != np) invalid("psi0", "must be square of size " + std::to_string(np));
    if (!psi0.isApprox(psi0.transpose(), 1e-12)) invalid("psi0", "must be symmetric");
    Eigen::LLT<Matrix> llt(psi0);
    if (llt.info() != Eigen::Success) invalid("psi0", "must be positive definite");
    if (tau_n < outputs) invalid("tau_n", "must be at least p");
    if (tau_d <= tau_n) invalid("tau_d", "must exceed tau_n");
    if (tau_d <= outputs) invalid("tau_d", "must exceed p");
    if (!(eta > 0.0)) invalid("eta", "must be positive");
    if (!(alpha > 0.0 && alpha <= 1.0)) invalid("alpha", "must lie in (0, 1]");
}

RlsState::RlsState(const RlsConfig& cfg)
    : theta(cfg.theta0),
      psi(cfg.psi0),
      capacity(static_cast<std::size_t>(std::max(cfg.order, cfg.tau_d))) {}

Vector RlsState::y_lag(int i) const {
    const auto idx = static_cast<std::size_t>(i - 1);
    if (idx < past_y.size()) return past_y[idx];
    return Vector::Zero(past_y.empty() ? 0 : past_y.front().size());
}

Vector RlsState::u_lag(int i) const {
    const auto idx = static_cast<std::size_t>(i - 1);
    if (idx < past_u.size()) return past_u[idx];
    return Vector::Zero(past_u.empty() ? 0 : past_u.front().size());
}

Matrix regressor(const RlsState& state, const RlsConfig& cfg) {
    const int n = cfg.order, p = cfg.outputs, m = cfg.inputs;
    // Row vector r = [-y_{k-1}^T ... -y_{k-n}^T u_{k-1}^T ... u_{k-n}^T]; phi = r (x) I_p.
    Vector r = Vector::Zero(static_cast<Eigen::Index>(n) * (p + m));
    for (int i = 1; i <= n; ++i) {
        const auto idx = static_cast<std::size_t>(i - 1);
        if (idx < state.past_y.size()) r.segment((i - 1) * p, p) = -state.past_y[idx];
        if (idx < state.past_u.size()) r.segment(n * p + (i - 1) * m, m) = state.past_u[idx];
    }
    Matrix phi = Matrix::Zero(p, cfg.parameter_count());
    for (Eigen::Index c = 0; c < r.size(); ++c) {
        for (int row = 0; row < p; ++row) phi(row, c * p + row) = r(c);
    }
    return phi;
}

ForgettingFactor vrf_beta(std::span<const Vector> errors, const RlsConfig& cfg, long j) {
    ForgettingFactor out;
    if (j < cfg.tau_d) return out;
    if (cfg.outputs != 1) {
        throw Error(ErrorCode::UnsupportedDimension, "F-test forgetting is implemented for p = 1 only");
    }
    const auto tau_n = static_cast<std::size_t>(cfg.tau_n);
    const auto tau_d = static_cast<std::size_t>(cfg.tau_d);
    require_dims(errors.size() >= tau_d, "vrf_beta needs tau_d identification errors");

    auto mean_square = [&](std::size_t window) {
        double acc = 0.0;
        for (std::size_t i = errors.size() - window; i < errors.size(); ++i) acc += errors[i].squaredNorm();
        return acc / static_cast<double>(window);
    };
    const double long_var = mean_square(tau_d);
    if (!(long_var > kVarianceFloor)) {
        out.degenerate = true;
        return out;
    }
    const double ratio = mean_square(tau_n) / long_var;
    const double f_crit = f_inverse_cdf(1.0 - cfg.alpha, cfg.tau_n, cfg.tau_d);
    // alpha = 1 puts the critical value at zero; fall back to the raw ratio.
    out.g = f_crit > 0.0 ? ratio / f_crit - 1.0 : ratio;
    if (out.g > 0.0) out.beta = 1.0 + cfg.eta * out.g;
    return out;
}

RlsStepInfo rls_update(RlsState& state, const RlsConfig& cfg, const Vector& y, const Vector& u) {
    require_dims(y.size() == cfg.outputs, "rls_update: y has wrong dimension");
    require_dims(u.size() == cfg.inputs, "rls_update: u has wrong dimension");
    const Matrix phi = regressor(state, cfg);

    RlsStepInfo info;
    info.error = y - phi * state.theta;
    std::vector<Vector> window(state.errors.begin(), state.errors.end());
    window.push_back(info.error);
    if (window.size() > state.capacity) window.erase(window.begin());
    info.forgetting = vrf_beta(window, cfg, state.k);
    const double beta = info.forgetting.beta;

    const Matrix psi_phit = state.psi * phi.transpose();
    Matrix innovation = phi * psi_phit;
    innovation.diagonal().array() += 1.0 / beta;
    Eigen::LDLT<Matrix> ldlt(innovation);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || !innovation.allFinite() ||
        ldlt.rcond() < std::numeric_limits<double>::epsilon()) {
        throw Error(ErrorCode::InnovationSolveFailure, "1/beta I + phi Psi phi^T is singular");
    }
    Matrix psi_next = beta * (state.psi - psi_phit * ldlt.solve(psi_phit.transpose()));
    psi_next = 0.5 * (psi_next + psi_next.transpose()).eval();

    // Commit only after every fallible step succeeded.
    state.theta += psi_next * phi.transpose() * info.error;
    state.psi = std::move(psi_next);
    state.errors.push_back(info.error);
    while (state.errors.size() > state.capacity) state.errors.pop_front();
    state.past_y.push_front(y);
    state.past_u.push_front(u);
    while (state.past_y.size() > state.capacity) state.past_y.pop_back();
    while (state.past_u.size() > state.capacity) state.past_u.pop_back();
    ++state.k;
    return info;
}

Vector batch_oracle(const RlsConfig& cfg, std::span<const Vector> ys, std::span<const Vector> us,
                    std::span<const double> lambdas) {
    if (ys.empty()) return cfg.theta0;
    require_dims(lambdas.size() >= ys.size(), "batch_oracle needs one lambda per datum");
    const int n = cfg.order, p = cfg.outputs, m = cfg.inputs;
    const auto np = cfg.parameter_count();
    const auto count = static_cast<long>(ys.size());

    // rho_i = prod_{j<=i} 1/lambda_j, rescaled by rho_k so the newest datum has weight 1.
    std::vector<double> log_rho(ys.size());
    double acc = 0.0;
    for (long i = 0; i < count; ++i) {
        acc -= std::log(lambdas[static_cast<std::size_t>(i)]);
        log_rho[static_cast<std::size_t>(i)] = acc;
    }
    const double log_rho_k = log_rho.back();

    // Stacked least squares: rows sqrt(rho_i/rho_k) phi_i and the prior factor.
    const Eigen::LLT<Matrix> prior(cfg.psi0.inverse());
    if (prior.info() != Eigen::Success) {
        throw Error(ErrorCode::SingularNormalEquations, "Psi0 is not positive definite");
    }
    const Matrix prior_factor = prior.matrixU();  // Psi0^{-1} = U^T U
    const double prior_weight = std::exp(-0.5 * log_rho_k);

    Matrix lhs(count * p + np, np);
    Vector rhs(count * p + np);
    for (long i = 0; i < count; ++i) {
        Matrix phi = Matrix::Zero(p, np);
        for (int lag = 1; lag <= n; ++lag) {
            const long t = i - lag;
            if (t < 0) continue;
            const Vector& yl = ys[static_cast<std::size_t>(t)];
            const Vector& ul = us[static_cast<std::size_t>(t)];
            for (int a = 0; a < p; ++a) {
                for (int row = 0; row < p; ++row) phi(row, ((lag - 1) * p + a) * p + row) = -yl(a);
            }
            for (int b = 0; b < m; ++b) {
                for (int row = 0; row < p; ++row) phi(row, (n * p + (lag - 1) * m + b) * p + row) = ul(b);
            }
        }
        const double w = std::exp(0.5 * (log_rho[static_cast<std::size_t>(i)] - log_rho_k));
        lhs.middleRows(i * p, p) = w * phi;
        rhs.segment(i * p, p) = w * ys[static_cast<std::size_t>(i)];
    }
    lhs.bottomRows(np) = prior_weight * prior_factor;
    rhs.tail(np) = prior_weight * prior_factor * cfg.theta0;

    Eigen::ColPivHouseholderQR<Matrix> qr(lhs);
    if (qr.rank() < np) {
        throw Error(ErrorCode::SingularNormalEquations, "weighted normal equations are rank deficient");
    }
    return qr.solve(rhs);
}

}  // namespace pcac
