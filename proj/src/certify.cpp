#include "pcac/certify.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "pcac/error.hpp"
#include "pcac/parallel.hpp"

namespace pcac {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Ratio sigma_min / sigma_max below which A~ is treated as singular.
constexpr double kSingularRatio = 1e-14;

double sweep_value(const FrequencyEvaluator& ev, double psi, bool& hit_pole) {
    try {
        const CMatrix X = ev.at(psi);
        return hermitian_min_eig(X + X.adjoint());
    } catch (const Error& e) {
        if (e.code() != ErrorCode::NearSingularResolvent) throw;
        hit_pole = true;
        return -kInf;
    }
}

}  // namespace

StateSpace circle_multiplier_realization(const StateSpace& sys, const SectorBound& bound) {
    require_dims(sys.is_strictly_proper(), "circle criterion needs a strictly proper system");
    require_dims(bound.M1().rows() == sys.inputs() && bound.M1().cols() == sys.outputs(),
                 "sector bound must be m x p");
    const Eigen::Index m = sys.inputs();
    Matrix A = sys.A() + sys.B() * bound.M1() * sys.C();
    Matrix C = (bound.M1() - bound.M2()) * sys.C();
    return StateSpace(std::move(A), sys.B(), std::move(C), Matrix::Identity(m, m));
}

StateSpace tsypkin_multiplier_realization(const StateSpace& sys, const Matrix& M, const Matrix& N) {
    require_dims(sys.is_strictly_proper(), "Tsypkin criterion needs a strictly proper system");
    const auto n = sys.states();
    const auto m = sys.inputs();
    const auto p = sys.outputs();
    require_dims(m == p, "Tsypkin criterion needs m = p");
    require_dims(M.rows() == m && M.cols() == m && N.rows() == m && N.cols() == m, "M and N must be m x m");

    Matrix A = Matrix::Zero(n + p, n + p);
    A.topLeftCorner(n, n) = sys.A();
    A.bottomLeftCorner(p, n) = sys.C();
    Matrix B = Matrix::Zero(n + p, m);
    B.topRows(n) = sys.B();
    Matrix C(p, n + p);
    C << -(Matrix::Identity(p, p) + N) * sys.C(), N;
    return StateSpace(std::move(A), std::move(B), std::move(C), M.inverse());
}

HermitianSweep hermitian_sweep(const StateSpace& sys, const CertifyOptions& opts) {
    const FrequencyEvaluator ev(sys);
    const auto& pts = opts.grid.points;
    HermitianSweep out;
    out.minimum = kInf;
    std::size_t best = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double v = sweep_value(ev, pts[i], out.hit_pole);
        if (v < out.minimum) {
            out.minimum = v;
            best = i;
        }
    }
    out.argmin_psi = pts[best];
    if (opts.refine_iterations <= 0 || !std::isfinite(out.minimum)) return out;

    // Golden-section search on the bracket around the grid argmin.
    double a = pts[best == 0 ? 0 : best - 1];
    double b = pts[std::min(best + 1, pts.size() - 1)];
    constexpr double inv_phi = 0.6180339887498949;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = sweep_value(ev, c, out.hit_pole);
    double fd = sweep_value(ev, d, out.hit_pole);
    for (int it = 0; it < opts.refine_iterations; ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = sweep_value(ev, c, out.hit_pole);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = sweep_value(ev, d, out.hit_pole);
        }
        if (fc < out.minimum) {
            out.minimum = fc;
            out.argmin_psi = c;
        }
        if (fd < out.minimum) {
            out.minimum = fd;
            out.argmin_psi = d;
        }
    }
    return out;
}

CircleReport circle_certificate(const StateSpace& sys, const SectorBound& bound, const CertifyOptions& opts) {
    CircleReport r;
    const StateSpace H = circle_multiplier_realization(sys, bound);
    try {
        r.alpha_cc = spectral_radius(H.A());
    } catch (const Error& e) {
        r.alpha_cc = kInf;
        r.flagged = true;
        r.reason = std::string(to_string(e.code()));
    }
    const HermitianSweep sweep = hermitian_sweep(H, opts);
    r.beta_cc = sweep.minimum;
    r.argmin_psi = sweep.argmin_psi;
    if (sweep.hit_pole) {
        r.flagged = true;
        r.reason = "NearSingularResolvent";
    }
    r.cc1_pass = r.alpha_cc < 1.0 - opts.margin;
    r.cc2_pass = r.beta_cc > opts.margin;
    return r;
}

TsypkinReport tsypkin_certificate(const StateSpace& sys, const Matrix& M, const Matrix& N,
                                  const CertifyOptions& opts) {
    require_dims(N.isDiagonal(0.0) && N.diagonal().minCoeff() > 0.0, "N must be diagonal positive definite");
    TsypkinReport r;
    r.N = N;
    const auto dim = sys.states();
    r.full_dimension = static_cast<int>(dim);

    const Matrix Minv = M.inverse();
    Eigen::SelfAdjointEigenSolver<Matrix> lim(Minv + Minv.transpose(), Eigen::EigenvaluesOnly);
    r.zeta3_min_eig = lim.eigenvalues().minCoeff();

    bool tc1_structural = false;
    Eigen::JacobiSVD<Matrix> svd(sys.A());
    const Vector& sv = svd.singularValues();
    const double sigma_min = dim > 0 ? sv(sv.size() - 1) : 0.0;
    if (dim == 0 || !(sigma_min > kSingularRatio * sv(0))) {
        r.flagged = true;
        r.reason = "SingularAtilde";
    } else {
        const Eigen::PartialPivLU<Matrix> lu(sys.A());
        const Matrix Ainv_B = lu.solve(sys.B());
        const Matrix CAinv = Eigen::PartialPivLU<Matrix>(sys.A().transpose()).solve(sys.C().transpose()).transpose();
        r.zeta1 = (sys.C() * Ainv_B).determinant();
        const Matrix Cobs = sys.C() + N * sys.C() - N * CAinv;
        r.zeta2 = observability_rank(sys.A(), Cobs);
        const double zeta1_tol = 1e-12 * sys.C().norm() * sys.B().norm() / sigma_min;
        tc1_structural = std::abs(r.zeta1) > zeta1_tol && r.zeta2 == r.full_dimension;
    }
    r.tc1_pass = tc1_structural && r.zeta3_min_eig > 0.0;

    const StateSpace L = tsypkin_multiplier_realization(sys, M, N);
    try {
        r.alpha_tc = spectral_radius(L.A());
    } catch (const Error& e) {
        r.alpha_tc = kInf;
        r.flagged = true;
        r.reason = std::string(to_string(e.code()));
    }
    const HermitianSweep sweep = hermitian_sweep(L, opts);
    r.beta_tc = sweep.minimum;
    r.argmin_psi = sweep.argmin_psi;
    if (sweep.hit_pole) {
        r.flagged = true;
        r.reason = "NearSingularResolvent";
    }
    r.tc2_pass = r.alpha_tc < 1.0 - opts.margin;
    r.tc3_pass = r.beta_tc > opts.margin;
    return r;
}

std::vector<CertificatePair> certificate_trace(std::span<const StateSpace> systems, const SectorBound& bound,
                                               const Matrix& M, const Matrix& N, const CertifyOptions& opts,
                                               unsigned threads) {
    std::vector<CertificatePair> out(systems.size());
    parallel_for(systems.size(), threads, [&](std::size_t i) {
        try {
            out[i].circle = circle_certificate(systems[i], bound, opts);
        } catch (const std::exception& e) {
            out[i].circle.flagged = true;
            out[i].circle.reason = e.what();
            out[i].circle.alpha_cc = kInf;
            out[i].circle.beta_cc = -kInf;
        }
        try {
            out[i].tsypkin = tsypkin_certificate(systems[i], M, N, opts);
        } catch (const std::exception& e) {
            out[i].tsypkin.flagged = true;
            out[i].tsypkin.reason = e.what();
            out[i].tsypkin.alpha_tc = kInf;
            out[i].tsypkin.beta_tc = -kInf;
        }
    });
    return out;
}

TsypkinReport scan_tsypkin_n(const StateSpace& sys, const Matrix& M, std::span<const double> candidates,
                             const CertifyOptions& opts) {
    require_dims(!candidates.empty(), "scan_tsypkin_n needs at least one candidate");
    TsypkinReport best;
    bool have = false;
    for (double n : candidates) {
        const Matrix N = n * Matrix::Identity(M.rows(), M.rows());
        TsypkinReport r = tsypkin_certificate(sys, M, N, opts);
        if (!have || r.beta_tc > best.beta_tc) {
            best = std::move(r);
            have = true;
        }
    }
    return best;
}

std::vector<double> log_space(double lo, double hi, int count) {
    require_dims(lo > 0.0 && hi >= lo && count >= 1, "log_space needs 0 < lo <= hi and count >= 1");
    std::vector<double> out(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        const double t = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
        out[static_cast<std::size_t>(i)] = lo * std::pow(hi / lo, t);
    }
    return out;
}

}  // namespace pcac
