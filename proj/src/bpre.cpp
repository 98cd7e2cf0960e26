#include "pcac/bpre.hpp"

#include <limits>
#include <string>

#include "pcac/error.hpp"

namespace pcac {

namespace {

void invalid(const std::string& field, const std::string& why) {
    throw Error(ErrorCode::InvalidArgument, "bpre." + field + ": " + why);
}

double min_sym_eig(const Matrix& M) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (M + M.transpose()), Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

bool symmetric(const Matrix& M) { return (M - M.transpose()).norm() <= 1e-12 * (1.0 + M.norm()); }

// Symmetric square root of a PSD matrix (negative roundoff eigenvalues clipped).
Matrix psd_sqrt(const Matrix& M) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (M + M.transpose()));
    const Vector root = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return solver.eigenvectors() * root.asDiagonal() * solver.eigenvectors().transpose();
}

Eigen::LDLT<Matrix> inner_factor(const Matrix& B, const Matrix& P, const Matrix& R2) {
    const Matrix S = R2 + B.transpose() * P * B;
    Eigen::LDLT<Matrix> ldlt(S);
    if (ldlt.info() != Eigen::Success || !S.allFinite() || !ldlt.isPositive() ||
        ldlt.rcond() < std::numeric_limits<double>::epsilon()) {
        throw Error(ErrorCode::InnerSolveSingular, "R2 + B^T P B is numerically singular");
    }
    return ldlt;
}

}  // namespace

void BpreConfig::validate() const {
    if (horizon < 1) invalid("horizon", "must be at least 1");
    const auto n = R1.rows();
    if (R1.cols() != n) invalid("R1", "must be square");
    if (P_term.rows() != n || P_term.cols() != n) invalid("P_term", "must match R1");
    if (R2.rows() != R2.cols() || R2.rows() == 0) invalid("R2", "must be square");
    if (!symmetric(R1) || min_sym_eig(R1) < -1e-12) invalid("R1", "must be symmetric PSD");
    if (!symmetric(P_term) || min_sym_eig(P_term) < -1e-12) invalid("P_term", "must be symmetric PSD");
    if (!symmetric(R2) || !(min_sym_eig(R2) > 0.0)) invalid("R2", "must be symmetric PD");
    if (E1) {
        if (E1->cols() != n) invalid("E1", "must have as many columns as R1");
        if ((E1->transpose() * *E1 - R1).norm() > 1e-10) invalid("E1", "E1^T E1 must equal R1");
    }
}

BpreResult bpre_gain(const Matrix& A, const Matrix& B, const BpreConfig& cfg) {
    const auto n = A.rows();
    require_dims(A.cols() == n && B.rows() == n, "bpre_gain: A/B shapes");
    require_dims(cfg.R1.rows() == n && cfg.P_term.rows() == n, "bpre_gain: weights do not match A");
    require_dims(cfg.R2.rows() == B.cols(), "bpre_gain: R2 does not match B");

    Matrix P = cfg.P_term;  // P_{k|l+1}
    for (int j = cfg.horizon; j >= 2; --j) {
        const auto ldlt = inner_factor(B, P, cfg.R2);
        const Matrix gamma = ldlt.solve(B.transpose() * P * A);
        Matrix next = A.transpose() * P * (A - B * gamma) + cfg.R1;
        P = 0.5 * (next + next.transpose());
    }
    BpreResult out;
    const auto ldlt = inner_factor(B, P, cfg.R2);
    out.K = -ldlt.solve(B.transpose() * P * A);
    out.P2 = std::move(P);
    return out;
}

Vector oracle_lqr_control(const Matrix& A, const Matrix& B, const BpreConfig& cfg, const Vector& x0) {
    const auto n = A.rows();
    const auto m = B.cols();
    const int l = cfg.horizon;
    require_dims(x0.size() == n, "oracle_lqr_control: x0 dimension");

    // x_{j} = A^{j-1} x0 + sum_{i<j} A^{j-1-i} B u_i (1-based j), for j = 1..l+1.
    std::vector<Matrix> powers(static_cast<std::size_t>(l) + 1);
    powers[0] = Matrix::Identity(n, n);
    for (int j = 1; j <= l; ++j) powers[static_cast<std::size_t>(j)] = A * powers[static_cast<std::size_t>(j - 1)];

    const Matrix W1 = psd_sqrt(cfg.R1);
    const Matrix W2 = psd_sqrt(cfg.R2);
    const Matrix WP = psd_sqrt(cfg.P_term);

    // Residual rows: W1 x_j (j = 1..l), W2 u_j (j = 1..l), WP x_{l+1}.
    const Eigen::Index rows = (l + 1) * n + l * m;
    Matrix lhs = Matrix::Zero(rows, l * m);
    Vector rhs = Vector::Zero(rows);
    for (int j = 1; j <= l + 1; ++j) {
        const Matrix& W = j <= l ? W1 : WP;
        const Eigen::Index r0 = (j - 1) * n;
        rhs.segment(r0, n) = -W * powers[static_cast<std::size_t>(j - 1)] * x0;
        for (int i = 1; i < j; ++i) {
            lhs.block(r0, (i - 1) * m, n, m) = W * powers[static_cast<std::size_t>(j - 1 - i)] * B;
        }
    }
    for (int j = 1; j <= l; ++j) lhs.block((l + 1) * n + (j - 1) * m, (j - 1) * m, m, m) = W2;

    const Vector u = lhs.colPivHouseholderQr().solve(rhs);
    return u.head(m);
}

}  // namespace pcac
