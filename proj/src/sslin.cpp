#include "pcac/sslin.hpp"

#include <vector>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pcac/error.hpp"

namespace pcac {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::NearSingularResolvent: return "NearSingularResolvent";
        case ErrorCode::EigenFailure: return "EigenFailure";
        case ErrorCode::NotHermitian: return "NotHermitian";
        case ErrorCode::InnovationSolveFailure: return "InnovationSolveFailure";
        case ErrorCode::SingularNormalEquations: return "SingularNormalEquations";
        case ErrorCode::InnerSolveSingular: return "InnerSolveSingular";
        case ErrorCode::UnsupportedDimension: return "UnsupportedDimension";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

StateSpace::StateSpace(Matrix A, Matrix B, Matrix C, Matrix D)
    : A_(std::move(A)), B_(std::move(B)), C_(std::move(C)), D_(std::move(D)) {
    require_dims(A_.rows() == A_.cols(), "A must be square");
    require_dims(B_.rows() == A_.rows(), "rows(B) must equal rows(A)");
    require_dims(C_.cols() == A_.cols(), "cols(C) must equal cols(A)");
    require_dims(D_.rows() == C_.rows() && D_.cols() == B_.cols(), "D must be p x m");
}

StateSpace StateSpace::strictly_proper(Matrix A, Matrix B, Matrix C) {
    Matrix D = Matrix::Zero(C.rows(), B.cols());
    return StateSpace(std::move(A), std::move(B), std::move(C), std::move(D));
}

FrequencyGrid::FrequencyGrid(int count) {
    if (count < 2) throw Error(ErrorCode::InvalidArgument, "frequency grid needs at least 2 points");
    points.resize(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) points[i] = std::numbers::pi * i / (count - 1);
    points.back() = std::numbers::pi;
}

namespace {

// Relative pivot size below which zI - H is treated as singular.
constexpr double kResolventTol = 1e-12;

}  // namespace

FrequencyEvaluator::FrequencyEvaluator(const StateSpace& sys) : Dc_(sys.D().cast<Complex>()) {
    const auto n = sys.states();
    if (n == 0) {
        CQ_ = Matrix::Zero(sys.outputs(), 0);
        QtB_ = Matrix::Zero(0, sys.inputs());
        return;
    }
    Eigen::HessenbergDecomposition<Matrix> hess(sys.A());
    H_ = hess.matrixH();
    const Matrix Q = hess.matrixQ();
    CQ_ = sys.C() * Q;
    QtB_ = Q.transpose() * sys.B();
    scale_ = 1.0 + H_.cwiseAbs().maxCoeff();
}

CMatrix FrequencyEvaluator::at(double psi) const { return at_z(std::polar(1.0, psi)); }

CMatrix FrequencyEvaluator::at_z(Complex z) const {
    const Eigen::Index n = H_.rows();
    const Eigen::Index m = QtB_.cols();
    CMatrix result = Dc_;
    if (n == 0) return result;

    // Row-major work arrays reused across calls on the same thread.
    thread_local std::vector<Complex> Mw, Ww;
    Mw.resize(static_cast<std::size_t>(n * n));
    Ww.resize(static_cast<std::size_t>(n * m));
    auto Mat = [&](Eigen::Index r, Eigen::Index c) -> Complex& { return Mw[static_cast<std::size_t>(r * n + c)]; };
    auto Wat = [&](Eigen::Index r, Eigen::Index c) -> Complex& { return Ww[static_cast<std::size_t>(r * m + c)]; };
    for (Eigen::Index r = 0; r < n; ++r) {
        for (Eigen::Index c = 0; c < n; ++c) Mat(r, c) = c + 1 < r ? Complex(0.0) : Complex(-H_(r, c));
        Mat(r, r) += z;
        for (Eigen::Index c = 0; c < m; ++c) Wat(r, c) = QtB_(r, c);
    }

    // Gaussian elimination on the Hessenberg matrix zI - H with adjacent-row pivoting.
    const double tol = kResolventTol * (std::abs(z) + scale_);
    const double tol2 = tol * tol;
    for (Eigen::Index k = 0; k + 1 < n; ++k) {
        if (std::norm(Mat(k + 1, k)) > std::norm(Mat(k, k))) {
            for (Eigen::Index c = k; c < n; ++c) std::swap(Mat(k, c), Mat(k + 1, c));
            for (Eigen::Index c = 0; c < m; ++c) std::swap(Wat(k, c), Wat(k + 1, c));
        }
        if (std::norm(Mat(k, k)) <= tol2) {
            throw Error(ErrorCode::NearSingularResolvent, "zI - A is numerically singular");
        }
        const Complex factor = Mat(k + 1, k) / Mat(k, k);
        if (factor != Complex(0.0)) {
            for (Eigen::Index c = k; c < n; ++c) Mat(k + 1, c) -= factor * Mat(k, c);
            for (Eigen::Index c = 0; c < m; ++c) Wat(k + 1, c) -= factor * Wat(k, c);
        }
    }
    if (std::norm(Mat(n - 1, n - 1)) <= tol2) {
        throw Error(ErrorCode::NearSingularResolvent, "zI - A is numerically singular");
    }
    for (Eigen::Index k = n - 1; k >= 0; --k) {
        for (Eigen::Index c = 0; c < m; ++c) {
            Complex acc = Wat(k, c);
            for (Eigen::Index j = k + 1; j < n; ++j) acc -= Mat(k, j) * Wat(j, c);
            Wat(k, c) = acc / Mat(k, k);
        }
    }
    for (Eigen::Index r = 0; r < result.rows(); ++r) {
        for (Eigen::Index c = 0; c < m; ++c) {
            Complex acc = 0.0;
            for (Eigen::Index j = 0; j < n; ++j) acc += CQ_(r, j) * Wat(j, c);
            result(r, c) += acc;
        }
    }
    if (!result.allFinite()) {
        throw Error(ErrorCode::NearSingularResolvent, "non-finite frequency response");
    }
    return result;
}

CMatrix freq_response(const StateSpace& sys, double psi) { return FrequencyEvaluator(sys).at(psi); }

double spectral_radius(const Matrix& M) {
    require_dims(M.rows() == M.cols(), "spectral_radius needs a square matrix");
    if (M.size() == 0) return 0.0;
    if (!M.allFinite()) throw Error(ErrorCode::EigenFailure, "matrix has non-finite entries");
    Eigen::EigenSolver<Matrix> solver(M, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) {
        throw Error(ErrorCode::EigenFailure, "eigenvalue iteration did not converge");
    }
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

double hermitian_min_eig(const CMatrix& X, double rel_tol) {
    require_dims(X.rows() == X.cols() && X.rows() > 0, "hermitian_min_eig needs a square matrix");
    const double norm = X.norm();
    const CMatrix Xh = X.adjoint();
    if ((X - Xh).norm() > rel_tol * norm) {
        throw Error(ErrorCode::NotHermitian, "input is not Hermitian within tolerance");
    }
    if (X.rows() == 1) return X(0, 0).real();
    const CMatrix sym = 0.5 * (X + Xh);
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(sym, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw Error(ErrorCode::EigenFailure, "Hermitian eigensolver did not converge");
    }
    return solver.eigenvalues().minCoeff();
}

double default_rank_tol(Eigen::Index rows, Eigen::Index cols) {
    return 1e-9 * static_cast<double>(std::max(rows, cols));
}

int observability_rank(const Matrix& A, const Matrix& Cobs, double tol) {
    require_dims(A.rows() == A.cols(), "A must be square");
    require_dims(Cobs.cols() == A.rows(), "cols(Cobs) must equal rows(A)");
    const auto n = A.rows();
    const auto p = Cobs.rows();
    if (n == 0 || p == 0) return 0;
    Matrix obs(p * n, n);
    Matrix block = Cobs;
    for (Eigen::Index i = 0; i < n; ++i) {
        obs.middleRows(i * p, p) = block;
        block = block * A;
    }
    if (tol < 0.0) tol = default_rank_tol(obs.rows(), obs.cols());
    Eigen::JacobiSVD<Matrix> svd(obs);
    const Vector& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) == 0.0) return 0;
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > tol * sv(0)) ++rank;
    }
    return rank;
}

}  // namespace pcac
