#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace pcac {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using Complex = std::complex<double>;

/// Discrete-time realization x+ = A x + B u, y = C x + D u.
class StateSpace {
   public:
    StateSpace() = default;
    StateSpace(Matrix A, Matrix B, Matrix C, Matrix D);

    /// Strictly proper realization (D = 0).
    static StateSpace strictly_proper(Matrix A, Matrix B, Matrix C);

    const Matrix& A() const { return A_; }
    const Matrix& B() const { return B_; }
    const Matrix& C() const { return C_; }
    const Matrix& D() const { return D_; }

    Eigen::Index states() const { return A_.rows(); }
    Eigen::Index inputs() const { return B_.cols(); }
    Eigen::Index outputs() const { return C_.rows(); }

    bool is_strictly_proper() const { return D_.isZero(0.0); }

   private:
    Matrix A_, B_, C_, D_;
};

/// Uniform sweep of psi over [0, pi], both ends included.
struct FrequencyGrid {
    std::vector<double> points;

    static constexpr int kDefaultCount = 4096;

    explicit FrequencyGrid(int count = kDefaultCount);
    int count() const { return static_cast<int>(points.size()); }
};

/// Evaluates C (zI - A)^{-1} B + D on the unit circle. The Hessenberg
/// reduction of A is computed once so each frequency costs O(n^2).
class FrequencyEvaluator {
   public:
    explicit FrequencyEvaluator(const StateSpace& sys);

    /// Throws Error(NearSingularResolvent) when e^{j psi} is (numerically) a pole.
    CMatrix at(double psi) const;
    CMatrix at_z(Complex z) const;

    Eigen::Index outputs() const { return CQ_.rows(); }
    Eigen::Index inputs() const { return QtB_.cols(); }

   private:
    Matrix H_;     // upper Hessenberg, A = Q H Q^T
    Matrix CQ_;    // C Q
    Matrix QtB_;   // Q^T B
    CMatrix Dc_;
    double scale_ = 0.0;
};

CMatrix freq_response(const StateSpace& sys, double psi);

/// max |lambda_i(M)|.
double spectral_radius(const Matrix& M);

/// Smallest eigenvalue of the Hermitian part of X. X must be Hermitian up to
/// `rel_tol * ||X||`; anything worse is reported as NotHermitian.
double hermitian_min_eig(const CMatrix& X, double rel_tol = 1e-8);

/// Default numerical-rank tolerance for a matrix with the given shape.
double default_rank_tol(Eigen::Index rows, Eigen::Index cols);

/// Rank of [C; CA; ...; CA^{n-1}], counting singular values above tol * sigma_max.
/// A negative tol selects default_rank_tol for the stacked matrix.
int observability_rank(const Matrix& A, const Matrix& Cobs, double tol = -1.0);

}  // namespace pcac
