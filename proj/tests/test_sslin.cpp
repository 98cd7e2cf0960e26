#include <gtest/gtest.h>

#include <numbers>

#include "pcac/error.hpp"
#include "pcac/sslin.hpp"
#include "test_support.hpp"

namespace pcac {
namespace {

using testing::example1_plant;
using testing::random_matrix;

constexpr double kPi = std::numbers::pi;

TEST(StateSpace, RejectsInconsistentShapes) {
    EXPECT_THROW(StateSpace(Matrix::Zero(2, 3), Matrix::Zero(2, 1), Matrix::Zero(1, 2), Matrix::Zero(1, 1)), Error);
    EXPECT_THROW(StateSpace(Matrix::Zero(2, 2), Matrix::Zero(3, 1), Matrix::Zero(1, 2), Matrix::Zero(1, 1)), Error);
    EXPECT_THROW(StateSpace(Matrix::Zero(2, 2), Matrix::Zero(2, 1), Matrix::Zero(1, 3), Matrix::Zero(1, 1)), Error);
    EXPECT_THROW(StateSpace(Matrix::Zero(2, 2), Matrix::Zero(2, 1), Matrix::Zero(1, 2), Matrix::Zero(2, 1)), Error);
    try {
        StateSpace(Matrix::Zero(2, 2), Matrix::Zero(2, 1), Matrix::Zero(1, 2), Matrix::Zero(2, 2));
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
    }
}

TEST(StateSpace, StrictlyProperFlag) {
    EXPECT_TRUE(example1_plant().is_strictly_proper());
    const StateSpace d(Matrix::Zero(1, 1), Matrix::Zero(1, 1), Matrix::Zero(1, 1), Matrix::Constant(1, 1, 2.0));
    EXPECT_FALSE(d.is_strictly_proper());
}

TEST(FrequencyGrid, UniformOverZeroToPi) {
    const FrequencyGrid g(5);
    ASSERT_EQ(g.count(), 5);
    EXPECT_EQ(g.points.front(), 0.0);
    EXPECT_EQ(g.points.back(), kPi);
    EXPECT_NEAR(g.points[2], kPi / 2, 1e-15);
    EXPECT_EQ(FrequencyGrid().count(), 4096);
}

TEST(FreqResponse, Example1AtNyquistAndDc) {
    const StateSpace G = example1_plant();
    const CMatrix at_pi = freq_response(G, kPi);
    EXPECT_NEAR(at_pi(0, 0).real(), -0.8, 1e-14);
    EXPECT_NEAR(at_pi(0, 0).imag(), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(freq_response(G, 0.0)(0, 0)), 0.0, 1e-15);
}

TEST(FreqResponse, FeedthroughOnly) {
    const StateSpace d(Matrix::Zero(1, 1), Matrix::Zero(1, 1), Matrix::Zero(1, 1), Matrix::Constant(1, 1, 3.5));
    for (double psi : {0.0, 1.0, kPi}) EXPECT_EQ(freq_response(d, psi)(0, 0), Complex(3.5, 0.0));
}

TEST(FreqResponse, PoleOnUnitCircleIsReported) {
    const StateSpace integrator = StateSpace::strictly_proper(Matrix::Identity(1, 1), Matrix::Ones(1, 1), Matrix::Ones(1, 1));
    try {
        freq_response(integrator, 0.0);
        FAIL() << "expected NearSingularResolvent";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NearSingularResolvent);
    }
    EXPECT_NO_THROW(freq_response(integrator, 0.5));
}

TEST(FreqResponse, ConjugateSymmetry) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const StateSpace sys(testing::random_stable(rng, 6, 0.9), random_matrix(rng, 6, 2), random_matrix(rng, 3, 6),
                             random_matrix(rng, 3, 2));
        const FrequencyEvaluator ev(sys);
        for (double psi : {0.1, 0.7, 2.0, 3.0}) {
            const CMatrix plus = ev.at(psi);
            const CMatrix minus = ev.at_z(std::polar(1.0, -psi));
            EXPECT_LT((plus - minus.conjugate()).norm(), 1e-12 * (1.0 + plus.norm()));
        }
    }
}

// Controllable canonical form of b(z)/a(z), hidden behind a random similarity.
TEST(FreqResponse, MatchesPolynomialEvaluation) {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 2 + trial % 6;
        const Vector a = testing::random_vector(rng, n, 0.4);  // z^n + a_1 z^{n-1} + ... + a_n
        const Vector b = testing::random_vector(rng, n);       // b_1 z^{n-1} + ... + b_n
        Matrix A = Matrix::Zero(n, n);
        A.row(0) = -a.transpose();
        A.block(1, 0, n - 1, n - 1).setIdentity();
        Matrix B = Matrix::Zero(n, 1);
        B(0, 0) = 1.0;
        const Matrix C = b.transpose();
        const Matrix T = random_matrix(rng, n, n) + 3.0 * Matrix::Identity(n, n);
        const Matrix Ti = T.inverse();
        const StateSpace sys = StateSpace::strictly_proper(Ti * A * T, Ti * B, C * T);

        for (double psi : {0.05, 0.4, 1.3, 2.2, 3.1}) {
            const Complex z = std::polar(1.0, psi);
            Complex num = 0.0, den = 1.0;
            for (int i = 0; i < n; ++i) {
                num = num * z + b(i);
                den = den * z + a(i);
            }
            const Complex want = num / den;
            const Complex got = freq_response(sys, psi)(0, 0);
            EXPECT_LT(std::abs(got - want), 1e-8 * std::max(1.0, std::abs(want))) << "n=" << n << " psi=" << psi;
        }
    }
}

TEST(SpectralRadius, Examples) {
    EXPECT_NEAR(spectral_radius(example1_plant().A()), std::sqrt(0.5), 1e-14);
    EXPECT_NEAR(spectral_radius(0.5 * Matrix::Identity(3, 3)), 0.5, 1e-15);
    EXPECT_EQ(spectral_radius(Matrix::Zero(4, 4)), 0.0);
}

TEST(SpectralRadius, TransposeInvariant) {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix M = random_matrix(rng, 20, 20);
        EXPECT_NEAR(spectral_radius(M), spectral_radius(M.transpose()), 1e-10);
    }
}

TEST(SpectralRadius, NonFiniteInputFails) {
    Matrix M = Matrix::Identity(2, 2);
    M(0, 1) = std::numeric_limits<double>::quiet_NaN();
    try {
        spectral_radius(M);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::EigenFailure);
    }
}

TEST(HermitianMinEig, Examples) {
    EXPECT_DOUBLE_EQ(hermitian_min_eig(CMatrix::Identity(2, 2)), 1.0);
    CMatrix d = CMatrix::Zero(2, 2);
    d(0, 0) = 3.0;
    d(1, 1) = -2.0;
    EXPECT_DOUBLE_EQ(hermitian_min_eig(d), -2.0);

    const CMatrix h = freq_response(example1_plant(), 0.9);
    const CMatrix x = h + h.adjoint();
    EXPECT_NEAR(hermitian_min_eig(x), 2.0 * h(0, 0).real(), 1e-15);
}

TEST(HermitianMinEig, RejectsNonHermitian) {
    CMatrix x = CMatrix::Identity(2, 2);
    x(0, 1) = Complex(0.5, 0.0);
    try {
        hermitian_min_eig(x);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NotHermitian);
    }
    // Roundoff-level asymmetry is absorbed by symmetrization.
    x(0, 1) = Complex(0.0, 1e-14);
    EXPECT_NEAR(hermitian_min_eig(x), 1.0, 1e-12);
}

TEST(ObservabilityRank, Examples) {
    Matrix e1(1, 2);
    e1 << 1.0, 0.0;
    EXPECT_EQ(observability_rank(Matrix::Identity(2, 2), e1), 1);
    const StateSpace G = example1_plant();
    EXPECT_EQ(observability_rank(G.A(), G.C()), 2);
    EXPECT_EQ(observability_rank(G.A(), Matrix::Zero(1, 2)), 0);
}

TEST(ObservabilityRank, MonotoneInTolerance) {
    std::mt19937_64 rng(14);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix A = testing::random_stable(rng, 6, 0.99);
        const Matrix C = random_matrix(rng, 1, 6);
        int previous = 7;
        for (double tol : {1e-16, 1e-12, 1e-9, 1e-6, 1e-3, 1e-1, 0.5, 1.0}) {
            const int r = observability_rank(A, C, tol);
            EXPECT_LE(r, previous);
            previous = r;
        }
    }
}

}  // namespace
}  // namespace pcac
