#include <gtest/gtest.h>

#include "pcac/controller.hpp"
#include "pcac/error.hpp"
#include "pcac/scenario.hpp"
#include "test_support.hpp"

namespace pcac {
namespace {

// Smallest singular value of (A - lambda I); zero iff lambda is an eigenvalue.
double eig_residual(const Matrix& A, Complex lambda) {
    CMatrix S = A.cast<Complex>();
    S.diagonal().array() -= lambda;
    return Eigen::JacobiSVD<CMatrix>(S).singularValues().tail(1)(0);
}

TEST(ControllerRealization, ZeroGainIsNilpotent) {
    std::mt19937_64 rng(61);
    const BocfModel model = assemble_model(testing::random_vector(rng, 20), 10, 1, 1);
    const ControllerRealization c = controller_realization(model, Matrix::Zero(1, 10));
    Matrix P = Matrix::Identity(10, 10);
    for (int i = 0; i < 10; ++i) P = P * c.Ac;
    EXPECT_TRUE(P.isZero(0.0));
    EXPECT_EQ(c.Bc, output_injection(model));
}

TEST(ClosedLoopRealization, Dimensions) {
    std::mt19937_64 rng(62);
    const BocfModel model = assemble_model(testing::random_vector(rng, 20), 10, 1, 1);
    const ControllerRealization c = controller_realization(model, testing::random_matrix(rng, 1, 10));
    EXPECT_EQ(c.Ac.rows(), 10);
    EXPECT_EQ(c.Ac.cols(), 10);
    const StateSpace cl = closed_loop_realization(testing::example1_plant(), c);
    EXPECT_EQ(cl.states(), 12);
    EXPECT_EQ(cl.inputs(), 1);
    EXPECT_EQ(cl.outputs(), 1);
    EXPECT_TRUE(cl.is_strictly_proper());
}

TEST(ClosedLoopRealization, OpenControllerKeepsBothSpectra) {
    std::mt19937_64 rng(63);
    const StateSpace plant = testing::example1_plant();
    ControllerRealization c;
    c.Ac = testing::random_matrix(rng, 4, 4);
    c.Bc = testing::random_matrix(rng, 4, 1);
    c.Cc = Matrix::Zero(1, 4);
    const StateSpace cl = closed_loop_realization(plant, c);
    Eigen::EigenSolver<Matrix> ea(plant.A()), ec(c.Ac);
    for (Eigen::Index i = 0; i < 2; ++i) EXPECT_LT(eig_residual(cl.A(), ea.eigenvalues()(i)), 1e-10);
    for (Eigen::Index i = 0; i < 4; ++i) EXPECT_LT(eig_residual(cl.A(), ec.eigenvalues()(i)), 1e-10);
}

TEST(ClosedLoopRealization, NoControllerGivesPlant) {
    const StateSpace plant = testing::example1_plant();
    ControllerRealization c;
    c.Ac = Matrix::Identity(3, 3) * 0.3;
    c.Bc = Matrix::Zero(3, 1);
    c.Cc = Matrix::Zero(1, 3);
    const StateSpace cl = closed_loop_realization(plant, c);
    for (double psi : {0.1, 0.7, 2.0, 3.0}) {
        EXPECT_LT(std::abs(freq_response(cl, psi)(0, 0) - freq_response(plant, psi)(0, 0)), 1e-14);
    }
}

TEST(ClosedLoopRealization, PositiveFeedbackTransferFunction) {
    std::mt19937_64 rng(64);
    const StateSpace plant = testing::example1_plant();
    const BocfModel model = assemble_model(testing::random_vector(rng, 8, 0.3), 4, 1, 1);
    const ControllerRealization c = controller_realization(model, testing::random_matrix(rng, 1, 4, 0.2));
    const StateSpace cl = closed_loop_realization(plant, c);
    const StateSpace ctrl(c.Ac, c.Bc, c.Cc, Matrix::Zero(1, 1));
    const FrequencyGrid grid(66);
    for (int i = 1; i < 65; ++i) {
        const double psi = grid.points[static_cast<std::size_t>(i)];
        const Complex g = freq_response(plant, psi)(0, 0);
        const Complex gc = freq_response(ctrl, psi)(0, 0);
        const Complex want = g / (1.0 - gc * g);
        EXPECT_LT(std::abs(freq_response(cl, psi)(0, 0) - want), 1e-8 * std::max(1.0, std::abs(want)));
    }
}

TEST(ClosedLoopRealization, ShapeMismatchThrows) {
    const BocfModel model = assemble_model(Vector::Zero(4), 2, 1, 1);
    EXPECT_THROW(controller_realization(model, Matrix::Zero(1, 3)), Error);
}

PcacConfig example_pcac() { return example1_config().pcac; }

TEST(PcacStep, FirstStepKeepsPrior) {
    const PcacConfig cfg = example_pcac();
    PcacState st(cfg);
    const PcacStepResult r = pcac_step(st, Vector::Constant(1, 1000.0), Vector::Zero(1), cfg);
    EXPECT_FALSE(r.flagged);
    EXPECT_EQ(st.rls.theta, cfg.rls.theta0);
    EXPECT_TRUE(r.u_next.isZero(0.0));  // still open loop
    EXPECT_EQ(st.k, 1);
}

TEST(PcacStep, ControlStartsAtConfiguredStep) {
    PcacConfig cfg = example_pcac();
    cfg.control_start = 5;
    PcacState st(cfg);
    std::mt19937_64 rng(65);
    for (int k = 0; k < 8; ++k) {
        const PcacStepResult r = pcac_step(st, testing::random_vector(rng, 1), st.u_next, cfg);
        if (k + 1 < 5) {
            EXPECT_TRUE(r.u_next.isZero(0.0)) << k;
        } else {
            EXPECT_FALSE(r.u_next.isZero(0.0)) << k;
            EXPECT_NEAR(r.u_next(0), (st.gain * st.x_m)(0), 1e-12);
        }
    }
}

TEST(PcacStep, NumericalFailureYieldsZeroControl) {
    PcacConfig cfg = example_pcac();
    cfg.control_start = 0;
    PcacState st(cfg);
    std::mt19937_64 rng(66);
    for (int k = 0; k < 5; ++k) pcac_step(st, testing::random_vector(rng, 1), st.u_next, cfg);
    const PcacStepResult r =
        pcac_step(st, Vector::Constant(1, std::numeric_limits<double>::quiet_NaN()), st.u_next, cfg);
    EXPECT_TRUE(r.flagged);
    EXPECT_FALSE(r.reason.empty());
    EXPECT_TRUE(r.u_next.isZero(0.0));
    EXPECT_TRUE(st.u_next.isZero(0.0));
}

TEST(PcacStep, Deterministic) {
    const PcacConfig cfg = example_pcac();
    auto run = [&] {
        PcacState st(cfg);
        std::mt19937_64 rng(67);
        std::vector<double> us;
        for (int k = 0; k < 150; ++k) {
            pcac_step(st, testing::random_vector(rng, 1), st.u_next, cfg);
            us.push_back(st.u_next(0));
        }
        return us;
    };
    EXPECT_EQ(run(), run());
}

TEST(PcacConfig, Validation) {
    PcacConfig cfg = example_pcac();
    EXPECT_NO_THROW(cfg.validate());
    cfg.bpre.R1 = Matrix::Identity(3, 3);
    cfg.bpre.P_term = Matrix::Identity(3, 3);
    EXPECT_THROW(cfg.validate(), Error);
    cfg = example_pcac();
    cfg.control_start = -1;
    EXPECT_THROW(cfg.validate(), Error);
}

}  // namespace
}  // namespace pcac
