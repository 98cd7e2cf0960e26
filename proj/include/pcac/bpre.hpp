#pragma once

#include <optional>

#include "pcac/sslin.hpp"

namespace pcac {

/// Finite-horizon weights, constant over the horizon.
struct BpreConfig {
    int horizon = 1;  // l
    Matrix R1;        // state weight, PSD
    Matrix R2;        // control weight, PD
    Matrix P_term;    // terminal weight P_{l+1}, PSD
    /// Optional performance-variable factor with R1 = E1^T E1 (z = E1 x).
    std::optional<Matrix> E1;

    void validate() const;
};

struct BpreResult {
    Matrix K;   // K_{k|1}
    Matrix P2;  // P_{k|2}
};

/// Runs the Riccati recursion backward for j = l, ..., 2 starting from P_term
/// and returns K = -(R2 + B^T P2 B)^{-1} B^T P2 A.
BpreResult bpre_gain(const Matrix& A, const Matrix& B, const BpreConfig& cfg);

/// First control of the horizon problem with initial state x0, obtained by
/// minimizing the stacked quadratic cost as a single dense least-squares problem.
Vector oracle_lqr_control(const Matrix& A, const Matrix& B, const BpreConfig& cfg, const Vector& x0);

}  // namespace pcac
