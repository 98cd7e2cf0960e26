#pragma once

#include <span>
#include <vector>

#include "pcac/sslin.hpp"

namespace pcac {

/// Block observable canonical form of the ARX model
///   y_k = -sum F_i y_{k-i} + sum G_i u_{k-i}.
struct BocfModel {
    int order = 0;
    int outputs = 0;
    int inputs = 0;
    std::vector<Matrix> F;  // F_1..F_n, each p x p
    std::vector<Matrix> G;  // G_1..G_n, each p x m
    Matrix A;               // np x np: first block column -F_i, identity superdiagonal
    Matrix B;               // np x m: stacked G_i
    Matrix C;               // p x np: [I_p 0 ... 0]
};

/// Unpacks theta = [vec[F_1..F_n]; vec[G_1..G_n]] (column-major) into the
/// block-companion realization.
BocfModel assemble_model(const Vector& theta, int order, int outputs, int inputs);

/// Output injection F = [-F_1; ...; -F_n], the first block column of A_m.
Matrix output_injection(const BocfModel& model);

/// x_m built explicitly from y_k and the past outputs/inputs. past_y[i-1] is
/// y_{k-i}, past_u[i-1] is u_{k-i}; missing entries count as zero.
Vector assemble_state(const BocfModel& model, const Vector& y, std::span<const Vector> past_y,
                      std::span<const Vector> past_u);

/// C_m A_m^{i-1} B_m for i = 1..count.
std::vector<Matrix> markov_parameters(const BocfModel& model, int count);

}  // namespace pcac
