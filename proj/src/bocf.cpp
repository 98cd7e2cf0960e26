#include "pcac/bocf.hpp"

#include "pcac/error.hpp"

namespace pcac {

BocfModel assemble_model(const Vector& theta, int order, int outputs, int inputs) {
    require_dims(order >= 1 && outputs >= 1 && inputs >= 1, "assemble_model: dimensions must be positive");
    const Eigen::Index n = order, p = outputs, m = inputs;
    require_dims(theta.size() == n * p * (m + p), "assemble_model: theta has wrong length");

    BocfModel model;
    model.order = order;
    model.outputs = outputs;
    model.inputs = inputs;

    // vec stacks columns, so theta_F is [F_1 ... F_n] (p x np) read column-major.
    const Eigen::Map<const Matrix> f_blocks(theta.data(), p, n * p);
    const Eigen::Map<const Matrix> g_blocks(theta.data() + n * p * p, p, n * m);

    model.A = Matrix::Zero(n * p, n * p);
    model.B = Matrix::Zero(n * p, m);
    model.C = Matrix::Zero(p, n * p);
    model.C.leftCols(p).setIdentity();
    for (Eigen::Index i = 0; i < n; ++i) {
        model.F.emplace_back(f_blocks.middleCols(i * p, p));
        model.G.emplace_back(g_blocks.middleCols(i * m, m));
        model.A.block(i * p, 0, p, p) = -model.F.back();
        if (i + 1 < n) model.A.block(i * p, (i + 1) * p, p, p).setIdentity();
        model.B.middleRows(i * p, p) = model.G.back();
    }
    return model;
}

Matrix output_injection(const BocfModel& model) { return model.A.leftCols(model.outputs); }

Vector assemble_state(const BocfModel& model, const Vector& y, std::span<const Vector> past_y,
                      std::span<const Vector> past_u) {
    const int n = model.order;
    const Eigen::Index p = model.outputs;
    require_dims(y.size() == p, "assemble_state: y has wrong dimension");

    Vector x = Vector::Zero(n * p);
    x.head(p) = y;
    for (int j = 2; j <= n; ++j) {
        auto block = x.segment((j - 1) * p, p);
        for (int i = 1; i <= n - j + 1; ++i) {
            const auto idx = static_cast<std::size_t>(i - 1);
            const auto coeff = static_cast<std::size_t>(i + j - 2);
            if (idx < past_y.size()) block -= model.F[coeff] * past_y[idx];
            if (idx < past_u.size()) block += model.G[coeff] * past_u[idx];
        }
    }
    return x;
}

std::vector<Matrix> markov_parameters(const BocfModel& model, int count) {
    require_dims(count >= 1, "markov_parameters: count must be positive");
    std::vector<Matrix> out;
    out.reserve(static_cast<std::size_t>(count));
    Matrix AkB = model.B;
    for (int i = 0; i < count; ++i) {
        out.push_back(model.C * AkB);
        AkB = model.A * AkB;
    }
    return out;
}

}  // namespace pcac
