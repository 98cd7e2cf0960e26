#include "pcac/lure.hpp"

#include <algorithm>
#include <cmath>

#include "pcac/error.hpp"

namespace pcac {

Nonlinearity Nonlinearity::saturation(double limit) {
    if (!(limit > 0.0)) throw Error(ErrorCode::InvalidArgument, "saturation limit must be positive");
    return {Kind::Saturation, limit};
}

Nonlinearity Nonlinearity::dead_zone(double width) {
    if (!(width > 0.0)) throw Error(ErrorCode::InvalidArgument, "dead-zone width must be positive");
    return {Kind::DeadZone, width};
}

std::string Nonlinearity::name() const {
    switch (kind_) {
        case Kind::Tanh: return "tanh";
        case Kind::Saturation: return "saturation";
        case Kind::LinearGain: return "linear";
        case Kind::DeadZone: return "deadzone";
    }
    return "unknown";
}

double Nonlinearity::apply(double y) const {
    switch (kind_) {
        case Kind::Tanh: return std::tanh(y);
        case Kind::Saturation: return std::clamp(y, -param_, param_);
        case Kind::LinearGain: return param_ * y;
        case Kind::DeadZone:
            if (y > param_) return y - param_;
            if (y < -param_) return y + param_;
            return 0.0;
    }
    return 0.0;
}

Vector Nonlinearity::operator()(const Vector& y) const {
    return y.unaryExpr([this](double v) { return apply(v); });
}

std::pair<double, double> Nonlinearity::known_sector() const {
    if (kind_ == Kind::LinearGain) return {param_, param_};
    return {0.0, 1.0};
}

bool Nonlinearity::admits_sector(double lo, double hi) const {
    const auto [a, b] = known_sector();
    return lo <= a && b <= hi && lo < hi;
}

namespace {

bool positive_definite_part(const Matrix& M) {
    const Matrix sym = 0.5 * (M + M.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(sym, Eigen::EigenvaluesOnly);
    return solver.info() == Eigen::Success && solver.eigenvalues().minCoeff() > 0.0;
}

}  // namespace

SectorBound::SectorBound(Matrix M1, Matrix M2) : M1_(std::move(M1)), M2_(std::move(M2)) {
    require_dims(M1_.rows() == M2_.rows() && M1_.cols() == M2_.cols(),
                 "sector matrices must have equal shape");
    if (M1_.rows() == M1_.cols() && !positive_definite_part(M2_ - M1_)) {
        throw Error(ErrorCode::InvalidArgument, "M2 - M1 must be positive definite");
    }
}

SectorBound SectorBound::zero_to(Matrix M) {
    Matrix zero = Matrix::Zero(M.rows(), M.cols());
    return SectorBound(std::move(zero), std::move(M));
}

SectorBound SectorBound::scalar(double lo, double hi) {
    return SectorBound(Matrix::Constant(1, 1, lo), Matrix::Constant(1, 1, hi));
}

LurePlant::LurePlant(StateSpace lin, Nonlinearity g) : linear(std::move(lin)), gamma(g) {
    require_dims(linear.is_strictly_proper(), "Lur'e plant must be strictly proper");
    require_dims(linear.inputs() == linear.outputs(),
                 "componentwise nonlinearity needs as many inputs as outputs");
}

PlantStep step_plant(const LurePlant& plant, const Vector& x, const Vector& u, const Vector& v) {
    const auto& sys = plant.linear;
    require_dims(x.size() == sys.states(), "state dimension");
    require_dims(u.size() == sys.inputs() && v.size() == sys.inputs(), "input dimension");
    PlantStep out;
    out.y = sys.C() * x;
    out.x_next = sys.A() * x + sys.B() * (plant.gamma(out.y) + u + v);
    return out;
}

Trajectory simulate(const LurePlant& plant, const Vector& x0, std::span<const Vector> u_seq,
                    std::span<const Vector> v_seq, int steps) {
    const auto m = plant.linear.inputs();
    const Vector zero = Vector::Zero(m);
    Trajectory traj;
    traj.x.reserve(static_cast<std::size_t>(steps) + 1);
    traj.y.reserve(static_cast<std::size_t>(steps) + 1);
    Vector x = x0;
    for (int k = 0; k <= steps; ++k) {
        const auto idx = static_cast<std::size_t>(k);
        const Vector& u = idx < u_seq.size() ? u_seq[idx] : zero;
        const Vector& v = idx < v_seq.size() ? v_seq[idx] : zero;
        PlantStep s = step_plant(plant, x, u, v);
        traj.x.push_back(x);
        traj.y.push_back(std::move(s.y));
        x = std::move(s.x_next);
    }
    return traj;
}

SectorCheck verify_sector(const Nonlinearity& gamma, const SectorBound& bound,
                          std::span<const Vector> samples) {
    SectorCheck check;
    for (const Vector& y : samples) {
        require_dims(y.size() == bound.M1().cols(), "sample dimension");
        const Vector g = gamma(y);
        const double q = (g - bound.M1() * y).dot(g - bound.M2() * y);
        const double slack = 1e-14 * (g.squaredNorm() + y.squaredNorm());
        check.worst = std::max(check.worst, q);
        if (q > slack) check.holds = false;
    }
    return check;
}

bool verify_disb(const Nonlinearity& gamma, const Matrix& M, std::span<const Vector> samples) {
    if (samples.empty()) return false;
    const auto p = M.rows();
    require_dims(M.cols() == p, "M must be square");

    // Diagonal structure: component i of gamma(y) only sees y_i.
    for (const Vector& y : samples) {
        const Vector g = gamma(y);
        for (Eigen::Index i = 0; i < p; ++i) {
            Vector e = Vector::Zero(p);
            e(i) = y(i);
            if (gamma(e)(i) != g(i)) return false;
        }
        const double q = g.dot(g - M * y);
        if (q > 1e-14 * (g.squaredNorm() + y.squaredNorm())) return false;
    }

    // Strict increase: checking neighbours in sorted order covers all pairs.
    for (Eigen::Index i = 0; i < p; ++i) {
        std::vector<std::pair<double, double>> pts;
        pts.reserve(samples.size());
        for (const Vector& y : samples) {
            Vector e = Vector::Zero(p);
            e(i) = y(i);
            pts.emplace_back(y(i), gamma(e)(i));
        }
        std::sort(pts.begin(), pts.end());
        for (std::size_t j = 1; j < pts.size(); ++j) {
            if (pts[j].first == pts[j - 1].first) continue;
            if (!(pts[j].second > pts[j - 1].second)) return false;
        }
    }
    return true;
}

std::vector<Vector> uniform_samples(Eigen::Index p, int count, double lo, double hi) {
    std::vector<Vector> out;
    out.reserve(static_cast<std::size_t>(count * p));
    for (Eigen::Index i = 0; i < p; ++i) {
        for (int j = 0; j < count; ++j) {
            Vector y = Vector::Zero(p);
            y(i) = count == 1 ? lo : lo + (hi - lo) * j / (count - 1);
            out.push_back(std::move(y));
        }
    }
    return out;
}

}  // namespace pcac
