#pragma once

#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pcac/sslin.hpp"

namespace pcac {

/// Memoryless feedback nonlinearity applied componentwise (R^p -> R^p).
class Nonlinearity {
   public:
    enum class Kind { Tanh, Saturation, LinearGain, DeadZone };

    static Nonlinearity tanh() { return {Kind::Tanh, 0.0}; }
    static Nonlinearity saturation(double limit);
    static Nonlinearity linear_gain(double gain) { return {Kind::LinearGain, gain}; }
    static Nonlinearity dead_zone(double width);

    Kind kind() const { return kind_; }
    double parameter() const { return param_; }
    std::string name() const;

    double apply(double y) const;
    Vector operator()(const Vector& y) const;

    /// Tightest scalar sector [lo, hi] known analytically for this kind.
    std::pair<double, double> known_sector() const;
    /// True when the analytic sector of this kind lies inside [lo, hi].
    bool admits_sector(double lo, double hi) const;

   private:
    Nonlinearity(Kind kind, double param) : kind_(kind), param_(param) {}

    Kind kind_;
    double param_;
};

/// Sector [M1, M2]: (gamma(y) - M1 y)^T (gamma(y) - M2 y) <= 0.
class SectorBound {
   public:
    SectorBound(Matrix M1, Matrix M2);
    /// Sector [0, M] used for the DISB class.
    static SectorBound zero_to(Matrix M);
    static SectorBound scalar(double lo, double hi);

    const Matrix& M1() const { return M1_; }
    const Matrix& M2() const { return M2_; }

   private:
    Matrix M1_, M2_;
};

/// Strictly proper LTI system G in positive feedback with gamma.
struct LurePlant {
    StateSpace linear;
    Nonlinearity gamma;

    LurePlant(StateSpace linear, Nonlinearity gamma);
};

struct PlantStep {
    Vector x_next;
    Vector y;
};

/// y = C x, x_next = A x + B (gamma(y) + u + v).
PlantStep step_plant(const LurePlant& plant, const Vector& x, const Vector& u, const Vector& v);

struct Trajectory {
    std::vector<Vector> x;  // steps + 1 states
    std::vector<Vector> y;  // steps + 1 outputs
};

/// Iterates step_plant. Inputs beyond the end of u_seq / v_seq are zero.
Trajectory simulate(const LurePlant& plant, const Vector& x0, std::span<const Vector> u_seq,
                    std::span<const Vector> v_seq, int steps);

struct SectorCheck {
    bool holds = true;
    double worst = -std::numeric_limits<double>::infinity();  // max of the quadratic form
};

SectorCheck verify_sector(const Nonlinearity& gamma, const SectorBound& bound,
                          std::span<const Vector> samples);

bool verify_disb(const Nonlinearity& gamma, const Matrix& M, std::span<const Vector> samples);

/// `count` uniform points per component over [lo, hi], laid out along each
/// coordinate axis (p = 1 gives the plain uniform grid).
std::vector<Vector> uniform_samples(Eigen::Index p, int count = 10001, double lo = -100.0,
                                    double hi = 100.0);

}  // namespace pcac
