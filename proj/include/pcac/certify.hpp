#pragma once

#include <span>
#include <string>
#include <vector>

#include "pcac/lure.hpp"
#include "pcac/sslin.hpp"

namespace pcac {

struct CertifyOptions {
    FrequencyGrid grid{};
    /// Golden-section iterations around the grid argmin (0 disables refinement).
    int refine_iterations = 30;
    /// Pass requires alpha < 1 - margin and beta > margin.
    double margin = 0.0;
};

struct CircleReport {
    double alpha_cc = 0.0;
    double beta_cc = 0.0;
    double argmin_psi = 0.0;
    bool cc1_pass = false;
    bool cc2_pass = false;
    bool flagged = false;
    std::string reason;

    bool pass() const { return cc1_pass && cc2_pass; }
};

struct TsypkinReport {
    double zeta1 = 0.0;
    int zeta2 = 0;
    int full_dimension = 0;
    double zeta3_min_eig = 0.0;
    double alpha_tc = 0.0;
    double beta_tc = 0.0;
    double argmin_psi = 0.0;
    Matrix N;
    bool tc1_pass = false;
    bool tc2_pass = false;
    bool tc3_pass = false;
    bool flagged = false;
    std::string reason;

    bool pass() const { return tc1_pass && tc2_pass && tc3_pass; }
};

/// Realization of H = [I - M2 G][I - M1 G]^{-1}:
/// (A + B M1 C, B, (M1 - M2) C, I).
StateSpace circle_multiplier_realization(const StateSpace& sys, const SectorBound& bound);

/// Realization of L_N = M^{-1} - [I + (1 - q^{-1}) N] G with one delay state
/// block carrying q^{-1} G.
StateSpace tsypkin_multiplier_realization(const StateSpace& sys, const Matrix& M, const Matrix& N);

/// Grid minimum (with golden-section refinement) of lambda_min[X(psi) + X(psi)^H]
/// for the realization's frequency response X. Unit-circle poles contribute -inf.
struct HermitianSweep {
    double minimum = 0.0;
    double argmin_psi = 0.0;
    bool hit_pole = false;
};
HermitianSweep hermitian_sweep(const StateSpace& sys, const CertifyOptions& opts);

CircleReport circle_certificate(const StateSpace& sys, const SectorBound& bound,
                                const CertifyOptions& opts = {});

TsypkinReport tsypkin_certificate(const StateSpace& sys, const Matrix& M, const Matrix& N,
                                  const CertifyOptions& opts = {});

struct CertificatePair {
    CircleReport circle;
    TsypkinReport tsypkin;
};

/// Evaluates both certificates for every realization; failures are recorded in
/// the reports, never thrown. Work is spread over `threads` workers (0 = all cores).
std::vector<CertificatePair> certificate_trace(std::span<const StateSpace> systems, const SectorBound& bound,
                                               const Matrix& M, const Matrix& N, const CertifyOptions& opts,
                                               unsigned threads = 0);

/// Evaluates the Tsypkin certificate for scalar multiples N = n_i I and returns
/// the report with the largest beta_tc.
TsypkinReport scan_tsypkin_n(const StateSpace& sys, const Matrix& M, std::span<const double> candidates,
                             const CertifyOptions& opts = {});

/// Log-spaced candidates from lo to hi (inclusive).
std::vector<double> log_space(double lo, double hi, int count);

}  // namespace pcac
