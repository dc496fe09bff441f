#ifndef CAVITY_INVERSE_HPP
#define CAVITY_INVERSE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "cavity/errors.hpp"

namespace cavity {

struct ValueWithSigma {
    double value = 0.0;
    double sigma = 0.0;
};

/// Per-mode measured inputs for the extraction: on-resonance pumping
/// efficiency, observed regular-mode linewidth, overlap factors, pump-mode
/// decay rate and pump laser linewidth.
struct Measurement {
    std::string mode_label;
    ValueWithSigma epsilon0;
    ValueWithSigma gamma_r_prime; // [1/s]
    ValueWithSigma beta_r;
    ValueWithSigma beta_p;
    ValueWithSigma gamma_p; // [1/s]
    double gamma_L = 0.0;   // [1/s]

    void validate() const;
};

struct ExtractedParams {
    std::string mode_label;
    ValueWithSigma gamma_r;
    ValueWithSigma G;
    ValueWithSigma g_bar;
    ValueWithSigma alpha;
    ValueWithSigma alpha_prime;
    ValueWithSigma gamma_rG;
    /// Additional positive roots of the efficiency equation, when the fit is
    /// ambiguous. Empty in the generic single-root case.
    std::vector<double> extra_G_roots;
    double rejection_fraction = 0.0; // Monte Carlo samples with no root
};

/// Forward model for the on-resonance efficiency given G, with
/// gamma_r = gamma_r_prime/(1+G) eliminated. Uses the convolved lineshape so
/// the narrow- and broad-pump formulas are its two limits.
double efficiency_on_resonance(double G, double gamma_r_prime, double gamma_p,
                               double beta_ratio, double gamma_L);

/// Solves eps(0; G) = epsilon0 for G on (0, 100], then
/// gamma_r = gamma_r_prime/(1+G), g_bar = sqrt(gamma_p gamma_r G), and the
/// derived efficiencies. Central values only (sigmas zero). Throws
/// NoRootError when epsilon0 is outside the attainable range; multiple roots
/// are returned with the smallest as central value and the rest flagged.
ExtractedParams extract(const Measurement& meas);

struct DerivedColumns {
    double gamma_r_prime = 0.0;
    double alpha = 0.0;
    double alpha_prime = 0.0;
    double gamma_rG = 0.0;
    double g_bar = 0.0;
};

DerivedColumns derived_columns(double gamma_r, double G, double gamma_p);

/// Monte Carlo propagation of independent Gaussian input errors (truncated
/// at physical bounds). Deterministic for a fixed seed; per-sample RNG
/// streams are derived from the master seed.
ExtractedParams propagate_uncertainty(const Measurement& meas, int n_samples,
                                      std::uint64_t seed);

struct GammaPConsistency {
    std::vector<double> per_mode; // g_bar^2 / (gamma_r G)
    double mean = 0.0;
    double relative_spread = 0.0; // (max - min)/mean
};

struct GbarTunnelingRow {
    double g_bar = 0.0;
    double gamma_rG = 0.0;
};

/// Recovers the common pump-mode decay rate gamma_p = g_bar^2/(gamma_r G)
/// from at least two extracted rows and reports the spread.
GammaPConsistency gamma_p_consistency(const std::vector<GbarTunnelingRow>& rows);

} // namespace cavity

#endif
