#ifndef CAVITY_MODES_HPP
#define CAVITY_MODES_HPP

#include <complex>
#include <optional>
#include <vector>

#include "cavity/errors.hpp"

namespace cavity {

using Complex = std::complex<double>;

/// One lossy chaotic mode: field decay rate gamma [1/s], real coupling
/// constant g [1/s] to the regular mode, and complex pump coupling a.
struct ChaoticMode {
    double gamma = 0.0;
    double g = 0.0;
    Complex a{0.0, 0.0};
};

/// The uncoupled regular mode plus N >= 1 chaotic modes. All decay rates are
/// field (amplitude) rates; intensity decays at 2*gamma.
struct ModeEnsemble {
    double gamma_r = 0.0;
    double omega_r = 0.0; // reference only; formulas use detuning
    std::vector<ChaoticMode> modes;

    void validate() const;

    /// Indices of modes with |g|/gamma > 0.1, where the over-damped
    /// assumption |g| << gamma starts to break down. Advisory, not fatal.
    std::vector<std::size_t> overdamped_violations() const;

    std::size_t size() const { return modes.size(); }
};

/// External drive: amplitude E0, normalized detuning delta = Delta/gamma_r,
/// and pump laser linewidth gamma_L (0 = monochromatic).
struct PumpDrive {
    Complex E0{1.0, 0.0};
    double delta = 0.0;
    double gamma_L = 0.0;

    void validate() const;
};

/// Quantities derived from an ensemble and drive: the nonresonant pump-mode
/// amplitude, the effective coupling g_bar, the pump-mode decay rate gamma_p
/// (absent when g_bar = 0), the enhancement factor G and its companions.
struct DerivedParams {
    double gamma_r = 0.0;
    double E_p0 = 0.0; // sqrt(sum |E_n0|^2), real non-negative
    double I_p0 = 0.0;
    Complex g_bar{0.0, 0.0};
    std::optional<double> gamma_p; // absent when g_bar = 0
    double G = 0.0;
    double gamma_r_prime = 0.0; // gamma_r * (1 + G)
    double alpha = 0.0;         // G(2+G)/(1+G)^2
    double alpha_prime = 0.0;   // G/(1+G)

    /// Per-mode nonresonant amplitudes E_n0 = a_n E0 / gamma_n.
    std::vector<Complex> E_n0;
};

/// Computes E_n0, E_p0, g_bar, gamma_p, G, gamma_r', alpha, alpha'.
/// Throws ZeroPumpError when every a_n E0 vanishes. With complex a_n the
/// effective coupling g_bar is complex; gamma_p then uses |g_n/g_bar|^2 so
/// that |g_bar|^2/gamma_p = sum g_n^2/gamma_n stays a real identity.
DerivedParams derive_params(const ModeEnsemble& ensemble, const PumpDrive& drive);

} // namespace cavity

#endif
