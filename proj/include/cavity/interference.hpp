#ifndef CAVITY_INTERFERENCE_HPP
#define CAVITY_INTERFERENCE_HPP

#include <vector>

#include "cavity/modes.hpp"

namespace cavity {

/// Round-by-round tunneling contributions on resonance:
///   E_r^(1) = sum_n g_n E_n0 / gamma_r,  E_r^(k) = -G E_r^(k-1),
///   E_n^(k) = -(g_n/gamma_n) E_r^(k).
struct RoundContributions {
    std::vector<Complex> E_r_rounds;              // E_r^(1..k_max)
    std::vector<std::vector<Complex>> E_n_rounds; // [round][mode]
    int k_max = 0;
    double G = 0.0;

    /// Compensated partial sum of E_r^(1..k).
    Complex partial_sum(int k) const;
};

/// Requires delta = 0. Throws DivergentSeriesError when G >= 1 and the
/// partial sums have visibly left the convergent regime.
RoundContributions interference_rounds(const ModeEnsemble& ensemble,
                                       const PumpDrive& drive, int k_max);

struct ResummationReport {
    Complex series_E_r{0.0, 0.0};
    Complex exact_E_r{0.0, 0.0};
    double abs_error = 0.0;
    double remainder_bound = 0.0; // |E_r^(1)| G^k / (1-G)
    int k_max = 0;
    bool chaotic_modes_converged = false;
};

/// Confirms that the summed rounds reproduce the closed-form amplitudes with
/// geometric rate G (delta = 0, G < 1).
ResummationReport series_resummation_check(const ModeEnsemble& ensemble,
                                           const PumpDrive& drive, int k_max = 60);

} // namespace cavity

#endif
