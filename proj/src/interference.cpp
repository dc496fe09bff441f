#include "cavity/interference.hpp"

#include <cmath>

#include "cavity/steady_state.hpp"

namespace cavity {

namespace {

// Kahan-compensated complex accumulator.
struct CompensatedSum {
    Complex sum{0.0, 0.0};
    Complex comp{0.0, 0.0};
    void add(Complex x) {
        const Complex y = x - comp;
        const Complex t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
};

} // namespace

Complex RoundContributions::partial_sum(int k) const {
    CompensatedSum acc;
    for (int i = 0; i < k && i < static_cast<int>(E_r_rounds.size()); ++i)
        acc.add(E_r_rounds[static_cast<std::size_t>(i)]);
    return acc.sum;
}

RoundContributions interference_rounds(const ModeEnsemble& ensemble,
                                       const PumpDrive& drive, int k_max) {
    ensemble.validate();
    if (drive.delta != 0.0)
        throw InvalidEnsembleError("interference rounds are derived on resonance (delta = 0)");
    if (k_max < 1)
        throw InvalidEnsembleError("k_max must be >= 1");

    const DerivedParams p = derive_params(ensemble, drive);

    RoundContributions rc;
    rc.k_max = k_max;
    rc.G = p.G;
    rc.E_r_rounds.reserve(static_cast<std::size_t>(k_max));
    rc.E_n_rounds.reserve(static_cast<std::size_t>(k_max));

    Complex E_r_k{0.0, 0.0};
    for (std::size_t i = 0; i < ensemble.size(); ++i)
        E_r_k += ensemble.modes[i].g * p.E_n0[i] / ensemble.gamma_r;

    const double first_mag = std::abs(E_r_k);
    CompensatedSum partial;
    for (int k = 1; k <= k_max; ++k) {
        if (k > 1) E_r_k = -p.G * E_r_k;
        partial.add(E_r_k);
        if (p.G >= 1.0 && std::abs(partial.sum) > 1e6 * (first_mag + 1e-300))
            throw DivergentSeriesError("G >= 1: partial sums grow without bound");
        rc.E_r_rounds.push_back(E_r_k);
        std::vector<Complex> row;
        row.reserve(ensemble.size());
        for (const ChaoticMode& m : ensemble.modes)
            row.push_back(-(m.g / m.gamma) * E_r_k);
        rc.E_n_rounds.push_back(std::move(row));
    }
    return rc;
}

ResummationReport series_resummation_check(const ModeEnsemble& ensemble,
                                           const PumpDrive& drive, int k_max) {
    const RoundContributions rc = interference_rounds(ensemble, drive, k_max);
    if (rc.G >= 1.0)
        throw DivergentSeriesError("resummation requires G < 1");

    const SteadyState exact = steady_state_exact(ensemble, drive);
    const SteadyState first_order = steady_state_first_order(ensemble, drive);
    const DerivedParams p = derive_params(ensemble, drive);

    ResummationReport rep;
    rep.k_max = k_max;
    rep.series_E_r = rc.partial_sum(k_max);
    rep.exact_E_r = exact.E_r;
    rep.abs_error = std::abs(rep.series_E_r - rep.exact_E_r);
    const double first_mag = rc.E_r_rounds.empty() ? 0.0 : std::abs(rc.E_r_rounds[0]);
    rep.remainder_bound = first_mag * std::pow(rc.G, k_max) / (1.0 - rc.G);

    // E_n0 + sum_k E_n^(k) must land on the Eq.(4)-form amplitudes.
    rep.chaotic_modes_converged = true;
    for (std::size_t i = 0; i < ensemble.size(); ++i) {
        CompensatedSum acc;
        acc.add(p.E_n0[i]);
        for (const auto& row : rc.E_n_rounds) acc.add(row[i]);
        const double tol = rep.remainder_bound * std::abs(ensemble.modes[i].g) /
                               ensemble.modes[i].gamma + 1e-13 * std::abs(first_order.E_n[i]) + 1e-300;
        // Compare against the exact form E_n0 - (g/gamma) E_r, which the
        // per-mode series converges to on resonance.
        const Complex target = p.E_n0[i] -
            (ensemble.modes[i].g / ensemble.modes[i].gamma) * exact.E_r;
        if (std::abs(acc.sum - target) > 10.0 * tol)
            rep.chaotic_modes_converged = false;
    }
    return rep;
}

} // namespace cavity
