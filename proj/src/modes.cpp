#include "cavity/modes.hpp"

#include <cmath>

namespace cavity {

void ModeEnsemble::validate() const {
    if (!(gamma_r > 0.0))
        throw InvalidEnsembleError("gamma_r must be > 0");
    if (modes.empty())
        throw InvalidEnsembleError("ensemble needs at least one chaotic mode");
    for (std::size_t i = 0; i < modes.size(); ++i) {
        if (!(modes[i].gamma > 0.0))
            throw InvalidEnsembleError("gamma_n must be > 0 (mode " + std::to_string(i) + ")");
    }
}

std::vector<std::size_t> ModeEnsemble::overdamped_violations() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < modes.size(); ++i) {
        if (std::abs(modes[i].g) / modes[i].gamma > 0.1)
            out.push_back(i);
    }
    return out;
}

void PumpDrive::validate() const {
    if (gamma_L < 0.0)
        throw InvalidEnsembleError("gamma_L must be >= 0");
}

DerivedParams derive_params(const ModeEnsemble& ensemble, const PumpDrive& drive) {
    ensemble.validate();
    drive.validate();

    DerivedParams p;
    p.gamma_r = ensemble.gamma_r;
    p.E_n0.reserve(ensemble.size());

    double sum_abs2 = 0.0;
    Complex sum_g_En0{0.0, 0.0};
    double sum_g2_over_gamma = 0.0;
    for (const ChaoticMode& m : ensemble.modes) {
        const Complex En0 = m.a * drive.E0 / m.gamma;
        p.E_n0.push_back(En0);
        sum_abs2 += std::norm(En0);
        sum_g_En0 += m.g * En0;
        sum_g2_over_gamma += m.g * m.g / m.gamma;
    }

    if (sum_abs2 == 0.0)
        throw ZeroPumpError("all a_n E0 vanish; pump mode undefined");

    p.E_p0 = std::sqrt(sum_abs2);
    p.I_p0 = sum_abs2;
    p.g_bar = sum_g_En0 / p.E_p0;
    p.G = sum_g2_over_gamma / ensemble.gamma_r;

    const double g_bar_abs2 = std::norm(p.g_bar);
    if (g_bar_abs2 > 0.0) {
        double inv_gamma_p = 0.0;
        for (const ChaoticMode& m : ensemble.modes)
            inv_gamma_p += (m.g * m.g / g_bar_abs2) / m.gamma;
        p.gamma_p = 1.0 / inv_gamma_p;
    }

    p.gamma_r_prime = ensemble.gamma_r * (1.0 + p.G);
    p.alpha = p.G * (2.0 + p.G) / ((1.0 + p.G) * (1.0 + p.G));
    p.alpha_prime = p.G / (1.0 + p.G);
    return p;
}

} // namespace cavity
