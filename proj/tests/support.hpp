#ifndef CAVITY_TESTS_SUPPORT_HPP
#define CAVITY_TESTS_SUPPORT_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "cavity/modes.hpp"

namespace cavity::test {

/// gamma_r=1, gamma_1=100, g=5, a=1, E0=1: the single-mode workhorse with
/// E_p0=0.01, g_bar=5, gamma_p=100, G=0.25.
inline ModeEnsemble single_mode_case() {
    ModeEnsemble e;
    e.gamma_r = 1.0;
    e.modes = {{100.0, 5.0, {1.0, 0.0}}};
    return e;
}

/// Random over-damped ensemble: gamma_n/gamma_r in [50, 1e4], |g_n|/gamma_n <= 0.1.
inline ModeEnsemble random_ensemble(std::mt19937_64& rng, int n_max = 50) {
    std::uniform_int_distribution<int> n_dist(1, n_max);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    ModeEnsemble e;
    e.gamma_r = std::pow(10.0, -2.0 + 4.0 * u(rng));
    const int n = n_dist(rng);
    for (int i = 0; i < n; ++i) {
        ChaoticMode m;
        m.gamma = e.gamma_r * std::pow(10.0, std::log10(50.0) + (4.0 - std::log10(50.0)) * u(rng));
        m.g = (2.0 * u(rng) - 1.0) * 0.1 * m.gamma;
        m.a = Complex{2.0 * u(rng) - 1.0, 2.0 * u(rng) - 1.0};
        e.modes.push_back(m);
    }
    return e;
}

/// Random ensemble rescaled into the over-damped perturbative regime:
/// couplings shrunk so that G <= G_cap (spectrum stays real and the
/// first-order decay-rate formula applies).
inline ModeEnsemble random_perturbative_ensemble(std::mt19937_64& rng, int n_max = 20,
                                                 double G_cap = 0.7) {
    ModeEnsemble e = random_ensemble(rng, n_max);
    double G = 0.0;
    for (const ChaoticMode& m : e.modes) G += m.g * m.g / (m.gamma * e.gamma_r);
    if (G > G_cap) {
        const double scale = std::sqrt(G_cap / G);
        for (ChaoticMode& m : e.modes) m.g *= scale;
    }
    return e;
}

/// Adaptive Simpson quadrature, relative tolerance ~1e-9. Independent oracle
/// for the closed-form lineshape convolution.
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol = 1e-10, int depth = 30) {
    const double m = 0.5 * (a + b);
    const double fa = f(a), fb = f(b), fm = f(m);
    std::function<double(double, double, double, double, double, double, int)> rec =
        [&](double lo, double hi, double flo, double fhi, double fmid, double whole,
            int d) -> double {
        const double mid = 0.5 * (lo + hi);
        const double lm = 0.5 * (lo + mid), rm = 0.5 * (mid + hi);
        const double flm = f(lm), frm = f(rm);
        const double left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
        const double right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
        if (d <= 0 || std::abs(left + right - whole) < 15.0 * tol * (std::abs(left + right) + 1e-300))
            return left + right + (left + right - whole) / 15.0;
        return rec(lo, mid, flo, fmid, flm, left, d - 1) +
               rec(mid, hi, fmid, fhi, frm, right, d - 1);
    };
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return rec(a, b, fa, fb, fm, whole, depth);
}

/// The pump-linewidth average evaluated by quadrature of the defining
/// integral: pi(1+G) * integral of the product of the two Lorentzians.
inline double convolved_lineshape_quadrature(double G, double delta, double gL_over_gr) {
    if (gL_over_gr == 0.0) {
        const double onepG = 1.0 + G;
        return onepG * onepG / (delta * delta + onepG * onepG);
    }
    const double onepG = 1.0 + G;
    auto integrand = [&](double dp) {
        const double l1 = (onepG / M_PI) / (dp * dp + onepG * onepG);
        const double l2 = (gL_over_gr / M_PI) / ((dp - delta) * (dp - delta) + gL_over_gr * gL_over_gr);
        return l1 * l2;
    };
    // Piecewise segments anchored on both Lorentzian peaks so the adaptive
    // rule cannot step over a narrow feature.
    const double span = 2000.0 * (onepG + gL_over_gr) + 10.0 * std::abs(delta);
    std::vector<double> cuts = {-span, span};
    for (double c : {0.0, delta})
        for (double w : {onepG, gL_over_gr})
            for (double f : {-20.0, -2.0, 2.0, 20.0})
                cuts.push_back(c + f * w);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::remove_if(cuts.begin(), cuts.end(),
                              [&](double x) { return x < -span || x > span; }),
               cuts.end());
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
        if (cuts[i + 1] > cuts[i])
            total += adaptive_simpson(integrand, cuts[i], cuts[i + 1]);
    return M_PI * onepG * total;
}

} // namespace cavity::test

#endif
