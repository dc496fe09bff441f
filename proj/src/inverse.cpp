#include "cavity/inverse.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "cavity/rng.hpp"

namespace cavity {

namespace {

double bisect_G(double a, double b, double fa,
                const std::function<double(double)>& f) {
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (a + b);
        if (mid == a || mid == b) break;
        const double fm = f(mid);
        if ((fa < 0.0) == (fm < 0.0)) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
        if (b - a < 1e-15 + 1e-13 * std::max(std::abs(a), std::abs(b))) break;
    }
    return 0.5 * (a + b);
}

double sample_truncated(CounterRng& rng, const ValueWithSigma& v, double lower) {
    if (v.sigma == 0.0) return v.value;
    for (int attempt = 0; attempt < 200; ++attempt) {
        const double x = v.value + v.sigma * rng.next_gaussian();
        if (x > lower) return x;
    }
    return v.value;
}

} // namespace

void Measurement::validate() const {
    if (!(epsilon0.value > 0.0))
        throw ConfigError("epsilon0 must be > 0");
    if (!(gamma_r_prime.value > 0.0))
        throw ConfigError("gamma_r_prime must be > 0");
    if (!(beta_p.value > 0.0))
        throw InvalidOverlapError("beta_p must be > 0");
    if (beta_r.value < 0.0)
        throw InvalidOverlapError("beta_r must be >= 0");
    if (!(gamma_p.value > 0.0))
        throw ConfigError("gamma_p must be > 0");
    if (gamma_L < 0.0)
        throw ConfigError("gamma_L must be >= 0");
}

double efficiency_on_resonance(double G, double gamma_r_prime, double gamma_p,
                               double beta_ratio, double gamma_L) {
    // With gamma_r eliminated via gamma_r = gamma_r'/(1+G), the on-resonance
    // convolved lineshape collapses to gamma_r'/(gamma_r' + gamma_L).
    const double L0 = gamma_r_prime / (gamma_r_prime + gamma_L);
    const double onepG = 1.0 + G;
    const double alpha = G * (2.0 + G) / (onepG * onepG);
    const double alpha_prime = G / onepG;
    return (1.0 - alpha * L0) + (gamma_p * beta_ratio / gamma_r_prime) * alpha_prime * L0;
}

DerivedColumns derived_columns(double gamma_r, double G, double gamma_p) {
    if (!(gamma_r > 0.0) || !(gamma_p > 0.0) || G < 0.0)
        throw ConfigError("derived_columns needs gamma_r, gamma_p > 0 and G >= 0");
    DerivedColumns c;
    const double onepG = 1.0 + G;
    c.gamma_r_prime = gamma_r * onepG;
    c.alpha = G * (2.0 + G) / (onepG * onepG);
    c.alpha_prime = G / onepG;
    c.gamma_rG = gamma_r * G;
    c.g_bar = std::sqrt(gamma_p * gamma_r * G);
    return c;
}

ExtractedParams extract(const Measurement& meas) {
    meas.validate();
    const double beta_ratio = meas.beta_r.value / meas.beta_p.value;
    const auto f = std::function<double(double)>([&](double G) {
        return efficiency_on_resonance(G, meas.gamma_r_prime.value, meas.gamma_p.value,
                                       beta_ratio, meas.gamma_L) -
               meas.epsilon0.value;
    });

    constexpr double kGMax = 100.0;
    constexpr int kScanPoints = 2000;

    std::vector<double> roots;
    if (std::abs(f(0.0)) < 1e-14 * std::max(1.0, meas.epsilon0.value))
        roots.push_back(0.0);

    double prev_G = 0.0;
    double prev_f = f(0.0);
    for (int i = 1; i <= kScanPoints; ++i) {
        // Log-spaced scan so small-G roots are bracketed tightly.
        const double G = kGMax * (std::expm1(8.0 * i / kScanPoints)) / std::expm1(8.0);
        const double fG = f(G);
        if ((prev_f < 0.0) != (fG < 0.0))
            roots.push_back(bisect_G(prev_G, G, prev_f, f));
        prev_G = G;
        prev_f = fG;
    }

    if (roots.empty())
        throw NoRootError("epsilon0 is outside the attainable efficiency range");

    ExtractedParams out;
    out.mode_label = meas.mode_label;
    const double G = roots.front();
    for (std::size_t i = 1; i < roots.size(); ++i) out.extra_G_roots.push_back(roots[i]);

    const double gamma_r = meas.gamma_r_prime.value / (1.0 + G);
    const DerivedColumns c = derived_columns(gamma_r, G, meas.gamma_p.value);
    out.G.value = G;
    out.gamma_r.value = gamma_r;
    out.g_bar.value = c.g_bar;
    out.alpha.value = c.alpha;
    out.alpha_prime.value = c.alpha_prime;
    out.gamma_rG.value = c.gamma_rG;
    return out;
}

ExtractedParams propagate_uncertainty(const Measurement& meas, int n_samples,
                                      std::uint64_t seed) {
    if (n_samples < 1)
        throw ConfigError("n_samples must be >= 1");

    ExtractedParams central = extract(meas);

    // Welford accumulators per output column.
    struct Acc {
        double mean = 0.0, m2 = 0.0;
        long n = 0;
        void add(double x) {
            ++n;
            const double d = x - mean;
            mean += d / n;
            m2 += d * (x - mean);
        }
        double sd() const { return n > 1 ? std::sqrt(m2 / (n - 1)) : 0.0; }
    };
    Acc a_gamma_r, a_G, a_g_bar, a_alpha, a_alpha_prime, a_gamma_rG;

    long rejected = 0;
    for (int i = 0; i < n_samples; ++i) {
        CounterRng rng(seed, static_cast<std::uint64_t>(i));
        Measurement s = meas;
        s.epsilon0 = {sample_truncated(rng, meas.epsilon0, 0.0), 0.0};
        s.gamma_r_prime = {sample_truncated(rng, meas.gamma_r_prime, 0.0), 0.0};
        s.beta_r = {std::max(0.0, meas.beta_r.value + meas.beta_r.sigma * rng.next_gaussian()), 0.0};
        s.beta_p = {sample_truncated(rng, meas.beta_p, 0.0), 0.0};
        s.gamma_p = {sample_truncated(rng, meas.gamma_p, 0.0), 0.0};
        try {
            const ExtractedParams e = extract(s);
            a_gamma_r.add(e.gamma_r.value);
            a_G.add(e.G.value);
            a_g_bar.add(e.g_bar.value);
            a_alpha.add(e.alpha.value);
            a_alpha_prime.add(e.alpha_prime.value);
            a_gamma_rG.add(e.gamma_rG.value);
        } catch (const NoRootError&) {
            ++rejected;
        }
    }

    central.gamma_r.sigma = a_gamma_r.sd();
    central.G.sigma = a_G.sd();
    central.g_bar.sigma = a_g_bar.sd();
    central.alpha.sigma = a_alpha.sd();
    central.alpha_prime.sigma = a_alpha_prime.sd();
    central.gamma_rG.sigma = a_gamma_rG.sd();
    central.rejection_fraction = static_cast<double>(rejected) / n_samples;
    return central;
}

GammaPConsistency gamma_p_consistency(const std::vector<GbarTunnelingRow>& rows) {
    if (rows.size() < 2)
        throw ConfigError("gamma_p consistency needs at least two modes");
    GammaPConsistency out;
    out.per_mode.reserve(rows.size());
    for (const GbarTunnelingRow& r : rows) {
        if (!(r.gamma_rG > 0.0))
            throw ConfigError("gamma_r G must be > 0 for gamma_p consistency");
        out.per_mode.push_back(r.g_bar * r.g_bar / r.gamma_rG);
    }
    const auto [mn, mx] = std::minmax_element(out.per_mode.begin(), out.per_mode.end());
    for (double v : out.per_mode) out.mean += v;
    out.mean /= static_cast<double>(out.per_mode.size());
    out.relative_spread = (*mx - *mn) / out.mean;
    return out;
}

} // namespace cavity
