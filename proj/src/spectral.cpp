#include "cavity/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cavity {

namespace {

double secular_fn(const ModeEnsemble& e, double lambda) {
    double s = e.gamma_r - lambda;
    for (const ChaoticMode& m : e.modes)
        s += m.g * m.g / (m.gamma - lambda);
    return s;
}

double secular_deriv(const ModeEnsemble& e, double lambda) {
    double s = -1.0;
    for (const ChaoticMode& m : e.modes) {
        const double d = m.gamma - lambda;
        s += m.g * m.g / (d * d);
    }
    return s;
}

// Bisection on fn over [a,b] with fn(a) and fn(b) of opposite sign.
template <typename F>
double bisect(F&& fn, double a, double b) {
    double fa = fn(a);
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (a + b);
        if (mid == a || mid == b) break;
        const double fm = fn(mid);
        if ((fa < 0.0) == (fm < 0.0)) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
        if (b - a <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(a), std::abs(b)))
            break;
    }
    return 0.5 * (a + b);
}

// Nudge an endpoint off a pole until the secular function has the wanted sign.
double off_pole(const ModeEnsemble& e, double pole, double toward, bool want_negative) {
    double offset = 1e-6 * std::abs(toward - pole);
    for (int it = 0; it < 60; ++it) {
        const double x = pole + (toward > pole ? offset : -offset);
        const double s = secular_fn(e, x);
        if ((s < 0.0) == want_negative) return x;
        offset *= 0.5;
    }
    throw DegenerateRatesError("could not isolate secular root near pole");
}

Eigen::MatrixXd decay_matrix(const ModeEnsemble& e) {
    const Eigen::Index n = static_cast<Eigen::Index>(e.size());
    Eigen::MatrixXd Gamma = Eigen::MatrixXd::Zero(n + 1, n + 1);
    Gamma(0, 0) = e.gamma_r;
    for (Eigen::Index i = 0; i < n; ++i) {
        const ChaoticMode& m = e.modes[static_cast<std::size_t>(i)];
        Gamma(0, i + 1) = -m.g;
        Gamma(i + 1, 0) = m.g;
        Gamma(i + 1, i + 1) = m.gamma;
    }
    return Gamma;
}

} // namespace

SpectrumResult secular_roots(const ModeEnsemble& ensemble) {
    ensemble.validate();
    double G = 0.0;
    for (const ChaoticMode& m : ensemble.modes)
        G += m.g * m.g / (m.gamma * ensemble.gamma_r);

    SpectrumResult res;
    res.lambda_regular_firstorder = ensemble.gamma_r * (1.0 + G);

    Eigen::EigenSolver<Eigen::MatrixXd> es(decay_matrix(ensemble));
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        res.dense.push_back(es.eigenvalues()(i));
    std::sort(res.dense.begin(), res.dense.end(),
              [](Complex a, Complex b) { return a.real() < b.real(); });

    std::vector<double> poles;
    poles.reserve(ensemble.size());
    for (const ChaoticMode& m : ensemble.modes) poles.push_back(m.gamma);
    std::sort(poles.begin(), poles.end());

    bool degenerate = false;
    for (std::size_t i = 1; i < poles.size(); ++i)
        if (poles[i] - poles[i - 1] <= 1e-12 * poles[i]) degenerate = true;

    if (degenerate) {
        res.degenerate_fallback = true;
        for (const Complex& ev : res.dense) res.secular.push_back(ev.real());
    } else {
        auto s = [&](double x) { return secular_fn(ensemble, x); };
        auto sp = [&](double x) { return secular_deriv(ensemble, x); };

        // Below the lowest pole s(0) > 0 and s -> +inf at the pole; a dip of
        // the convex secular function carries zero or two roots (the root
        // near gamma_r(1+G) and one just under the lowest pole).
        if (sp(0.0) < 0.0) {
            const double lo = off_pole(ensemble, poles.front(), 0.0, false);
            const double lambda_min = bisect(sp, 0.0, lo);
            if (s(lambda_min) < 0.0) {
                res.secular.push_back(bisect(s, 0.0, lambda_min));
                res.secular.push_back(bisect(s, lambda_min, lo));
            }
        }
        // One root between each pair of adjacent poles (s runs -inf -> +inf).
        for (std::size_t i = 0; i + 1 < poles.size(); ++i) {
            const double a = off_pole(ensemble, poles[i], poles[i + 1], true);
            const double b = off_pole(ensemble, poles[i + 1], poles[i], false);
            if (a < b) res.secular.push_back(bisect(s, a, b));
        }
        // Above the highest pole s is concave with s -> -inf at both ends;
        // roots appear there only outside the over-damped regime.
        {
            const double span = poles.back() + ensemble.gamma_r;
            const double a = off_pole(ensemble, poles.back(), 2.0 * span, true);
            if (sp(a) > 0.0) {
                double b = poles.back() + span;
                while (sp(b) > 0.0) b += span;
                const double lambda_max = bisect(sp, a, b);
                if (s(lambda_max) > 0.0) {
                    res.secular.push_back(bisect(s, a, lambda_max));
                    res.secular.push_back(bisect(s, lambda_max, b));
                }
            }
        }
        std::sort(res.secular.begin(), res.secular.end());
    }

    if (res.secular.empty())
        throw DegenerateRatesError("no real secular roots found");
    res.lambda_regular_exact = *std::min_element(
        res.secular.begin(), res.secular.end(), [&](double a, double b) {
            return std::abs(a - ensemble.gamma_r) < std::abs(b - ensemble.gamma_r);
        });
    return res;
}

ModifiedRegularMode modified_regular_mode(const ModeEnsemble& ensemble) {
    ensemble.validate();
    const Eigen::Index n = static_cast<Eigen::Index>(ensemble.size());

    ModifiedRegularMode out;
    out.first_order = Eigen::VectorXd(n + 1);
    out.first_order(0) = 1.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const ChaoticMode& m = ensemble.modes[static_cast<std::size_t>(i)];
        out.first_order(i + 1) = -m.g / m.gamma;
    }

    Eigen::EigenSolver<Eigen::MatrixXd> es(decay_matrix(ensemble));
    Eigen::Index best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        const double dist = std::abs(es.eigenvalues()(i) - Complex(ensemble.gamma_r, 0.0));
        if (dist < best_dist) {
            best_dist = dist;
            best = i;
        }
    }
    Eigen::VectorXcd vec = es.eigenvectors().col(best);
    vec /= vec(0);
    out.exact = vec.real();

    out.max_component_diff = (out.exact - out.first_order).cwiseAbs().maxCoeff();
    return out;
}

} // namespace cavity
