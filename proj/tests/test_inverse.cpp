#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cavity/inverse.hpp"

using namespace cavity;

namespace {

Measurement forward_measurement(double gamma_r, double G, double gamma_p,
                                double beta_ratio, double gamma_L) {
    Measurement m;
    m.mode_label = "synthetic";
    m.gamma_r_prime = {gamma_r * (1.0 + G), 0.0};
    m.gamma_p = {gamma_p, 0.0};
    m.beta_r = {beta_ratio, 0.0};
    m.beta_p = {1.0, 0.0};
    m.gamma_L = gamma_L;
    m.epsilon0 = {efficiency_on_resonance(G, m.gamma_r_prime.value, gamma_p,
                                          beta_ratio, gamma_L),
                  0.0};
    return m;
}

} // namespace

TEST_CASE("round trip: extraction inverts the forward efficiency model") {
    const double gamma_r = 1.7e9;
    const double gamma_p = 1.7e12;
    for (double G : {0.01, 0.05, 0.1, 0.19, 0.3, 0.5, 0.75, 0.9}) {
        for (double gamma_L : {0.0, 100.0 * gamma_r * (1.0 + G)}) {
            const Measurement m = forward_measurement(gamma_r, G, gamma_p, 1.0, gamma_L);
            const ExtractedParams out = extract(m);
            CHECK(out.G.value == doctest::Approx(G).epsilon(1e-9));
            CHECK(out.gamma_r.value == doctest::Approx(gamma_r).epsilon(1e-9));
            // gamma_r (1+G) = gamma_r' by construction
            CHECK(out.gamma_r.value * (1.0 + out.G.value) ==
                  doctest::Approx(m.gamma_r_prime.value).epsilon(1e-12));
            CHECK(out.g_bar.value ==
                  doctest::Approx(std::sqrt(gamma_p * gamma_r * G)).epsilon(1e-9));
            CHECK(out.extra_G_roots.empty());
        }
    }
}

TEST_CASE("unit efficiency with no regular overlap is the uncoupled branch") {
    Measurement m;
    m.epsilon0 = {1.0, 0.0};
    m.gamma_r_prime = {2.0e9, 0.0};
    m.beta_r = {0.0, 0.0};
    m.beta_p = {1.0, 0.0};
    m.gamma_p = {1.7e12, 0.0};
    m.gamma_L = 0.0;
    const ExtractedParams out = extract(m);
    CHECK(out.G.value == 0.0);
    CHECK(out.gamma_r.value == doctest::Approx(2.0e9).epsilon(1e-14));
    CHECK(out.g_bar.value == 0.0);
    CHECK(out.alpha.value == 0.0);
    CHECK(out.alpha_prime.value == 0.0);
}

TEST_CASE("efficiency is strictly increasing in the overlap ratio") {
    double prev = -1e300;
    for (double ratio : {0.0, 0.1, 0.5, 1.0, 2.0, 10.0}) {
        const double eps = efficiency_on_resonance(0.4, 7.9e9, 1.7e12, ratio, 1e9);
        CHECK(eps > prev);
        prev = eps;
    }
}

TEST_CASE("unattainable efficiencies have no root") {
    Measurement m = forward_measurement(1.7e9, 0.19, 1.7e12, 1.0, 0.0);
    m.epsilon0 = {1e9, 0.0}; // far above the G <= 100 ceiling
    CHECK_THROWS_AS((void)extract(m), NoRootError);
}

TEST_CASE("microcavity linewidth row: G = 0.75 at gamma_r' = 7.9e9") {
    // Forward-generate the efficiency, then check the derived columns against
    // the printed values (+-1 unit in the last digit).
    Measurement m = forward_measurement(7.9e9 / 1.75, 0.75, 1.7e12, 1.0, 0.0);
    m.mode_label = "2";
    const ExtractedParams out = extract(m);
    CHECK(out.G.value == doctest::Approx(0.75).epsilon(1e-9));
    CHECK(std::abs(out.gamma_r.value - 4.5e9) < 0.1e9);
    CHECK(std::abs(out.alpha.value - 0.67) < 0.01);
    CHECK(std::abs(out.alpha_prime.value - 0.43) < 0.01);
    CHECK(std::abs(out.gamma_rG.value - 3.4e9) < 0.1e9);
    CHECK(std::abs(out.g_bar.value - 7.6e10) < 0.1e10);
}

TEST_CASE("derived columns reproduce printed rows") {
    SUBCASE("gamma_r = 1.9e11, G = 0.36") {
        const DerivedColumns c = derived_columns(1.9e11, 0.36, 1.7e12);
        CHECK(std::abs(c.gamma_r_prime - 260e9) < 10e9);
        CHECK(std::abs(c.alpha - 0.46) < 0.01);
        CHECK(std::abs(c.alpha_prime - 0.26) < 0.01);
        CHECK(std::abs(c.g_bar - 34e10) < 1e10);
    }
    SUBCASE("gamma_r = 4.4e11, G = 0.80") {
        const DerivedColumns c = derived_columns(4.4e11, 0.80, 1.7e12);
        CHECK(std::abs(c.gamma_r_prime - 790e9) < 10e9);
        CHECK(std::abs(c.alpha - 0.69) < 0.01);
        CHECK(std::abs(c.alpha_prime - 0.44) < 0.01);
        CHECK(std::abs(c.gamma_rG - 350e9) < 10e9);
        CHECK(std::abs(c.g_bar - 77e10) < 1e10);
    }
    SUBCASE("G = 0") {
        const DerivedColumns c = derived_columns(1e9, 0.0, 1.7e12);
        CHECK(c.alpha == 0.0);
        CHECK(c.alpha_prime == 0.0);
        CHECK(c.gamma_r_prime == 1e9);
        CHECK(c.g_bar == 0.0);
    }
}

TEST_CASE("Monte Carlo uncertainty propagation") {
    SUBCASE("zero input sigma gives zero output sigma") {
        const Measurement m = forward_measurement(1.7e9, 0.19, 1.7e12, 1.0, 0.0);
        const ExtractedParams out = propagate_uncertainty(m, 2000, 7);
        CHECK(out.G.sigma == 0.0);
        CHECK(out.gamma_r.sigma == 0.0);
        CHECK(out.g_bar.sigma == 0.0);
        CHECK(out.rejection_fraction == 0.0);
    }
    SUBCASE("identity path: output sigma tracks input sigma") {
        // With epsilon0 = 1 and beta_r = 0 the extraction is the identity
        // gamma_r = gamma_r', so the sampled spread passes straight through.
        Measurement m;
        m.epsilon0 = {1.0, 0.0};
        m.gamma_r_prime = {1.0e9, 1.0e7};
        m.beta_r = {0.0, 0.0};
        m.beta_p = {1.0, 0.0};
        m.gamma_p = {1.7e12, 0.0};
        const int n = 20000;
        const ExtractedParams out = propagate_uncertainty(m, n, 99);
        CHECK(std::abs(out.gamma_r.sigma - 1.0e7) / 1.0e7 < 3.0 / std::sqrt(double(n)));
        CHECK(out.G.sigma == 0.0);
    }
    SUBCASE("deterministic for a fixed seed") {
        Measurement m = forward_measurement(1.7e9, 0.19, 1.7e12, 1.0, 0.0);
        m.epsilon0.sigma = 0.05 * m.epsilon0.value;
        m.gamma_r_prime.sigma = 0.05 * m.gamma_r_prime.value;
        const ExtractedParams a = propagate_uncertainty(m, 3000, 1234);
        const ExtractedParams b = propagate_uncertainty(m, 3000, 1234);
        CHECK(a.G.sigma == b.G.sigma);
        CHECK(a.gamma_r.sigma == b.gamma_r.sigma);
        const ExtractedParams c = propagate_uncertainty(m, 3000, 1235);
        CHECK(a.G.sigma != c.G.sigma);
    }
    SUBCASE("low-G mode with realistic errors: relative sigma_G of order one half") {
        // epsilon0 tuned so the central solution sits at G = 0.19.
        Measurement m = forward_measurement(2.0e9 / 1.19, 0.19, 1.7e12, 1.0 / 5.59, 0.0);
        m.epsilon0.sigma = 4.0 / 25.0 * m.epsilon0.value;
        m.gamma_r_prime.sigma = 0.1e9;
        m.beta_r.sigma = 0.05 * m.beta_r.value;
        m.gamma_p.sigma = 0.2e12;
        const ExtractedParams out = propagate_uncertainty(m, 5000, 42);
        const double rel = out.G.sigma / out.G.value;
        CHECK(rel > 0.1);
        CHECK(rel < 1.5);
    }
}

TEST_CASE("pump-mode decay-rate consistency across modes") {
    SUBCASE("printed five-mode table clusters near 1.7e12") {
        const std::vector<GbarTunnelingRow> rows = {
            {2.3e10, 0.32e9}, {7.6e10, 3.4e9}, {8.7e10, 4.5e9},
            {34e10, 68e9},    {77e10, 350e9},
        };
        const GammaPConsistency c = gamma_p_consistency(rows);
        REQUIRE(c.per_mode.size() == 5);
        CHECK(std::abs(c.per_mode[0] - 1.65e12) < 0.01e12);
        CHECK(std::abs(c.per_mode[1] - 1.70e12) < 0.01e12);
        CHECK(std::abs(c.per_mode[2] - 1.68e12) < 0.01e12);
        CHECK(std::abs(c.per_mode[3] - 1.70e12) < 0.01e12);
        CHECK(std::abs(c.per_mode[4] - 1.69e12) < 0.01e12);
        CHECK(c.relative_spread < 0.03);
        CHECK(c.mean == doctest::Approx(1.7e12).epsilon(0.02));
    }
    SUBCASE("identical rows have zero spread") {
        const GammaPConsistency c =
            gamma_p_consistency({{5e10, 2e9}, {5e10, 2e9}});
        CHECK(c.relative_spread == 0.0);
    }
    SUBCASE("synthetic rows recover a common rate exactly") {
        const double gamma_p = 3.1e12;
        std::vector<GbarTunnelingRow> rows;
        for (double gamma_rG : {1e9, 5e9, 4e10}) {
            rows.push_back({std::sqrt(gamma_p * gamma_rG), gamma_rG});
        }
        const GammaPConsistency c = gamma_p_consistency(rows);
        for (double v : c.per_mode) CHECK(v == doctest::Approx(gamma_p).epsilon(1e-12));
        CHECK(c.relative_spread < 1e-12);
    }
    SUBCASE("needs at least two rows") {
        CHECK_THROWS_AS((void)gamma_p_consistency({{5e10, 2e9}}), ConfigError);
    }
}

TEST_CASE("measurement validation") {
    Measurement m = forward_measurement(1.7e9, 0.19, 1.7e12, 1.0, 0.0);
    Measurement bad = m;
    bad.beta_p.value = 0.0;
    CHECK_THROWS_AS(bad.validate(), InvalidOverlapError);
    bad = m;
    bad.epsilon0.value = -1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = m;
    bad.gamma_L = -1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}
