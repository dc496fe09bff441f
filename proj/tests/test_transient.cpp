#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cavity/spectral.hpp"
#include "cavity/steady_state.hpp"
#include "cavity/transient.hpp"
#include "support.hpp"

using namespace cavity;
using cavity::test::single_mode_case;

namespace {
const PumpDrive kUnitDrive{};
}

TEST_CASE("envelope integration relaxes to the closed-form steady state") {
    const auto traj = integrate_envelopes(single_mode_case(), kUnitDrive, 20.0);
    const SteadyState ss = steady_state_exact(single_mode_case(), kUnitDrive);
    const TrajectoryPoint& last = traj.back();
    CHECK(last.t == doctest::Approx(20.0));
    CHECK(std::abs(last.E_r - ss.E_r) < 1e-6);
    CHECK(std::abs(last.E_n[0] - ss.E_n[0]) < 1e-6);
    CHECK(std::abs(last.E_r - ss.E_r) / std::abs(ss.E_r) < 1e-6);
}

TEST_CASE("pure decay from a bright start") {
    ModeEnsemble e = single_mode_case();
    e.modes[0].g = 0.0;
    PumpDrive dark;
    dark.E0 = {0.0, 0.0};
    dark.delta = 0.0;
    std::vector<Complex> init(e.size() + 1, Complex{0.0, 0.0});
    init[0] = {1.0, 0.0};
    const auto traj = integrate_envelopes(e, dark, 1.0, {}, init);
    // |E_r(1/gamma_r)| = exp(-1)
    CHECK(std::abs(traj.back().E_r) == doctest::Approx(std::exp(-1.0)).epsilon(1e-6));
}

TEST_CASE("coupled free decay shows the enhanced rate gamma_r (1+G)") {
    ModeEnsemble e = single_mode_case();
    PumpDrive off;
    off.E0 = {0.0, 0.0};
    std::vector<Complex> init(e.size() + 1, Complex{0.0, 0.0});
    init[0] = {1.0, 0.0};
    IntegratorControl ctl;
    ctl.abs_tol = 1e-16; // amplitudes reach ~1e-7 inside the fit window
    const auto traj = integrate_envelopes(e, off, 12.0, ctl, init);
    const double rate = fit_decay_rate(traj, 4.0, 12.0);
    CHECK(rate == doctest::Approx(1.25).epsilon(0.01));
    // and within 1% of the exact secular eigenvalue
    const SpectrumResult spec = secular_roots(e);
    CHECK(rate == doctest::Approx(spec.lambda_regular_exact).epsilon(0.01));
}

TEST_CASE("stiff rate ratios integrate within budget") {
    ModeEnsemble e;
    e.gamma_r = 1.0;
    e.modes = {{1e3, 10.0, {1.0, 0.0}}, {5e3, 30.0, {0.3, 0.2}}, {1e4, 50.0, {-0.5, 0.0}}};
    PumpDrive d;
    d.delta = 0.4;
    const auto traj = integrate_envelopes(e, d, 25.0);
    const SteadyState ss = steady_state_exact(e, d);
    CHECK(std::abs(traj.back().E_r - ss.E_r) / std::abs(ss.E_r) < 1e-6);
    CHECK(traj.size() < 100000); // adaptive steps, not gamma_n-limited
    for (std::size_t i = 1; i < traj.size(); ++i)
        CHECK(traj[i].t > traj[i - 1].t);
}

TEST_CASE("rate-equation steady states") {
    // gamma_c=100, gamma_r=1, g=5 => G=0.25; R=200 => I_c0=1.
    SUBCASE("constant pump closed form") {
        const RateState s = rate_steady_state(100.0, 1.0, 5.0, 200.0, PumpModel::ConstantR);
        CHECK(s.I_c == doctest::Approx(1.25 / 1.5).epsilon(1e-13));
        CHECK(s.I_r == doctest::Approx(100.0 * 0.25 / 1.5).epsilon(1e-13));
        // balance R = 2 gamma_c I_c + 2 gamma_r I_r
        CHECK(200.0 * s.I_c + 2.0 * s.I_r == doctest::Approx(200.0).epsilon(1e-13));
    }
    SUBCASE("corrected pump closed form") {
        const RateState s = rate_steady_state(100.0, 1.0, 5.0, 200.0, PumpModel::CorrectedR);
        CHECK(s.I_c == doctest::Approx(1.0 / 1.5).epsilon(1e-13));
        CHECK(s.I_r == doctest::Approx(100.0 * 0.25 / (1.25 * 1.5)).epsilon(1e-13));
    }
    SUBCASE("ODE integration lands on the closed form") {
        for (PumpModel model : {PumpModel::ConstantR, PumpModel::CorrectedR}) {
            const RateState ode = integrate_rate_equations(100.0, 1.0, 5.0, 200.0, model, 20.0);
            const RateState cf = rate_steady_state(100.0, 1.0, 5.0, 200.0, model);
            CHECK(ode.I_c == doctest::Approx(cf.I_c).epsilon(1e-6));
            CHECK(ode.I_r == doctest::Approx(cf.I_r).epsilon(1e-6));
        }
    }
    SUBCASE("no coupling") {
        const RateState s = rate_steady_state(100.0, 1.0, 0.0, 200.0, PumpModel::ConstantR);
        CHECK(s.I_c == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(s.I_r == 0.0);
    }
}

TEST_CASE("corrected-pump rate model reconciles with coupled-mode intensities") {
    const double gamma_c = 1000.0, gamma_r = 1.0;
    for (double G : {0.001, 0.005, 0.01}) {
        const double g = std::sqrt(G * gamma_c * gamma_r);
        ModeEnsemble e;
        e.gamma_r = gamma_r;
        e.modes = {{gamma_c, g, {1.0, 0.0}}};
        const DerivedParams p = derive_params(e, kUnitDrive);
        const auto [I_r_cm, I_p_cm] = intensities(p, 0.0);
        const double I_c0 = p.I_p0;
        const RateState s = rate_steady_state(gamma_c, gamma_r, g, 2.0 * gamma_c * I_c0,
                                              PumpModel::CorrectedR);
        // I_c agrees at O(G^2): the ratio is (1+G)^2/(1+2G) = 1 + G^2/(1+2G).
        CHECK(std::abs(s.I_c - I_p_cm) / I_p_cm < 10.0 * G * G);
        // I_r differs at O(G): the ratio is (1+G)/(1+2G) = 1 - G/(1+2G), so
        // only a linear-in-G bound is attainable.
        CHECK(std::abs(s.I_r - I_r_cm) / I_r_cm < 3.0 * G);
        CHECK(std::abs(s.I_r - I_r_cm) / I_r_cm > 0.5 * G);
    }
}

TEST_CASE("energy balance at the exact steady state") {
    SUBCASE("single-mode value") {
        const EnergyBalance eb = energy_balance_report(single_mode_case(), kUnitDrive);
        CHECK(eb.pumping == doctest::Approx(0.016).epsilon(1e-12));
        CHECK(eb.total_loss == doctest::Approx(0.016).epsilon(1e-12));
        REQUIRE(eb.two_mode_prediction.has_value());
        CHECK(*eb.two_mode_prediction == doctest::Approx(0.016).epsilon(1e-12));
    }
    SUBCASE("uncoupled limit: pumping = 2 gamma_c I_c0") {
        ModeEnsemble e = single_mode_case();
        e.modes[0].g = 0.0;
        const EnergyBalance eb = energy_balance_report(e, kUnitDrive);
        CHECK(eb.pumping == doctest::Approx(2.0 * 100.0 * 1e-4).epsilon(1e-12));
    }
    SUBCASE("random ensembles conserve energy") {
        std::mt19937_64 rng(11);
        for (int trial = 0; trial < 100; ++trial) {
            const ModeEnsemble e = cavity::test::random_ensemble(rng, 10);
            EnergyBalance eb;
            try {
                eb = energy_balance_report(e, kUnitDrive);
            } catch (const ZeroPumpError&) {
                continue;
            }
            CHECK(std::abs(eb.pumping - eb.total_loss) / std::abs(eb.pumping) < 1e-10);
        }
    }
    SUBCASE("off resonance rejected") {
        PumpDrive d;
        d.delta = 0.5;
        CHECK_THROWS(energy_balance_report(single_mode_case(), d));
    }
}

TEST_CASE("pump_work along the trajectory converges to the dissipation") {
    const auto traj = integrate_envelopes(single_mode_case(), kUnitDrive, 30.0);
    const EnergyBalance eb = energy_balance_report(single_mode_case(), kUnitDrive);
    CHECK(traj.back().pump_work == doctest::Approx(eb.pumping).epsilon(1e-6));
}
