#ifndef CAVITY_TRANSIENT_HPP
#define CAVITY_TRANSIENT_HPP

#include <optional>
#include <vector>

#include "cavity/modes.hpp"

namespace cavity {

struct TrajectoryPoint {
    double t = 0.0;
    Complex E_r{0.0, 0.0};
    std::vector<Complex> E_n;
    double I_r = 0.0;
    double I_c_total = 0.0;
    /// Instantaneous pumping term 2 Re[sum a_n E0 conj(E_n)].
    double pump_work = 0.0;
};

struct IntegratorControl {
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
    double initial_step = 0.0; // 0 = auto
    std::size_t max_steps = 2'000'000;
};

/// Integrates the coupled envelope equations
///   dE_n/dt = a_n E0 - gamma_n E_n - g_n E_r
///   dE_r/dt = -(gamma_r + i Delta) E_r + sum g_n E_n
/// from a dark cavity (or the given initial state) with an adaptive L-stable
/// TR-BDF2 scheme. The system is stiff: gamma_n/gamma_r can span several
/// decades. Throws StiffnessError when step control collapses.
std::vector<TrajectoryPoint> integrate_envelopes(
    const ModeEnsemble& ensemble, const PumpDrive& drive, double t_end,
    const IntegratorControl& control = {},
    const std::optional<std::vector<Complex>>& initial_regular_first = std::nullopt);

/// Least-squares log-slope of |E_r(t)| over t in [t_lo, t_hi]; the fitted
/// decay rate of the regular-mode envelope.
double fit_decay_rate(const std::vector<TrajectoryPoint>& traj, double t_lo, double t_hi);

enum class PumpModel {
    ConstantR,
    CorrectedR, // R -> 2 gamma_c I_c0 / (1+G)
};

struct RateState {
    double I_c = 0.0;
    double I_r = 0.0;
    double pump_mode_rate = 0.0; // the effective R actually applied
    PumpModel pump_model = PumpModel::ConstantR;
};

/// Closed-form steady state of the two-mode intensity rate equations.
/// Constant R:  I_c = I_c0 (1+G)/(1+2G), I_r = I_c0 (gamma_c/gamma_r) G/(1+2G)
/// Corrected R: I_c = I_c0 /(1+2G),      I_r = I_c0 (gamma_c/gamma_r) G/((1+G)(1+2G))
/// with I_c0 = R/(2 gamma_c) and G = g^2/(gamma_c gamma_r).
RateState rate_steady_state(double gamma_c, double gamma_r, double g, double R,
                            PumpModel model);

/// Time integration of the same rate equations from I_c = I_r = 0 up to t_end.
RateState integrate_rate_equations(double gamma_c, double gamma_r, double g, double R,
                                   PumpModel model, double t_end,
                                   const IntegratorControl& control = {});

struct EnergyBalance {
    double pumping = 0.0;    // 2 Re[sum a_n E0 conj(E_n)]
    double loss_chaotic = 0.0;
    double loss_regular = 0.0;
    double total_loss = 0.0;
    /// For the two-mode case, 2 gamma_c I_c0 / (1+G); absent otherwise.
    std::optional<double> two_mode_prediction;
};

/// On-resonance steady-state energy balance: the pumping term must equal the
/// total dissipation.
EnergyBalance energy_balance_report(const ModeEnsemble& ensemble, const PumpDrive& drive);

} // namespace cavity

#endif
