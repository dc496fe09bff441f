#ifndef CAVITY_STEADY_STATE_HPP
#define CAVITY_STEADY_STATE_HPP

#include <utility>
#include <vector>

#include "cavity/modes.hpp"

namespace cavity {

enum class SolveMode {
    ExactClosedForm,
    ApproximateFirstOrder,
    LinearSolveOracle,
};

struct SteadyState {
    Complex E_r{0.0, 0.0};
    std::vector<Complex> E_n;
    Complex E_p{0.0, 0.0};
    double I_r = 0.0;
    double I_p = 0.0;
    SolveMode mode = SolveMode::ExactClosedForm;

    /// Per-mode magnitude of the neglected bracket |E_n0 * Gscr - E_p0 * Gscr_n|.
    /// Filled only by steady_state_first_order.
    std::vector<double> bracket_diagnostic;
};

/// Exact closed-form steady state: E_r from the resummed expression and
/// E_n = E_n0 - (g_n/gamma_n) E_r, which together solve the stationary
/// coupled-mode equations exactly.
SteadyState steady_state_exact(const ModeEnsemble& ensemble, const PumpDrive& drive);

/// Approximate steady state with the small inter-mode bracket dropped:
/// E_n = E_n0/(1+Gscr), E_p = E_p0/(1+Gscr). The dropped bracket magnitude
/// is reported per mode as a diagnostic.
SteadyState steady_state_first_order(const ModeEnsemble& ensemble, const PumpDrive& drive);

/// Direct dense solve of the (N+1)x(N+1) complex stationary system; serves
/// as the oracle for both closed forms. Throws SingularMatrixError on a
/// degenerate parameter set.
SteadyState steady_state_linear_solve(const ModeEnsemble& ensemble, const PumpDrive& drive);

/// Maximum relative residual of the stationary equations, scaled by the
/// drive strength max|a_n E0|.
double steady_state_residual(const ModeEnsemble& ensemble, const PumpDrive& drive,
                             const SteadyState& state);

/// Closed-form intensities at normalized detuning delta:
///   I_r = I_p0 (gamma_p/gamma_r) G / ((1+G)^2 + delta^2)
///   I_p = I_p0 (1 + delta^2) / ((1+G)^2 + delta^2)
std::pair<double, double> intensities(const DerivedParams& params, double delta);

/// Unity-peak-normalized Lorentzian lineshape (1+G)^2 / (delta^2 + (1+G)^2).
double lineshape(const DerivedParams& params, double delta);

/// Lineshape averaged over a Lorentzian pump spectrum of width gamma_L.
/// Closed form of the two-Lorentzian convolution:
///   (1+G) * Gs / (delta^2 + Gs^2), Gs = (1+G) + gamma_L/gamma_r.
double lineshape_convolved(const DerivedParams& params, double delta,
                           double gamma_L_over_gamma_r);

/// Relative pumping efficiency
///   eps(delta) = [1 - alpha L] + (gamma_p beta_r)/(gamma_r' beta_p) alpha' L
/// with L the convolved lineshape, covering the monochromatic and broad-pump
/// limits in one expression. beta_p must be > 0.
double efficiency(const DerivedParams& params, double delta, double beta_p,
                  double beta_r, double gamma_L);

} // namespace cavity

#endif
