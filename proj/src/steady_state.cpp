#include "cavity/steady_state.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace cavity {

namespace {

Complex gamma_r_plus_iDelta(const ModeEnsemble& e, const PumpDrive& d) {
    return {e.gamma_r, d.delta * e.gamma_r};
}

Complex project_onto_pump(const std::vector<Complex>& E_n, const DerivedParams& p) {
    // E_p = sum_n E_n conj(E_n0) / E_p0
    Complex acc{0.0, 0.0};
    for (std::size_t i = 0; i < E_n.size(); ++i)
        acc += E_n[i] * std::conj(p.E_n0[i]);
    return acc / p.E_p0;
}

} // namespace

SteadyState steady_state_exact(const ModeEnsemble& ensemble, const PumpDrive& drive) {
    const DerivedParams p = derive_params(ensemble, drive);
    const Complex denom = gamma_r_plus_iDelta(ensemble, drive);
    const Complex Gscr = ensemble.gamma_r * p.G / denom;

    SteadyState s;
    s.mode = SolveMode::ExactClosedForm;
    s.E_r = p.g_bar * p.E_p0 / (denom * (1.0 + Gscr));
    s.E_n.reserve(ensemble.size());
    for (std::size_t i = 0; i < ensemble.size(); ++i) {
        const ChaoticMode& m = ensemble.modes[i];
        s.E_n.push_back(p.E_n0[i] - (m.g / m.gamma) * s.E_r);
    }
    s.E_p = project_onto_pump(s.E_n, p);
    s.I_r = std::norm(s.E_r);
    s.I_p = std::norm(s.E_p);
    return s;
}

SteadyState steady_state_first_order(const ModeEnsemble& ensemble, const PumpDrive& drive) {
    const DerivedParams p = derive_params(ensemble, drive);
    const Complex denom = gamma_r_plus_iDelta(ensemble, drive);
    const Complex Gscr = ensemble.gamma_r * p.G / denom;

    SteadyState s;
    s.mode = SolveMode::ApproximateFirstOrder;
    s.E_r = p.g_bar * p.E_p0 / (denom * (1.0 + Gscr));
    s.E_n.reserve(ensemble.size());
    s.bracket_diagnostic.reserve(ensemble.size());
    for (std::size_t i = 0; i < ensemble.size(); ++i) {
        const ChaoticMode& m = ensemble.modes[i];
        s.E_n.push_back(p.E_n0[i] / (1.0 + Gscr));
        const Complex Gscr_n = m.g * p.g_bar / (m.gamma * denom);
        s.bracket_diagnostic.push_back(std::abs(p.E_n0[i] * Gscr - p.E_p0 * Gscr_n));
    }
    s.E_p = p.E_p0 / (1.0 + Gscr);
    s.I_r = std::norm(s.E_r);
    s.I_p = std::norm(s.E_p);
    return s;
}

SteadyState steady_state_linear_solve(const ModeEnsemble& ensemble, const PumpDrive& drive) {
    const DerivedParams p = derive_params(ensemble, drive);
    const std::size_t n = ensemble.size();

    // Row/col 0 is the regular mode, rows 1..N the chaotic modes.
    Eigen::MatrixXcd Gamma = Eigen::MatrixXcd::Zero(n + 1, n + 1);
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n + 1);
    Gamma(0, 0) = gamma_r_plus_iDelta(ensemble, drive);
    for (std::size_t i = 0; i < n; ++i) {
        const ChaoticMode& m = ensemble.modes[i];
        Gamma(0, i + 1) = -m.g;
        Gamma(i + 1, 0) = m.g;
        Gamma(i + 1, i + 1) = m.gamma;
        rhs(static_cast<Eigen::Index>(i + 1)) = m.a * drive.E0;
    }

    Eigen::FullPivLU<Eigen::MatrixXcd> lu(Gamma);
    if (!lu.isInvertible())
        throw SingularMatrixError("stationary coupling matrix is singular");
    const Eigen::VectorXcd sol = lu.solve(rhs);

    SteadyState s;
    s.mode = SolveMode::LinearSolveOracle;
    s.E_r = sol(0);
    s.E_n.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        s.E_n.push_back(sol(static_cast<Eigen::Index>(i + 1)));
    s.E_p = project_onto_pump(s.E_n, p);
    s.I_r = std::norm(s.E_r);
    s.I_p = std::norm(s.E_p);
    return s;
}

double steady_state_residual(const ModeEnsemble& ensemble, const PumpDrive& drive,
                             const SteadyState& state) {
    double scale = 0.0;
    for (const ChaoticMode& m : ensemble.modes)
        scale = std::max(scale, std::abs(m.a * drive.E0));
    if (scale == 0.0) scale = 1.0;

    double worst = 0.0;
    Complex sum_g_En{0.0, 0.0};
    for (std::size_t i = 0; i < ensemble.size(); ++i) {
        const ChaoticMode& m = ensemble.modes[i];
        const Complex res = m.a * drive.E0 - m.gamma * state.E_n[i] - m.g * state.E_r;
        worst = std::max(worst, std::abs(res));
        sum_g_En += m.g * state.E_n[i];
    }
    const Complex res_r = sum_g_En - gamma_r_plus_iDelta(ensemble, drive) * state.E_r;
    worst = std::max(worst, std::abs(res_r));
    return worst / scale;
}

std::pair<double, double> intensities(const DerivedParams& params, double delta) {
    const double onepG = 1.0 + params.G;
    const double denom = onepG * onepG + delta * delta;
    const double gamma_p = params.gamma_p.value_or(0.0); // G = 0 when absent
    const double I_r = params.I_p0 * (gamma_p / params.gamma_r) * params.G / denom;
    const double I_p = params.I_p0 * (1.0 + delta * delta) / denom;
    return {I_r, I_p};
}

double lineshape(const DerivedParams& params, double delta) {
    const double onepG = 1.0 + params.G;
    return onepG * onepG / (delta * delta + onepG * onepG);
}

double lineshape_convolved(const DerivedParams& params, double delta,
                           double gamma_L_over_gamma_r) {
    if (gamma_L_over_gamma_r < 0.0)
        throw InvalidEnsembleError("gamma_L/gamma_r must be >= 0");
    const double onepG = 1.0 + params.G;
    const double Gs = onepG + gamma_L_over_gamma_r;
    return onepG * Gs / (delta * delta + Gs * Gs);
}

double efficiency(const DerivedParams& params, double delta, double beta_p,
                  double beta_r, double gamma_L) {
    if (!(beta_p > 0.0))
        throw InvalidOverlapError("beta_p must be > 0");
    if (beta_r < 0.0)
        throw InvalidOverlapError("beta_r must be >= 0");
    const double L = lineshape_convolved(params, delta, gamma_L / params.gamma_r);
    double transfer = 0.0;
    if (params.gamma_p)
        transfer = (*params.gamma_p * beta_r) / (params.gamma_r_prime * beta_p) *
                   params.alpha_prime * L;
    return (1.0 - params.alpha * L) + transfer;
}

} // namespace cavity
