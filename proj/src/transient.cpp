#include "cavity/transient.hpp"

#include "cavity/steady_state.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>

namespace cavity {

namespace {

// TR-BDF2 (gamma = 2 - sqrt(2)): L-stable, both stages share the same
// implicit matrix I + d*h*M with d = 1 - sqrt(2)/2.
constexpr double kD = 0.29289321881345248; // 1 - 1/sqrt(2)
const double kC1 = (std::sqrt(2.0) + 1.0) / 2.0;
const double kC2 = -(std::sqrt(2.0) - 1.0) / 2.0;

using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;

struct LinearSystem {
    Mat M;
    Vec b;
};

Vec trbdf2_step(const LinearSystem& sys, const Eigen::PartialPivLU<Mat>& lu,
                double h, const Vec& y) {
    const Vec rhs_tr = y - kD * h * (sys.M * y) + 2.0 * kD * h * sys.b;
    const Vec y_mid = lu.solve(rhs_tr);
    const Vec rhs_bdf = kC1 * y_mid + kC2 * y + kD * h * sys.b;
    return lu.solve(rhs_bdf);
}

/// Adaptive integration of y' = b - M y with step-doubling error control.
/// Calls on_accept(t, y) after every accepted step (and once at t = 0).
void integrate_linear(const LinearSystem& sys, Vec y, double t_end,
                      const IntegratorControl& control,
                      const std::function<void(double, const Vec&)>& on_accept) {
    const Eigen::Index n = y.size();
    const Mat identity = Mat::Identity(n, n);

    double rate_scale = 1.0;
    for (Eigen::Index i = 0; i < n; ++i)
        rate_scale = std::max(rate_scale, std::abs(sys.M(i, i)));

    double t = 0.0;
    double h = control.initial_step > 0.0 ? control.initial_step
                                          : std::min(t_end / 100.0, 0.1 / rate_scale);
    on_accept(t, y);

    std::size_t steps = 0;
    while (t < t_end) {
        if (++steps > control.max_steps)
            throw StiffnessError("step budget exhausted before t_end");
        h = std::min(h, t_end - t);
        if (h < t_end * 1e-15)
            throw StiffnessError("step size underflow; pathological rate ratios");

        Eigen::PartialPivLU<Mat> lu_full(identity + (kD * h) * sys.M);
        Eigen::PartialPivLU<Mat> lu_half(identity + (kD * h / 2.0) * sys.M);

        const Vec y_big = trbdf2_step(sys, lu_full, h, y);
        const Vec y_half = trbdf2_step(sys, lu_half, h / 2.0, y);
        const Vec y_small = trbdf2_step(sys, lu_half, h / 2.0, y_half);

        double err = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double scale = control.abs_tol +
                control.rel_tol * std::max(std::abs(y_big(i)), std::abs(y_small(i)));
            err = std::max(err, std::abs(y_big(i) - y_small(i)) / (3.0 * scale));
        }

        if (err <= 1.0) {
            t += h;
            y = y_small;
            on_accept(t, y);
        }
        const double factor = err > 0.0 ? 0.9 * std::pow(err, -1.0 / 3.0) : 5.0;
        h *= std::clamp(factor, 0.2, 5.0);
    }
}

} // namespace

std::vector<TrajectoryPoint> integrate_envelopes(
    const ModeEnsemble& ensemble, const PumpDrive& drive, double t_end,
    const IntegratorControl& control,
    const std::optional<std::vector<Complex>>& initial_regular_first) {
    ensemble.validate();
    drive.validate();
    if (!(t_end > 0.0))
        throw InvalidEnsembleError("t_end must be > 0");

    const std::size_t n = ensemble.size();
    LinearSystem sys;
    sys.M = Mat::Zero(n + 1, n + 1);
    sys.b = Vec::Zero(n + 1);
    sys.M(0, 0) = Complex(ensemble.gamma_r, drive.delta * ensemble.gamma_r);
    for (std::size_t i = 0; i < n; ++i) {
        const ChaoticMode& m = ensemble.modes[i];
        sys.M(0, i + 1) = -m.g;
        sys.M(i + 1, 0) = m.g;
        sys.M(i + 1, i + 1) = m.gamma;
        sys.b(static_cast<Eigen::Index>(i + 1)) = m.a * drive.E0;
    }

    Vec y0 = Vec::Zero(n + 1);
    if (initial_regular_first) {
        if (initial_regular_first->size() != n + 1)
            throw InvalidEnsembleError("initial state must have N+1 entries");
        for (std::size_t i = 0; i <= n; ++i)
            y0(static_cast<Eigen::Index>(i)) = (*initial_regular_first)[i];
    }

    std::vector<TrajectoryPoint> traj;
    integrate_linear(sys, y0, t_end, control, [&](double t, const Vec& y) {
        TrajectoryPoint pt;
        pt.t = t;
        pt.E_r = y(0);
        pt.I_r = std::norm(y(0));
        pt.E_n.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            const Complex En = y(static_cast<Eigen::Index>(i + 1));
            pt.E_n.push_back(En);
            pt.I_c_total += std::norm(En);
            pt.pump_work += 2.0 * std::real(ensemble.modes[i].a * drive.E0 * std::conj(En));
        }
        traj.push_back(std::move(pt));
    });
    return traj;
}

double fit_decay_rate(const std::vector<TrajectoryPoint>& traj, double t_lo, double t_hi) {
    double sum_t = 0.0, sum_y = 0.0, sum_tt = 0.0, sum_ty = 0.0;
    std::size_t count = 0;
    for (const TrajectoryPoint& pt : traj) {
        if (pt.t < t_lo || pt.t > t_hi) continue;
        const double amp = std::abs(pt.E_r);
        if (amp <= 0.0) continue;
        const double y = std::log(amp);
        sum_t += pt.t;
        sum_y += y;
        sum_tt += pt.t * pt.t;
        sum_ty += pt.t * y;
        ++count;
    }
    if (count < 2)
        throw InvalidEnsembleError("too few trajectory points in fit window");
    const double nd = static_cast<double>(count);
    const double slope = (nd * sum_ty - sum_t * sum_y) / (nd * sum_tt - sum_t * sum_t);
    return -slope;
}

RateState rate_steady_state(double gamma_c, double gamma_r, double g, double R,
                            PumpModel model) {
    const double G = g * g / (gamma_c * gamma_r);
    const double I_c0 = R / (2.0 * gamma_c);
    RateState s;
    s.pump_model = model;
    if (model == PumpModel::ConstantR) {
        s.pump_mode_rate = R;
        s.I_c = I_c0 * (1.0 + G) / (1.0 + 2.0 * G);
        s.I_r = I_c0 * (gamma_c / gamma_r) * G / (1.0 + 2.0 * G);
    } else {
        s.pump_mode_rate = R / (1.0 + G);
        s.I_c = I_c0 / (1.0 + 2.0 * G);
        s.I_r = I_c0 * (gamma_c / gamma_r) * G / ((1.0 + G) * (1.0 + 2.0 * G));
    }
    return s;
}

RateState integrate_rate_equations(double gamma_c, double gamma_r, double g, double R,
                                   PumpModel model, double t_end,
                                   const IntegratorControl& control) {
    const double G = g * g / (gamma_c * gamma_r);
    const double R_eff = model == PumpModel::ConstantR ? R : R / (1.0 + G);

    LinearSystem sys;
    sys.M = Mat::Zero(2, 2);
    sys.b = Vec::Zero(2);
    sys.M(0, 0) = 2.0 * gamma_c * (1.0 + G);
    sys.M(0, 1) = -2.0 * gamma_r * G;
    sys.M(1, 0) = -2.0 * gamma_c * G;
    sys.M(1, 1) = 2.0 * gamma_r * (1.0 + G);
    sys.b(0) = R_eff;

    Vec y = Vec::Zero(2);
    Vec last = y;
    integrate_linear(sys, y, t_end, control, [&](double, const Vec& v) { last = v; });

    RateState s;
    s.pump_model = model;
    s.pump_mode_rate = R_eff;
    s.I_c = std::real(last(0));
    s.I_r = std::real(last(1));
    return s;
}

EnergyBalance energy_balance_report(const ModeEnsemble& ensemble, const PumpDrive& drive) {
    if (drive.delta != 0.0)
        throw InvalidEnsembleError("energy balance is defined on resonance (delta = 0)");

    const DerivedParams p = derive_params(ensemble, drive);
    const SteadyState ss = steady_state_exact(ensemble, drive);

    EnergyBalance eb;
    for (std::size_t i = 0; i < ensemble.size(); ++i) {
        const ChaoticMode& m = ensemble.modes[i];
        eb.pumping += 2.0 * std::real(m.a * drive.E0 * std::conj(ss.E_n[i]));
        eb.loss_chaotic += 2.0 * m.gamma * std::norm(ss.E_n[i]);
    }
    eb.loss_regular = 2.0 * ensemble.gamma_r * std::norm(ss.E_r);
    eb.total_loss = eb.loss_chaotic + eb.loss_regular;
    if (ensemble.size() == 1) {
        const double I_c0 = std::norm(p.E_n0[0]);
        eb.two_mode_prediction = 2.0 * ensemble.modes[0].gamma * I_c0 / (1.0 + p.G);
    }
    return eb;
}

} // namespace cavity
