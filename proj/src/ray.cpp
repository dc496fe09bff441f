#include "cavity/ray.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "cavity/rng.hpp"

namespace cavity {

namespace {

constexpr int kArcTableSize = 8192;
constexpr double kTwoPi = 6.283185307179586476925286766559;

double wrap_angle(double theta) {
    double t = std::fmod(theta, kTwoPi);
    if (t < 0.0) t += kTwoPi;
    return t;
}

} // namespace

void CavityGeometry::validate() const {
    if (!(r0 > 0.0))
        throw GeometryError("r0 must be > 0");
    if (!(m > 1.0))
        throw GeometryError("refractive index m must be > 1");
    for (const Harmonic& h : deformation)
        if (h.k <= 0)
            throw GeometryError("harmonic order k must be >= 1");
    for (int i = 0; i < 4096; ++i) {
        const double theta = kTwoPi * i / 4096.0;
        if (!(radius(theta) > 0.0))
            throw GeometryError("boundary radius must stay positive");
    }
}

double CavityGeometry::radius(double theta) const {
    double f = 1.0;
    for (const Harmonic& h : deformation)
        f += h.eta * std::cos(h.k * theta);
    return r0 * f;
}

double CavityGeometry::radius_deriv(double theta) const {
    double f = 0.0;
    for (const Harmonic& h : deformation)
        f -= h.eta * h.k * std::sin(h.k * theta);
    return r0 * f;
}

Eigen::Vector2d CavityGeometry::point(double theta) const {
    const double r = radius(theta);
    return {r * std::cos(theta), r * std::sin(theta)};
}

Eigen::Vector2d CavityGeometry::outward_normal(double theta) const {
    // Tangent of the polar curve is r' e_r + r e_theta; rotate by -90 deg.
    const double r = radius(theta);
    const double rp = radius_deriv(theta);
    const double c = std::cos(theta), s = std::sin(theta);
    const Eigen::Vector2d tangent{rp * c - r * s, rp * s + r * c};
    Eigen::Vector2d n{tangent.y(), -tangent.x()};
    n.normalize();
    if (n.dot(Eigen::Vector2d{c, s}) < 0.0) n = -n;
    return n;
}

double CavityGeometry::arclength(double theta) const {
    if (arc_table_.empty()) {
        arc_table_.resize(kArcTableSize + 1);
        arc_table_[0] = 0.0;
        const double h = kTwoPi / kArcTableSize;
        auto speed = [&](double t) {
            const double r = radius(t);
            const double rp = radius_deriv(t);
            return std::sqrt(r * r + rp * rp);
        };
        for (int i = 0; i < kArcTableSize; ++i) {
            const double a = i * h;
            // Simpson on each subinterval.
            const double seg = (h / 6.0) * (speed(a) + 4.0 * speed(a + 0.5 * h) + speed(a + h));
            arc_table_[i + 1] = arc_table_[i] + seg;
        }
    }
    const double t = wrap_angle(theta);
    const double x = t / kTwoPi * kArcTableSize;
    const int i = std::min(static_cast<int>(x), kArcTableSize - 1);
    const double frac = x - i;
    return arc_table_[i] + frac * (arc_table_[i + 1] - arc_table_[i]);
}

void RayBundle::validate() const {
    if (count < 1)
        throw GeometryError("ray count must be >= 1");
    if (sigma_theta < 0.0 || sigma_chi < 0.0)
        throw GeometryError("bundle spreads must be >= 0");
    if (!(std::abs(chi0) < 1.5707963267948966))
        throw GeometryError("chi0 must lie in (-pi/2, pi/2)");
}

namespace {

struct RaySegment {
    double t = 0.0;       // distance to next boundary crossing
    double theta = 0.0;   // polar angle of the crossing
};

// Signed distance-like function: |P + t d| - r(theta(P + t d)).
// Negative inside the cavity, zero on the boundary.
double boundary_fn(const CavityGeometry& g, const Eigen::Vector2d& p,
                   const Eigen::Vector2d& d, double t) {
    const Eigen::Vector2d q = p + t * d;
    return q.norm() - g.radius(std::atan2(q.y(), q.x()));
}

double boundary_fn_deriv(const CavityGeometry& g, const Eigen::Vector2d& p,
                         const Eigen::Vector2d& d, double t) {
    const Eigen::Vector2d q = p + t * d;
    const double rho = q.norm();
    const double theta = std::atan2(q.y(), q.x());
    const double rho_dot = q.dot(d) / rho;
    const double theta_dot = (q.x() * d.y() - q.y() * d.x()) / (rho * rho);
    return rho_dot - g.radius_deriv(theta) * theta_dot;
}

// Next boundary crossing along the ray from a boundary point. Marches until
// the sign flips, bisects, then polishes with Newton. Tolerance 1e-12 r0.
RaySegment next_crossing(const CavityGeometry& g, const Eigen::Vector2d& p,
                         const Eigen::Vector2d& d) {
    const double r0 = g.r0;
    double t_lo = 1e-7 * r0;
    for (int shrink = 0; boundary_fn(g, p, d, t_lo) >= 0.0; ++shrink) {
        if (shrink > 40)
            throw GeometryError("ray does not enter the cavity interior");
        t_lo *= 0.1;
    }

    // Grow geometrically, then in capped linear steps so short outside
    // excursions of a non-convex boundary are not skipped.
    const double max_step = 0.05 * r0;
    double t_hi = t_lo;
    double step = t_lo;
    bool found = false;
    for (int it = 0; it < 4000; ++it) {
        step = std::min(step * 2.0, max_step);
        const double t_next = t_hi + step;
        if (boundary_fn(g, p, d, t_next) >= 0.0) {
            t_lo = t_hi;
            t_hi = t_next;
            found = true;
            break;
        }
        t_hi = t_next;
    }
    if (!found)
        throw GeometryError("intersection search failed (boundary not star-shaped?)");

    for (int it = 0; it < 80 && (t_hi - t_lo) > 1e-12 * r0; ++it) {
        const double mid = 0.5 * (t_lo + t_hi);
        if (boundary_fn(g, p, d, mid) < 0.0)
            t_lo = mid;
        else
            t_hi = mid;
    }
    double t = 0.5 * (t_lo + t_hi);
    for (int it = 0; it < 8; ++it) {
        const double f = boundary_fn(g, p, d, t);
        const double fp = boundary_fn_deriv(g, p, d, t);
        if (fp == 0.0) break;
        const double t_new = t - f / fp;
        if (!(t_new > 0.5 * t_lo) || !(t_new < 2.0 * t_hi)) break;
        if (std::abs(t_new - t) < 1e-16 * r0) {
            t = t_new;
            break;
        }
        t = t_new;
    }

    const Eigen::Vector2d q = p + t * d;
    RaySegment seg;
    seg.t = t;
    seg.theta = std::atan2(q.y(), q.x());
    return seg;
}

} // namespace

TraceResult trace_ray_from(const CavityGeometry& geometry, double theta_start,
                           const Eigen::Vector2d& direction, int max_bounces) {
    geometry.validate();
    Eigen::Vector2d pos = geometry.point(theta_start);
    Eigen::Vector2d dir = direction.normalized();
    if (dir.dot(geometry.outward_normal(theta_start)) >= 0.0)
        throw GeometryError("launch direction must point into the cavity");

    TraceResult result;
    for (int bounce = 0; bounce < max_bounces; ++bounce) {
        const RaySegment seg = next_crossing(geometry, pos, dir);
        result.path_length += seg.t;

        // Snap onto the boundary so rounding never leaves the point outside.
        const double theta = seg.theta;
        pos = geometry.point(theta);

        const Eigen::Vector2d n = geometry.outward_normal(theta);
        const Eigen::Vector2d tang{-n.y(), n.x()};
        Bounce b;
        b.theta = theta;
        b.s = geometry.arclength(theta);
        b.sin_chi = dir.dot(tang);
        b.position = pos;
        result.bounces.push_back(b);

        if (std::abs(b.sin_chi) < geometry.critical_sin()) {
            result.escaped = true;
            return result;
        }
        // Rebuild the outgoing direction in the local (tangent, normal)
        // frame; equivalent to specular reflection but without accumulating
        // normalization drift over long confined orbits.
        const double c = std::sqrt(std::max(0.0, 1.0 - b.sin_chi * b.sin_chi));
        dir = b.sin_chi * tang - c * n;
    }
    result.escaped = false; // confined: bounce budget exhausted
    return result;
}

TraceResult trace_ray(const CavityGeometry& geometry, double theta0, double chi0,
                      int max_bounces) {
    if (!(std::abs(chi0) < 1.5707963267948966))
        throw GeometryError("chi0 must lie in (-pi/2, pi/2)");
    const Eigen::Vector2d n = geometry.outward_normal(theta0);
    const Eigen::Vector2d inward = -n;
    const double c = std::cos(chi0), s = std::sin(chi0);
    const Eigen::Vector2d dir{c * inward.x() - s * inward.y(),
                              s * inward.x() + c * inward.y()};
    return trace_ray_from(geometry, theta0, dir, max_bounces);
}

EscapeStats bundle_stats(const CavityGeometry& geometry, const RayBundle& bundle,
                         int max_bounces, int n_threads) {
    geometry.validate();
    bundle.validate();
    constexpr std::size_t kBirkhoffRays = 64;

    struct PerRay {
        bool escaped = false;
        double path = 0.0;
        std::vector<std::pair<double, double>> birkhoff;
    };
    std::vector<PerRay> rays(static_cast<std::size_t>(bundle.count));

    auto run_range = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            CounterRng rng(bundle.seed, i);
            const double theta = bundle.theta0 + bundle.sigma_theta * rng.next_gaussian();
            double chi = bundle.chi0 + bundle.sigma_chi * rng.next_gaussian();
            chi = std::clamp(chi, -1.5707963, 1.5707963);
            const TraceResult tr = trace_ray(geometry, theta, chi, max_bounces);
            rays[i].escaped = tr.escaped;
            rays[i].path = tr.path_length;
            if (i < kBirkhoffRays)
                for (const Bounce& b : tr.bounces)
                    rays[i].birkhoff.emplace_back(b.s, b.sin_chi);
        }
    };

    if (n_threads <= 1 || bundle.count < 2) {
        run_range(0, rays.size());
    } else {
        const std::size_t nt = std::min<std::size_t>(static_cast<std::size_t>(n_threads), rays.size());
        std::vector<std::thread> workers;
        const std::size_t chunk = (rays.size() + nt - 1) / nt;
        for (std::size_t w = 0; w < nt; ++w) {
            const std::size_t lo = w * chunk;
            const std::size_t hi = std::min(rays.size(), lo + chunk);
            if (lo < hi) workers.emplace_back(run_range, lo, hi);
        }
        for (auto& th : workers) th.join();
    }

    EscapeStats stats;
    std::vector<double> escape_paths;
    double sum = 0.0; // index-ordered reduction keeps results thread-count independent
    for (const PerRay& r : rays) {
        if (r.escaped) {
            ++stats.escaped;
            sum += r.path;
            escape_paths.push_back(r.path);
        } else {
            ++stats.confined;
        }
        for (const auto& pt : r.birkhoff) stats.birkhoff_trace.push_back(pt);
    }
    if (stats.escaped == 0)
        throw AllConfinedError("no ray escaped within the bounce budget");

    stats.L_p = sum / static_cast<double>(stats.escaped);
    stats.gamma_p = kSpeedOfLight / (2.0 * geometry.m * stats.L_p);

    std::sort(escape_paths.begin(), escape_paths.end());
    const double total = static_cast<double>(bundle.count);
    for (std::size_t k = 0; k < escape_paths.size(); ++k)
        stats.survival_curve.emplace_back(escape_paths[k],
                                          (total - static_cast<double>(k + 1)) / total);
    return stats;
}

} // namespace cavity
