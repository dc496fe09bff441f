#ifndef CAVITY_RAY_HPP
#define CAVITY_RAY_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cavity/errors.hpp"

namespace cavity {

inline constexpr double kSpeedOfLight = 2.99792458e8; // [m/s]

struct Harmonic {
    int k = 0;
    double eta = 0.0;
};

/// Deformed 2D cavity with boundary r(theta) = r0 (1 + sum eta_k cos k theta)
/// and refractive index m > 1. The boundary must stay positive; validated on
/// a 4096-point grid.
struct CavityGeometry {
    double r0 = 1.0;
    std::vector<Harmonic> deformation;
    double m = 1.5;

    void validate() const;

    double radius(double theta) const;
    double radius_deriv(double theta) const;
    Eigen::Vector2d point(double theta) const;
    Eigen::Vector2d outward_normal(double theta) const;

    /// Boundary arclength from theta = 0, via a cached cumulative table.
    double arclength(double theta) const;

    double critical_sin() const { return 1.0 / m; }

private:
    mutable std::vector<double> arc_table_;
};

struct Bounce {
    double theta = 0.0;
    double s = 0.0;       // Birkhoff arclength coordinate
    double sin_chi = 0.0; // signed; escape tests |sin_chi| < 1/m
    Eigen::Vector2d position{0.0, 0.0};
};

struct TraceResult {
    bool escaped = false;
    double path_length = 0.0;
    std::vector<Bounce> bounces;
};

/// Specular billiard map with critical-angle escape: from a boundary point
/// along a direction, find the next boundary crossing, reflect, and leave the
/// cavity entirely once |sin chi| < 1/m at a bounce. A ray still inside after
/// max_bounces is classified confined (escaped = false).
TraceResult trace_ray(const CavityGeometry& geometry, double theta0, double chi0,
                      int max_bounces);

/// Same map, launched from the boundary point at theta_start along an
/// explicit interior direction. Used by trace_ray and by time-reversal checks.
TraceResult trace_ray_from(const CavityGeometry& geometry, double theta_start,
                           const Eigen::Vector2d& direction, int max_bounces);

struct RayBundle {
    double theta0 = 0.0;
    double chi0 = 0.0;
    double sigma_theta = 0.0;
    double sigma_chi = 0.0;
    int count = 1;
    std::uint64_t seed = 0;

    void validate() const;
};

struct EscapeStats {
    double L_p = 0.0;     // mean escape path length [same unit as r0]
    double gamma_p = 0.0; // c / (2 m L_p) [1/s]
    std::size_t escaped = 0;
    std::size_t confined = 0;
    /// (path length, fraction of rays still inside) at each escape event.
    std::vector<std::pair<double, double>> survival_curve;
    /// (arclength s, sin chi) bounce samples from the first few rays.
    std::vector<std::pair<double, double>> birkhoff_trace;
};

/// Traces a Gaussian bundle of rays. Confined rays are excluded from L_p and
/// reported separately. Deterministic for a fixed seed regardless of
/// n_threads (per-ray RNG streams, ordered reduction). Throws
/// AllConfinedError when no ray escapes.
EscapeStats bundle_stats(const CavityGeometry& geometry, const RayBundle& bundle,
                         int max_bounces, int n_threads = 1);

} // namespace cavity

#endif
