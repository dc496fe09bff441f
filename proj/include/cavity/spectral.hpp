#ifndef CAVITY_SPECTRAL_HPP
#define CAVITY_SPECTRAL_HPP

#include <vector>

#include <Eigen/Dense>

#include "cavity/modes.hpp"

namespace cavity {

struct SpectrumResult {
    /// Real roots of the secular function s(l) = (gamma_r - l) + sum g_n^2/(gamma_n - l),
    /// ascending. In the over-damped regime there are N+1 of them.
    std::vector<double> secular;
    /// Eigenvalues of the dense (N+1)x(N+1) decay matrix, sorted by real part.
    std::vector<Complex> dense;
    double lambda_regular_exact = 0.0;      // secular root nearest gamma_r
    double lambda_regular_firstorder = 0.0; // gamma_r (1 + G)
    bool degenerate_fallback = false;       // secular roots taken from dense solve
};

/// On-resonance decay spectrum: bracketed root-finding on the secular
/// function between its poles, cross-validated against a dense eigenvalue
/// solve. Near-coincident gamma_n collapse the pole structure; the result is
/// then taken from the dense solve and flagged.
SpectrumResult secular_roots(const ModeEnsemble& ensemble);

struct ModifiedRegularMode {
    /// First-order eigenvector (1, -g_1/gamma_1, ..., -g_N/gamma_N).
    Eigen::VectorXd first_order;
    /// Numerically exact eigenvector of the dense matrix for the eigenvalue
    /// nearest gamma_r, normalized to leading component 1.
    Eigen::VectorXd exact;
    double max_component_diff = 0.0;
};

ModifiedRegularMode modified_regular_mode(const ModeEnsemble& ensemble);

} // namespace cavity

#endif
