#pragma once

#include <limits>

namespace dyncs {

/// Inputs for the high-probability exact-recovery threshold of the weighted
/// l1 program with a two-set weight partition. gamma1/gamma2 are the index
/// fractions of T and T^c, p1/p2 the sparsity fractions on each, omega the
/// weight ratio 1/tau (infinity = the zero-weight program).
struct WeakThresholdQuery {
    double gamma1 = 0.0;
    double gamma2 = 1.0;
    double p1 = 0.0;
    double p2 = 0.1;
    double omega = 1.0;
    int grid = 64;        // (tau1, tau2) resolution
    int delta_grid = 400; // candidate measurement fractions in (0, 1]
    double root_tol = 1e-11;
    /// The net exponent touches zero from below at the critical face ratio,
    /// so grid points within margin * (tau1 + tau2) of zero count as
    /// violating; the relative form keeps the known-part reduction exact.
    double margin = 2e-3;
};

/// Smallest delta on the candidate grid such that the combinatorial exponent
/// stays below the sum of the internal- and external-angle exponents at every
/// admissible (tau1, tau2) grid point. Throws on a root-bracketing failure,
/// reporting the offending grid coordinates.
double weak_threshold(const WeakThresholdQuery& q);

/// delta-grid cell width for the query (tolerance unit in identity checks).
inline double weak_threshold_cell(const WeakThresholdQuery& q) {
    return 1.0 / static_cast<double>(q.delta_grid);
}

} // namespace dyncs
