#pragma once

#include "dyncs/engine.hpp"
#include "dyncs/problem.hpp"
#include "dyncs/support_set.hpp"

namespace dyncs {

enum class Constraint { Equality, Ball };

/// min sum_i weights_i |b_i| subject to the data constraint (equality or
/// ||y - Ab|| <= p.eps). Unit weights + equality is basis pursuit.
SolverResult solve_weighted_l1(const Problem& p, const Vec& weights, Constraint constraint,
                               const SolverOptions& opts = {});

/// min p.gamma ||b||_1 + 0.5 ||y - Ab||^2  (requires p.gamma > 0).
SolverResult solve_bpdn(const Problem& p, const SolverOptions& opts = {});

/// Hard-thresholded Landweber iteration at sparsity s. The operator is
/// spectrally rescaled when a power-method estimate gives ||A|| > 1.
SolverResult solve_iht(const Problem& p, Index s, const SolverOptions& opts = {});
/// One rescaled iterate x -> H_s(x + A'(y - Ax) / c^2); exposed so callers
/// can audit the per-iteration residual.
Vec iht_iterate(const MeasurementOperator& a, const Vec& y, Index s, const Vec& x, double rescale);

/// Greedy residual-correlation selection starting from initial_support, with
/// a least-squares refit each step; stops at s atoms or residual <= p.eps.
/// Correlations are taken against unit-normalized columns.
SolverResult solve_omp(const Problem& p, Index s, const SupportSet& initial_support = {},
                       const SolverOptions& opts = {});

/// Exhaustive minimum-support solve; test oracle only (guarded to m <= 20).
/// Scans supports in increasing size and returns the first (lexicographically
/// smallest) support whose least-squares fit meets the data constraint.
SolverResult solve_l0_bruteforce(const Problem& p, Index s_max);

/// Enumeration detail behind solve_l0_bruteforce: all minimal-support
/// solutions, deduplicated, so callers can assess uniqueness.
struct L0Scan {
    Index support_size = 0;
    std::vector<Vec> solutions; // distinct minimizers at the minimal size
    bool found = false;
};
L0Scan l0_scan(const Problem& p, Index s_max);

/// Keep the s largest-magnitude entries (ties: lowest index wins).
Vec hard_threshold(const Vec& v, Index s);

} // namespace dyncs
