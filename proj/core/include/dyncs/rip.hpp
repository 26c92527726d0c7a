#pragma once

#include <functional>
#include <optional>

#include "dyncs/operator.hpp"
#include "dyncs/support_set.hpp"

namespace dyncs {

/// Isometry / orthogonality constants computed by exhaustive enumeration.
/// exact = true means the value is a certificate, not a sampled lower bound.
struct RipReport {
    Index s = 0;
    Index s_tilde = 0;        // second order for the orthogonality constant
    Index projected_known = 0; // k for the projected (partial) variant
    double delta = 0.0;
    std::optional<double> theta;
    bool exact = false;
};

/// Exhaustive restricted isometry constant of order s:
///   delta = max over |S| = s of max(lambda_max(A_S'A_S) - 1, 1 - lambda_min).
/// Throws if C(m, s) exceeds the enumeration guard (1e7 subsets).
RipReport ric_bruteforce(const MeasurementOperator& a, Index s);

/// Exhaustive restricted orthogonality constant over disjoint (T1, T2) with
/// |T1| <= s, |T2| <= s_tilde: theta = max ||A_T1' A_T2||_2.
RipReport roc_bruteforce(const MeasurementOperator& a, Index s, Index s_tilde);

/// Isometry constant of the projected operator P_{T,perp} A_{T^c} over all
/// |T| = k and u-sparse directions.
RipReport partial_ric_bruteforce(const MeasurementOperator& a, Index k, Index u);

struct NspReport {
    bool falsified = false;
    bool exact = false; // verdict covers the whole null space (1-D case)
    Vec witness;        // set when falsified
};

/// Monte-Carlo falsifier for the null space property of order s: samples
/// null-space vectors and reports any v whose s largest magnitudes hold at
/// least half of ||v||_1. Exact when the null space is one-dimensional.
/// Throws on a trivial null space.
NspReport nsp_falsify(const MeasurementOperator& a, Index s, int samples, std::uint64_t seed = 7);

/// A_T^dagger y = (A_T'A_T)^{-1} A_T' y, returned on the index set T.
/// Throws (reporting the smallest singular value) if A_T fails the
/// conditioning guard sigma_min >= 1e-8 * sigma_max.
Vec pseudo_inverse_on_support(const MeasurementOperator& a, const SupportSet& t, const Vec& y);

/// Number of size-s subsets of [0, m), saturating at the guard limit.
double subset_count(Index m, Index s);

/// Calls fn(support) for every size-s subset of [0, m).
void for_each_subset(Index m, Index s, const std::function<void(const std::vector<Index>&)>& fn);

} // namespace dyncs
