#pragma once

#include "dyncs/problem.hpp"
#include "dyncs/support_set.hpp"

namespace dyncs {

/// First-order convex engine backing every weighted-l1 program in the
/// library. Two problem shapes:
///
///   Lagrangian:   min_b  sum_i w_i |b_i| + 0.5 ||y - A b||^2
///                        + 0.5 lambda ||(b - mu)_T||^2
///   Constrained:  min_b  sum_i w_i |b_i|   s.t. ||A b - y||_2 <= eps
///                        (eps = 0 collapses to the equality constraint)
///
/// The Lagrangian form runs proximal gradient with momentum and gradient
/// restart; the constrained form runs a primal-dual splitting whose dual
/// update is a projection onto the data set. Converged results certify a
/// subgradient (KKT) residual below opts.tol.
struct LagrangianSpec {
    Vec weights;               // length m, nonnegative
    double lambda = 0.0;       // quadratic prior weight
    const Vec* mu = nullptr;   // prior mean (length m); only entries on prior_set are used
    const SupportSet* prior_set = nullptr;
};

SolverResult solve_lagrangian_l1(const MeasurementOperator& a, const Vec& y,
                                 const LagrangianSpec& spec, const SolverOptions& opts = {});

SolverResult solve_constrained_l1(const MeasurementOperator& a, const Vec& y, const Vec& weights,
                                  double eps, const SolverOptions& opts = {});

/// Subgradient residual of the Lagrangian form at b (relative to the
/// problem's natural scale); used by tests and by the solver stop rule.
double kkt_residual_lagrangian(const MeasurementOperator& a, const Vec& y,
                               const LagrangianSpec& spec, const Vec& b);

/// Minimum-norm b with ||A b - y|| <= eps (SVD + secular bisection); used for
/// the degenerate all-zero-weight objective.
Vec min_norm_feasible(const MeasurementOperator& a, const Vec& y, double eps);

} // namespace dyncs
