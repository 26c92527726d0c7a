#pragma once

#include "dyncs/solvers.hpp"

namespace dyncs {

/// Partial support knowledge T plus an optional signal-value prior mu_hat
/// supported on T.
struct PriorKnowledge {
    SupportSet t;
    Vec mu_hat;          // length m; entries off t must be zero (validated)
    double tau = 0.0;    // l1 weight on t for the weighted program
    double lambda = 0.0; // quadratic prior weight
    double gamma = 0.0;  // l1 weight

    void validate(Index m) const;
};

/// LS estimate on T followed by an l1 correction of the measurement residual.
SolverResult solve_lscs(const Problem& p, const SupportSet& t, const SolverOptions& opts = {});

/// min ||b_{T^c}||_1 subject to the data constraint (weights 0 on T).
SolverResult solve_modified_cs(const Problem& p, const SupportSet& t, bool noisy,
                               const SolverOptions& opts = {});

/// min ||b_{T^c}||_1 + tau ||b_T||_1 subject to the data constraint.
SolverResult solve_weighted_l1_pks(const Problem& p, const PriorKnowledge& prior, bool noisy,
                                   const SolverOptions& opts = {});

/// min gamma ||b_{T^c}||_1 + 0.5||y - Ab||^2 + 0.5 lambda ||b_T - mu_T||^2.
SolverResult solve_reg_mod_bpdn(const Problem& p, const PriorKnowledge& prior,
                                const SolverOptions& opts = {});

/// reg-mod-BPDN with lambda = 0.
SolverResult solve_mod_bpdn(const Problem& p, const SupportSet& t, double gamma,
                            const SolverOptions& opts = {});

/// xhat = mu_hat + argmin_b gamma ||b_{T^c}||_1 + 0.5 ||y - A mu_hat - A b||^2.
SolverResult solve_mod_bpdn_residual(const Problem& p, const PriorKnowledge& prior,
                                     const SolverOptions& opts = {});

/// Hard-thresholding iteration that always keeps the entries on T and
/// thresholds the rest to the s - |T| largest.
SolverResult solve_iht_pks(const Problem& p, const SupportSet& t, Index s,
                           const SolverOptions& opts = {});
Vec iht_pks_iterate(const MeasurementOperator& a, const Vec& y, const SupportSet& t, Index s,
                    const Vec& x, double rescale);

/// Two-step route: project measurements orthogonal to range(A_T), recover the
/// off-T part by basis pursuit on the projected operator, back-substitute the
/// T part by least squares. Agrees with solve_modified_cs.
SolverResult solve_modcs_projected(const Problem& p, const SupportSet& t,
                                   const SolverOptions& opts = {});

} // namespace dyncs
