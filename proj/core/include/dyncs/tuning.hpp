#pragma once

#include <string>
#include <vector>

#include "dyncs/operator.hpp"
#include "dyncs/simulate.hpp"
#include "dyncs/support_set.hpp"

namespace dyncs {

/// Result of the computable error bound for the quadratically regularized
/// modified-BPDN program. All intermediates are reported at the minimizing
/// sparsified-support size k_min; infeasible k carry an infinite bound.
struct BoundReport {
    bool feasible = false;
    Index k_min = -1;
    SupportSet delta_tilde_star;
    double gamma_star = std::numeric_limits<double>::infinity();
    double bound = std::numeric_limits<double>::infinity();
    double erc = 0.0;
    double maxcor = 0.0;
    double f1 = 0.0, f2 = 0.0, f3 = 0.0, f4 = 0.0;
    double g1 = 0.0, g2 = 0.0, g3 = 0.0, g4 = 0.0;
    std::vector<double> per_k_bounds; // B_k for k = 0..|Delta_u| (inf = infeasible)
};

/// Evaluates the always-valid error bound for reg-mod-BPDN at every
/// sparsified support Delta_tilde*(k) (the k largest magnitudes of x on
/// Delta_u) and returns the minimizing k with its gamma* and bound.
/// Requires unit-norm columns. w_inf_bound bounds ||w||_inf; w_2_bound bounds
/// ||w||_2 (pass a negative value to use sqrt(n) * w_inf_bound).
BoundReport compute_bound(const MeasurementOperator& a, const Vec& x, const SupportSet& t,
                          const Vec& mu_hat, double lambda, double w_inf_bound,
                          double w_2_bound = -1.0);

struct TunedParams {
    double gamma = 0.0;
    double lambda = 0.0;
    double alpha = 0.0; // zeroing threshold derived from the first frame
    BoundReport report;
};

/// Data-driven (gamma, lambda) selection from two calibration frames: builds
/// T, N, mu_hat, x and a noise proxy from the BPDN estimates, scans the
/// lambda grid, and returns the grid point with the smallest bound.
TunedParams tune_gamma_lambda(const Vec& xhat1, const Vec& xhat2, const Vec& y2,
                              const MeasurementOperator& a, const std::vector<double>& lambda_grid);

/// Default lambda grid used by the tuning step.
const std::vector<double>& default_lambda_grid();

struct KfParams {
    double sigma_sys2 = 0.0;
    double sigma_obs2 = 0.0;
};

/// ML-style estimates from two calibration frames:
/// sigma_sys^2 = mean_{i in N2} (xhat2 - xhat1)_i^2, sigma_obs^2 =
/// ||y2 - A xhat2||^2 / m, both floored at 1e-12.
KfParams tune_kf_params(const Vec& xhat1, const Vec& xhat2, const Vec& y2,
                        const MeasurementOperator& a, double alpha);

/// Exact-recovery / error-bound condition checkers, one per guarantee in the
/// catalog. Every isometry constant is computed by brute force so a passing
/// verdict is a certificate.
enum class RecoveryChecker {
    BpExact,             // delta_{2s} < sqrt(2) - 1
    BpNoisyBound,        // delta_{2s} < 0.207
    ModL0Rank,           // every (k+2u)-column subset independent
    ModCsExact,          // three sufficient branches on delta/theta
    WeightedL1Exact,     // scan over admissible a
    ProjectedModCsExact, // partial RIC delta_{2u}^k < sqrt(2) - 1
    ModCsNoisyBound,     // delta_{k+3u} < (sqrt(2)-1)/2
    IhtPksContraction,   // ||A|| < 1 and delta_{3s-2k} < 1/sqrt(32)
    DynamicStability,      // delta_{s+6 s_a} <= 0.207
    DynamicStabilityModel, // delta_{s+3(b+d0+1) s_a} <= 0.207
};

struct CheckerSizes {
    Index s = 0;
    Index k = 0;
    Index u = 0;
    Index e = 0;
    Index s_a = 0;
    Index b = 0;
    Index d0 = 0;
    double tau = 0.0;
};

struct CheckCondition {
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    bool pass = false;
    bool verifiable = true;
};

struct CheckReport {
    bool all_pass = false; // some sufficient branch holds
    std::vector<CheckCondition> conditions;
};

CheckReport check_exact_recovery_conditions(RecoveryChecker which, const MeasurementOperator& a,
                                            const CheckerSizes& sizes);

const char* to_string(RecoveryChecker c);

/// Bound-constant C1(k) = 4 sqrt(1 + delta) / (1 - 2 delta).
double bound_constant_c1(double delta);

/// Small-entry cap behind the dynamic stability guarantee:
/// |{i in N_t : |x_t_i| <= alpha + 7.50 eps}| <= s_a at every t.
bool stability_small_entry_cap_ok(const SequenceTrace& tr, double alpha, double eps, Index s_a);

} // namespace dyncs
