#pragma once

#include "dyncs/operator.hpp"
#include "dyncs/support_set.hpp"

namespace dyncs {

enum class SupportMode { Simple, AddLsDel };

struct SupportEstimatorConfig {
    double alpha = 0.0;      // zeroing threshold
    double alpha_add = 0.0;  // addition threshold
    double alpha_del = 0.0;  // deletion threshold
    SupportMode mode = SupportMode::Simple;
    double sigma_min_target = 0.4;
    double energy_fraction = 0.999; // sparsification level behind auto_alpha
    double alpha_scale = 1.0 / 12.0;
};

/// Strict-threshold exceedance set {i : |xhat_i| > alpha}.
SupportSet estimate_support_simple(const Vec& xhat, double alpha);

struct AddLsDelResult {
    SupportSet support;
    Vec x_final; // LS refit on the final support, zero elsewhere
    SupportSet t_add;
};

/// Threshold-add on top of t_prev, LS refit, threshold-delete, final LS.
AddLsDelResult estimate_support_add_ls_del(const Vec& y, const MeasurementOperator& a,
                                           const SupportSet& t_prev, const Vec& xhat,
                                           const SupportEstimatorConfig& cfg);

/// alpha_0 = magnitude of the smallest entry kept when sparsifying xhat_ref to
/// cfg.energy_fraction of its energy; returns alpha_scale * alpha_0.
double auto_alpha(const Vec& xhat_ref, const SupportEstimatorConfig& cfg = {});

struct AddDelThresholds {
    double alpha_add = 0.0;
    double alpha_del = 0.0;
};

/// alpha_add: smallest threshold whose induced T_add keeps
/// sigma_min(A_{T_add}) >= cfg.sigma_min_target (descending-magnitude scan).
/// alpha_del: 0.7 * xhat_min - ||A_{T_add}^dagger (y - A xhat)||_inf, clamped
/// at zero, with xhat_min read off the previous estimate on t_prev.
AddDelThresholds auto_alpha_add_del(const Vec& y, const MeasurementOperator& a,
                                    const SupportSet& t_prev, const Vec& xhat,
                                    const Vec& xhat_prev, const SupportEstimatorConfig& cfg = {});

} // namespace dyncs
