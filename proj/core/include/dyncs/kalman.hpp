#pragma once

#include "dyncs/problem.hpp"
#include "dyncs/support_set.hpp"

namespace dyncs {

/// Kalman state over a sparse signal. The covariance is maintained on the
/// union of every support estimate seen so far (entries off that set are
/// exactly zero under the support-restricted process noise, so this equals
/// the full m x m recursion at any m).
struct KfState {
    Vec xhat;           // length m
    SupportSet support; // current estimate
    SupportSet tracked; // indices carrying covariance
    Mat p;              // |tracked| x |tracked|
    int jitter_events = 0;

    static KfState initial(const Vec& x0, const SupportSet& n0, double sigma_sys02, Index m);

    void ensure_tracked(const SupportSet& s);
    Mat dense_cov(Index m) const;

    /// Symmetry / positive-semidefiniteness check used by tests (returns the
    /// worst violation: max asymmetry and most negative eigenvalue).
    std::pair<double, double> cov_health() const;
};

struct KfModCsConfig {
    double gamma = 1e-2;
    double alpha = 0.0;
    double sigma_sys2 = 1e-4;
    double sigma_obs2 = 1e-4;
    bool pin_support = false; // keep the current support (oracle studies)
    SolverOptions solver;
};

/// One step of the Kalman-filtered modified-CS tracker: an l1-regularized
/// residual solve around the previous mean proposes the support, then a
/// standard Kalman update with process noise restricted to that support
/// refreshes mean and covariance.
void step_kf_modcs(KfState& state, const Vec& y, const MeasurementOperator& a,
                   const KfModCsConfig& cfg);

struct PmCsKfConfig {
    int pseudo_iterations = 20; // N_tau
    double r_eps = 1.0;         // pseudo-measurement noise covariance (tunable)
    double sigma_sys2 = 1e-4;
    double sigma_obs2 = 1e-4;
};

/// Kalman filter with sign-based pseudo-measurement contraction steps that
/// approximately enforce an l1 constraint on the state.
struct PmCsKfState {
    Vec xhat;
    Mat p; // full m x m
    int jitter_events = 0;

    static PmCsKfState initial(const Vec& x0, double sigma_sys02);
};

void step_pm_cs_kf(PmCsKfState& state, const Vec& y, const MeasurementOperator& a,
                   const PmCsKfConfig& cfg);

} // namespace dyncs
