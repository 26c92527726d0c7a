#pragma once

#include <vector>

#include "dyncs/operator.hpp"

namespace dyncs {

/// Bernoulli-Gaussian-AR signal prior: x_n = s_n * theta_n with a stationary
/// Markov activity chain and a stationary AR(1) amplitude process
/// theta_t = zeta + (1 - alpha_ar)(theta_{t-1} - zeta) + alpha_ar * v_t.
struct AmpParams {
    double lambda = 0.10;   // P(s = 1)
    double p10 = 0.05;      // P(s_t = 1 | s_{t-1} = 0)
    double zeta = 0.0;      // AR mean
    double alpha_ar = 0.10; // AR innovation weight, in (0, 1]
    double rho = 1.0;       // AR innovation variance
    double sigma_e2 = 1e-4; // measurement noise variance
    int inner_iters = 25;   // AMP iterations per frame
    double eps_inflate = 1e-7;
    double tau_gate = 0.99; // activity gate for the outgoing amplitude message

    double p01() const { return lambda * p10 / (1.0 - lambda); } // stationarity
    double stationary_var() const { return alpha_ar * rho / (2.0 - alpha_ar); }
};

/// Per-frame message snapshot retained for EM parameter learning.
struct AmpFrameStats {
    Vec activity;   // posterior P(s_n = 1 | data so far)
    Vec pi_fwd;     // frame likelihood message on activity
    Vec mu_theta;   // posterior amplitude mean
    Vec v_theta;    // posterior amplitude variance
    Vec x_mean;     // AMP posterior mean of x
    Vec x_var;      // AMP posterior variance of x
    double resid2 = 0.0; // ||y - A x_mean||^2
    Index meas_dim = 0;
};

struct AmpState {
    AmpParams params;
    Vec lambda_fwd; // forward activity message
    Vec eta_fwd;    // forward amplitude mean message
    Vec kappa_fwd;  // forward amplitude variance message
    Vec xhat;       // current estimate
    std::vector<AmpFrameStats> history; // appended per frame when recording
    bool record_history = true;
    Index t = 0;

    static AmpState initial(Index m, const AmpParams& params);
};

/// Scalar shrinkage pair behind the AMP iteration (posterior mean/variance of
/// a Bernoulli-Gaussian coordinate under a Gaussian likelihood).
struct AmpShrink {
    double mean = 0.0;
    double var = 0.0;
    double gamma = 0.0; // spike/slab odds factor (log-domain clamped)
};
AmpShrink amp_shrink(double phi, double c, double pi_bwd, double xi_bwd, double psi_bwd);

/// One filtering step: combine the incoming prior messages, run the inner AMP
/// loop with the Onsager-corrected residual, emit outgoing activity/amplitude
/// messages and push them forward in time.
void dcs_amp_filter_step(AmpState& state, const Vec& y, const MeasurementOperator& a);

struct EmUpdateReport {
    bool alpha_kept = false; // discriminant failed; previous alpha retained
    AmpParams before;
    AmpParams after;
};

/// One EM pass over the recorded history; requires at least one frame.
/// Updates lambda, p10 (through the stationary p01), zeta, alpha_ar, rho and
/// sigma_e2 in place. Transition/AR updates are skipped for single-frame
/// histories.
EmUpdateReport dcs_amp_em_update(AmpState& state);

} // namespace dyncs
