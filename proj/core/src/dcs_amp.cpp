#include "dyncs/dcs_amp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dyncs {

AmpState AmpState::initial(Index m, const AmpParams& params) {
    AmpState st;
    st.params = params;
    st.lambda_fwd = Vec::Constant(m, params.lambda);
    st.eta_fwd = Vec::Constant(m, params.zeta);
    st.kappa_fwd = Vec::Constant(m, params.stationary_var());
    st.xhat = Vec::Zero(m);
    return st;
}

AmpShrink amp_shrink(double phi, double c, double pi_bwd, double xi_bwd, double psi_bwd) {
    AmpShrink out;
    // log-domain spike/slab odds, clamped so the exponential stays finite
    const double pi_c = std::clamp(pi_bwd, 0.0, 1.0);
    double lg;
    if (pi_c <= 0.0) {
        lg = 700.0;
    } else if (pi_c >= 1.0) {
        lg = -700.0;
    } else {
        // real-signal odds: Gaussian density ratio with the half exponents
        lg = std::log((1.0 - pi_c) / pi_c) + 0.5 * std::log((psi_bwd + c) / c) -
             (psi_bwd * phi * phi + 2.0 * xi_bwd * c * phi - c * xi_bwd * xi_bwd) /
                 (2.0 * c * (psi_bwd + c));
        lg = std::clamp(lg, -700.0, 700.0);
    }
    out.gamma = std::exp(lg);
    const double slab_mean = (psi_bwd * phi + xi_bwd * c) / (psi_bwd + c);
    const double slab_var = psi_bwd * c / (psi_bwd + c);
    out.mean = slab_mean / (1.0 + out.gamma);
    out.var = slab_var / (1.0 + out.gamma) + out.gamma * out.mean * out.mean;
    return out;
}

void dcs_amp_filter_step(AmpState& state, const Vec& y, const MeasurementOperator& a) {
    const Index m = a.cols();
    const Index n = a.rows();
    const AmpParams& pr = state.params;
    if (state.lambda_fwd.size() != m) throw std::invalid_argument("dcs_amp_filter_step: state size");

    // (into) phase with an uninformative backward pass (filtering mode):
    // pi_bwd = lambda_fwd, psi_bwd = kappa_fwd, xi_bwd = eta_fwd
    const Vec& pi_bwd = state.lambda_fwd;
    const Vec& psi_bwd = state.kappa_fwd;
    const Vec& xi_bwd = state.eta_fwd;

    // (within) phase: AMP loop
    Vec z = y;
    Vec mu = Vec::Zero(m);
    Vec v = Vec::Zero(m);
    Vec phi = Vec::Zero(m);
    double c = 100.0 * psi_bwd.sum();
    for (int i = 0; i < pr.inner_iters; ++i) {
        phi = a.adjoint(z) + mu;
        double vsum = 0.0;
        for (Index nidx = 0; nidx < m; ++nidx) {
            const AmpShrink sh = amp_shrink(phi[nidx], c, pi_bwd[nidx], xi_bwd[nidx], psi_bwd[nidx]);
            mu[nidx] = sh.mean;
            v[nidx] = sh.var;
            vsum += sh.var;
        }
        const double onsager = vsum / (c * static_cast<double>(n)); // (1/M) sum F' = sum v / (c M)
        z = y - a.apply(mu) + onsager * z;
        c = pr.sigma_e2 + vsum / static_cast<double>(n);
    }
    state.xhat = mu;

    // (out) phase
    Vec pi_fwd(m), xi_fwd(m), psi_fwd(m);
    for (Index nidx = 0; nidx < m; ++nidx) {
        const AmpShrink sh = amp_shrink(phi[nidx], c, pi_bwd[nidx], xi_bwd[nidx], psi_bwd[nidx]);
        const double pi_c = std::clamp(pi_bwd[nidx], 1e-300, 1.0 - 1e-16);
        pi_fwd[nidx] = 1.0 / (1.0 + (pi_c / (1.0 - pi_c)) * sh.gamma);
        pi_fwd[nidx] = std::clamp(pi_fwd[nidx], 0.0, 1.0);
        if (pi_bwd[nidx] <= pr.tau_gate) {
            xi_fwd[nidx] = phi[nidx] / pr.eps_inflate;
            psi_fwd[nidx] = c / (pr.eps_inflate * pr.eps_inflate);
        } else {
            xi_fwd[nidx] = phi[nidx];
            psi_fwd[nidx] = c;
        }
    }

    if (state.record_history) {
        AmpFrameStats fs;
        fs.pi_fwd = pi_fwd;
        fs.activity.resize(m);
        fs.mu_theta.resize(m);
        fs.v_theta.resize(m);
        for (Index nidx = 0; nidx < m; ++nidx) {
            const double num = state.lambda_fwd[nidx] * pi_fwd[nidx];
            const double den = num + (1.0 - state.lambda_fwd[nidx]) * (1.0 - pi_fwd[nidx]);
            fs.activity[nidx] = den > 0.0 ? num / den : 0.0;
            const double vt = 1.0 / (1.0 / state.kappa_fwd[nidx] + 1.0 / psi_fwd[nidx]);
            fs.v_theta[nidx] = vt;
            fs.mu_theta[nidx] = vt * (state.eta_fwd[nidx] / state.kappa_fwd[nidx] +
                                      xi_fwd[nidx] / psi_fwd[nidx]);
        }
        fs.x_mean = mu;
        fs.x_var = v;
        fs.resid2 = (y - a.apply(mu)).squaredNorm();
        fs.meas_dim = n;
        state.history.push_back(std::move(fs));
    }

    // (across) phase: forward recursions for the next frame
    const double p01 = pr.p01();
    for (Index nidx = 0; nidx < m; ++nidx) {
        const double lf = state.lambda_fwd[nidx];
        const double pf = pi_fwd[nidx];
        const double den = (1.0 - lf) * (1.0 - pf) + lf * pf;
        double lnext = den > 0.0
                           ? (pr.p10 * (1.0 - lf) * (1.0 - pf) + (1.0 - p01) * lf * pf) / den
                           : pr.p10;
        state.lambda_fwd[nidx] = std::clamp(lnext, 0.0, 1.0);
        const double pooled_var = state.kappa_fwd[nidx] * psi_fwd[nidx] /
                                  (state.kappa_fwd[nidx] + psi_fwd[nidx]);
        const double pooled_mean = pooled_var * (state.eta_fwd[nidx] / state.kappa_fwd[nidx] +
                                                 xi_fwd[nidx] / psi_fwd[nidx]);
        state.eta_fwd[nidx] = (1.0 - pr.alpha_ar) * pooled_mean + pr.alpha_ar * pr.zeta;
        state.kappa_fwd[nidx] =
            (1.0 - pr.alpha_ar) * (1.0 - pr.alpha_ar) * pooled_var + pr.alpha_ar * pr.alpha_ar * pr.rho;
    }
    ++state.t;
}

EmUpdateReport dcs_amp_em_update(AmpState& state) {
    const auto& hist = state.history;
    if (hist.empty()) throw std::runtime_error("dcs_amp_em_update: no recorded filtering pass");
    EmUpdateReport rep;
    rep.before = state.params;
    AmpParams& pr = state.params;
    const Index m = hist.front().activity.size();
    const std::size_t frames = hist.size();
    const double alpha = pr.alpha_ar;

    // activity prior from the first frame
    double lambda_new = std::clamp(hist.front().activity.mean(), 1e-6, 1.0 - 1e-6);

    if (frames >= 2) {
        // transition probability from chained pairwise activity posteriors
        double num = 0.0, den = 0.0;
        for (std::size_t t = 1; t < frames; ++t) {
            for (Index nidx = 0; nidx < m; ++nidx) {
                const double q_prev = hist[t - 1].activity[nidx];
                const double like1 = std::clamp(hist[t].pi_fwd[nidx], 1e-12, 1.0 - 1e-12);
                const double p01 = pr.p01();
                // joint posterior of (s_{t-1}, s_t) from forward marginal,
                // transition and the frame-t likelihood ratio
                const double j11 = q_prev * (1.0 - p01) * like1;
                const double j10 = q_prev * p01 * (1.0 - like1);
                const double j01 = (1.0 - q_prev) * pr.p10 * like1;
                const double j00 = (1.0 - q_prev) * (1.0 - pr.p10) * (1.0 - like1);
                const double zsum = j11 + j10 + j01 + j00;
                const double e_ss = zsum > 0.0 ? j11 / zsum : 0.0;
                num += q_prev - e_ss;
                den += q_prev;
            }
        }
        const double p01_new = den > 0.0 ? std::clamp(num / den, 1e-6, 1.0 - 1e-6) : pr.p01();

        // AR mean
        const double sigma1 = pr.stationary_var();
        double zeta_acc = 0.0;
        for (Index nidx = 0; nidx < m; ++nidx) zeta_acc += hist.front().mu_theta[nidx] / sigma1;
        for (std::size_t t = 1; t < frames; ++t)
            for (Index nidx = 0; nidx < m; ++nidx)
                zeta_acc += (hist[t].mu_theta[nidx] - (1.0 - alpha) * hist[t - 1].mu_theta[nidx]) /
                            (alpha * pr.rho);
        const double zeta_info = static_cast<double>(m) * static_cast<double>(frames - 1) / pr.rho +
                                 static_cast<double>(m) / sigma1;
        const double zeta_new = zeta_acc / zeta_info;

        // AR innovation weight: positive root of the stationarity quadratic
        double b_acc = 0.0, c_acc = 0.0;
        for (std::size_t t = 1; t < frames; ++t) {
            for (Index nidx = 0; nidx < m; ++nidx) {
                const double mu_t = hist[t].mu_theta[nidx];
                const double mu_p = hist[t - 1].mu_theta[nidx];
                const double v_p = hist[t - 1].v_theta[nidx];
                const double cross = mu_t * mu_p + (1.0 - alpha) * v_p; // E[theta_t theta_{t-1}]
                b_acc += cross - (mu_t - mu_p) * zeta_new - v_p - mu_p * mu_p;
                c_acc += hist[t].v_theta[nidx] + mu_t * mu_t + v_p + mu_p * mu_p - 2.0 * cross;
            }
        }
        const double nt1 = static_cast<double>(m) * static_cast<double>(frames - 1);
        const double bb = 2.0 / pr.rho * b_acc;
        const double cc = 2.0 / pr.rho * c_acc;
        const double disc = bb * bb + 8.0 * nt1 * cc;
        double alpha_new = alpha;
        if (disc >= 0.0) {
            alpha_new = std::clamp((bb + std::sqrt(disc)) / (4.0 * nt1), 1e-6, 1.0);
        } else {
            rep.alpha_kept = true;
        }

        // AR innovation variance
        double rho_acc = 0.0;
        const double an = alpha_new;
        for (std::size_t t = 1; t < frames; ++t) {
            for (Index nidx = 0; nidx < m; ++nidx) {
                const double mu_t = hist[t].mu_theta[nidx];
                const double mu_p = hist[t - 1].mu_theta[nidx];
                const double v_p = hist[t - 1].v_theta[nidx];
                const double cross = mu_t * mu_p + (1.0 - an) * v_p;
                rho_acc += hist[t].v_theta[nidx] + mu_t * mu_t + an * an * zeta_new * zeta_new -
                           2.0 * (1.0 - an) * cross - 2.0 * an * mu_t * zeta_new +
                           2.0 * an * (1.0 - an) * mu_p * zeta_new +
                           (1.0 - an) * (1.0 - an) * (v_p + mu_p * mu_p);
            }
        }
        const double rho_new = std::max(1e-12, rho_acc / (an * an * nt1));

        pr.p10 = std::clamp(p01_new * (1.0 - lambda_new) / lambda_new, 1e-6, 1.0 - 1e-6);
        pr.zeta = zeta_new;
        pr.alpha_ar = alpha_new;
        pr.rho = rho_new;
    }
    pr.lambda = lambda_new;

    // noise variance: sigma_e^2 = sum_t (||y_t - A mu_t||^2 + 1'v_t) / sum_t M_t
    double se_acc = 0.0, meas_total = 0.0;
    for (const auto& fs : hist) {
        se_acc += fs.resid2 + fs.x_var.sum();
        meas_total += static_cast<double>(fs.meas_dim);
    }
    if (meas_total > 0.0) pr.sigma_e2 = std::max(1e-12, se_acc / meas_total);
    rep.after = pr;
    return rep;
}

} // namespace dyncs
