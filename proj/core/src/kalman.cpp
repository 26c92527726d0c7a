#include "dyncs/kalman.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

#include "dyncs/engine.hpp"
#include "dyncs/support_est.hpp"

namespace dyncs {

KfState KfState::initial(const Vec& x0, const SupportSet& n0, double sigma_sys02, Index m) {
    KfState st;
    st.xhat = x0;
    st.support = n0;
    st.tracked = n0;
    st.p = sigma_sys02 * Mat::Identity(n0.size(), n0.size());
    (void)m;
    return st;
}

void KfState::ensure_tracked(const SupportSet& s) {
    const SupportSet merged = tracked.set_union(s);
    if (merged == tracked) return;
    Mat grown = Mat::Zero(merged.size(), merged.size());
    // old tracked indices inside the merged ordering
    std::vector<Index> pos(static_cast<std::size_t>(tracked.size()));
    for (Index k = 0; k < tracked.size(); ++k) {
        const auto& idx = merged.indices();
        pos[static_cast<std::size_t>(k)] =
            static_cast<Index>(std::lower_bound(idx.begin(), idx.end(), tracked[k]) - idx.begin());
    }
    for (Index i = 0; i < tracked.size(); ++i)
        for (Index j = 0; j < tracked.size(); ++j)
            grown(pos[static_cast<std::size_t>(i)], pos[static_cast<std::size_t>(j)]) = p(i, j);
    p = std::move(grown);
    tracked = merged;
}

Mat KfState::dense_cov(Index m) const {
    Mat full = Mat::Zero(m, m);
    for (Index i = 0; i < tracked.size(); ++i)
        for (Index j = 0; j < tracked.size(); ++j) full(tracked[i], tracked[j]) = p(i, j);
    return full;
}

std::pair<double, double> KfState::cov_health() const {
    if (p.size() == 0) return {0.0, 0.0};
    const double asym = (p - p.transpose()).cwiseAbs().maxCoeff();
    Eigen::SelfAdjointEigenSolver<Mat> eig(0.5 * (p + p.transpose()), Eigen::EigenvaluesOnly);
    return {asym, eig.eigenvalues().minCoeff()};
}

void step_kf_modcs(KfState& state, const Vec& y, const MeasurementOperator& a,
                   const KfModCsConfig& cfg) {
    if (cfg.sigma_sys2 < 0.0 || cfg.sigma_obs2 <= 0.0)
        throw std::invalid_argument("step_kf_modcs: variances must be positive");
    const Index m = a.cols();
    const SupportSet t = state.support;

    // residual l1 solve around the previous mean proposes the support
    LagrangianSpec spec;
    spec.weights = Vec::Constant(m, cfg.gamma);
    for (Index i : t) spec.weights[i] = 0.0;
    SolverOptions opts = cfg.solver;
    SolverResult inner = solve_lagrangian_l1(a, y - a.apply(state.xhat), spec, opts);
    const Vec x_mod = state.xhat + inner.xhat;

    if (!cfg.pin_support) state.support = estimate_support_simple(x_mod, cfg.alpha);

    // Kalman update with Q restricted to the new support
    state.ensure_tracked(state.support);
    const SupportSet& u = state.tracked;
    const Index nu = u.size();
    if (nu == 0) return;

    Mat pq = state.p;
    for (Index k = 0; k < nu; ++k)
        if (state.support.contains(u[k])) pq(k, k) += cfg.sigma_sys2;

    const Mat au = a.extract_columns(u); // n x |U|
    const Mat pa = pq * au.transpose();  // |U| x n
    Mat s = au * pa;
    s.diagonal().array() += cfg.sigma_obs2;
    Eigen::LLT<Mat> llt(s);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("step_kf_modcs: innovation covariance not positive definite "
                                 "(conditioning failure)");
    const Mat k_gain = llt.solve(pa.transpose()).transpose(); // |U| x n

    const Vec innov = y - a.apply(state.xhat);
    const Vec dx = k_gain * innov;
    for (Index k = 0; k < nu; ++k) state.xhat[u[k]] += dx[k];
    Mat pnew = pq - k_gain * (au * pq);
    state.p = 0.5 * (pnew + pnew.transpose());
}

PmCsKfState PmCsKfState::initial(const Vec& x0, double sigma_sys02) {
    PmCsKfState st;
    st.xhat = x0;
    st.p = sigma_sys02 * Mat::Identity(x0.size(), x0.size());
    return st;
}

void step_pm_cs_kf(PmCsKfState& state, const Vec& y, const MeasurementOperator& a,
                   const PmCsKfConfig& cfg) {
    if (cfg.sigma_sys2 < 0.0 || cfg.sigma_obs2 <= 0.0 || cfg.r_eps <= 0.0)
        throw std::invalid_argument("step_pm_cs_kf: variances must be positive");
    if (cfg.pseudo_iterations < 1)
        throw std::invalid_argument("step_pm_cs_kf: need at least one filter pass");
    const Index m = a.cols();
    // predict (identity transition)
    Mat p = state.p;
    p.diagonal().array() += cfg.sigma_sys2;

    // measurement update
    const Mat ad = a.to_dense();
    const Mat pa = p * ad.transpose();
    Mat s = ad * pa;
    s.diagonal().array() += cfg.sigma_obs2;
    Eigen::LLT<Mat> llt(s);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("step_pm_cs_kf: innovation covariance not positive definite");
    const Mat k_gain = llt.solve(pa.transpose()).transpose();
    state.xhat += k_gain * (y - ad * state.xhat);
    p = p - k_gain * (ad * p);

    // sign-based pseudo-measurement contraction
    for (int tau = 0; tau + 1 < cfg.pseudo_iterations; ++tau) {
        Vec h(m);
        for (Index i = 0; i < m; ++i)
            h[i] = state.xhat[i] > 0.0 ? 1.0 : (state.xhat[i] < 0.0 ? -1.0 : 0.0);
        const Vec ph = p * h;
        double denom = h.dot(ph) + cfg.r_eps;
        if (denom <= 0.0) {
            denom = std::abs(denom) + 1e-12;
            ++state.jitter_events;
        }
        const Vec k_tau = ph / denom;
        state.xhat -= k_tau * h.dot(state.xhat);
        p -= k_tau * ph.transpose();
    }
    state.p = 0.5 * (p + p.transpose());
}

} // namespace dyncs
