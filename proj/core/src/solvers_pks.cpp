#include "dyncs/solvers_pks.hpp"

#include <Eigen/QR>
#include <cmath>
#include <stdexcept>

#include "dyncs/rip.hpp"

namespace dyncs {

void PriorKnowledge::validate(Index m) const {
    t.check_range(m);
    if (tau < 0.0 || tau > 1.0) throw std::invalid_argument("PriorKnowledge: tau outside [0, 1]");
    if (lambda < 0.0 || gamma < 0.0) throw std::invalid_argument("PriorKnowledge: negative weight");
    if (mu_hat.size() != 0) {
        if (mu_hat.size() != m) throw std::invalid_argument("PriorKnowledge: mu_hat length");
        for (Index i = 0; i < m; ++i)
            if (mu_hat[i] != 0.0 && !t.contains(i))
                throw std::invalid_argument("PriorKnowledge: mu_hat has mass off T");
    }
}

namespace {

Vec weights_on_complement(Index m, const SupportSet& t, double on_t, double off_t) {
    Vec w = Vec::Constant(m, off_t);
    for (Index i : t) w[i] = on_t;
    return w;
}

} // namespace

SolverResult solve_lscs(const Problem& p, const SupportSet& t, const SolverOptions& opts) {
    const Index m = p.a.cols();
    Vec xinit = Vec::Zero(m);
    if (!t.empty()) xinit = scatter(pseudo_inverse_on_support(p.a, t, p.y), t, m);
    const Vec resid = p.y - p.a.apply(xinit);
    SolverResult corr = solve_constrained_l1(p.a, resid, Vec::Ones(m), p.eps, opts);
    corr.xhat += xinit;
    corr.objective = corr.xhat.cwiseAbs().sum();
    return corr;
}

SolverResult solve_modified_cs(const Problem& p, const SupportSet& t, bool noisy,
                               const SolverOptions& opts) {
    PriorKnowledge prior;
    prior.t = t;
    prior.tau = 0.0;
    return solve_weighted_l1_pks(p, prior, noisy, opts);
}

SolverResult solve_weighted_l1_pks(const Problem& p, const PriorKnowledge& prior, bool noisy,
                                   const SolverOptions& opts) {
    prior.validate(p.a.cols());
    const Vec w = weights_on_complement(p.a.cols(), prior.t, prior.tau, 1.0);
    return solve_weighted_l1({p.a, p.y, p.eps, p.gamma}, w,
                             noisy && p.eps > 0.0 ? Constraint::Ball : Constraint::Equality, opts);
}

SolverResult solve_reg_mod_bpdn(const Problem& p, const PriorKnowledge& prior,
                                const SolverOptions& opts) {
    prior.validate(p.a.cols());
    if (prior.gamma <= 0.0 && prior.lambda <= 0.0)
        throw std::invalid_argument("solve_reg_mod_bpdn: need gamma > 0 or lambda > 0");
    LagrangianSpec spec;
    spec.weights = weights_on_complement(p.a.cols(), prior.t, 0.0, prior.gamma);
    spec.lambda = prior.lambda;
    spec.prior_set = &prior.t;
    spec.mu = prior.mu_hat.size() > 0 ? &prior.mu_hat : nullptr;
    return solve_lagrangian_l1(p.a, p.y, spec, opts);
}

SolverResult solve_mod_bpdn(const Problem& p, const SupportSet& t, double gamma,
                            const SolverOptions& opts) {
    PriorKnowledge prior;
    prior.t = t;
    prior.gamma = gamma;
    prior.lambda = 0.0;
    return solve_reg_mod_bpdn(p, prior, opts);
}

SolverResult solve_mod_bpdn_residual(const Problem& p, const PriorKnowledge& prior,
                                     const SolverOptions& opts) {
    prior.validate(p.a.cols());
    const Index m = p.a.cols();
    const Vec mu = prior.mu_hat.size() > 0 ? prior.mu_hat : Vec::Zero(m);
    const Vec y_res = p.y - p.a.apply(mu);
    LagrangianSpec spec;
    spec.weights = weights_on_complement(m, prior.t, 0.0, prior.gamma);
    SolverResult res = solve_lagrangian_l1(p.a, y_res, spec, opts);
    res.xhat += mu;
    return res;
}

Vec iht_pks_iterate(const MeasurementOperator& a, const Vec& y, const SupportSet& t, Index s,
                    const Vec& x, double rescale) {
    const double c2 = rescale * rescale;
    const Vec b = x + a.adjoint(y - a.apply(x)) / c2;
    Vec off = b;
    for (Index i : t) off[i] = 0.0;
    Vec out = hard_threshold(off, s - t.size());
    for (Index i : t) out[i] = b[i];
    return out;
}

SolverResult solve_iht_pks(const Problem& p, const SupportSet& t, Index s,
                           const SolverOptions& opts) {
    if (t.size() > s) throw std::invalid_argument("solve_iht_pks: |T| must be <= s");
    t.check_range(p.a.cols());
    const double nrm = p.a.op_norm();
    const double c = nrm > 1.0 ? nrm : 1.0;
    Vec x = opts.warm_start != nullptr ? *opts.warm_start : Vec::Zero(p.a.cols());
    SolverResult res;
    res.status = SolverStatus::MaxIter;
    int it = 0;
    for (; it < opts.max_iter; ++it) {
        Vec xn = iht_pks_iterate(p.a, p.y, t, s, x, c);
        const double change = (xn - x).norm();
        x = std::move(xn);
        if (change <= opts.tol * std::max(1.0, x.norm())) {
            res.status = SolverStatus::Converged;
            res.kkt_residual = change;
            ++it;
            break;
        }
        res.kkt_residual = change;
    }
    res.xhat = std::move(x);
    res.iterations = it;
    res.objective = (p.y - p.a.apply(res.xhat)).norm();
    return res;
}

SolverResult solve_modcs_projected(const Problem& p, const SupportSet& t,
                                   const SolverOptions& opts) {
    const Index m = p.a.cols();
    t.check_range(m);
    if (t.empty()) return solve_constrained_l1(p.a, p.y, Vec::Ones(m), 0.0, opts);

    const Mat at = p.a.extract_columns(t);
    Eigen::ColPivHouseholderQR<Mat> qr(at);
    if (qr.rank() < t.size()) throw std::runtime_error("solve_modcs_projected: A_T rank-deficient");
    const Mat q = Eigen::HouseholderQR<Mat>(at).householderQ() * Mat::Identity(at.rows(), t.size());

    const SupportSet tc = t.complement(m);
    Mat atc = p.a.extract_columns(tc);
    Mat proj = atc - q * (q.transpose() * atc);
    Vec y_proj = p.y - q * (q.transpose() * p.y);

    const MeasurementOperator ap = MeasurementOperator::dense(std::move(proj));
    SolverResult inner = solve_constrained_l1(ap, y_proj, Vec::Ones(tc.size()), 0.0, opts);

    const Vec x_tc = inner.xhat;
    const Vec y_rem = p.y - atc * x_tc;
    const Vec x_t = pseudo_inverse_on_support(p.a, t, y_rem);

    SolverResult res = std::move(inner);
    res.xhat = scatter(x_tc, tc, m) + scatter(x_t, t, m);
    res.objective = 0.0;
    for (Index k = 0; k < tc.size(); ++k) res.objective += std::abs(x_tc[k]);
    return res;
}

} // namespace dyncs
