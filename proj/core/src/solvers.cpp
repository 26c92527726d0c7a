#include "dyncs/solvers.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "dyncs/rip.hpp"

namespace dyncs {

SolverResult solve_weighted_l1(const Problem& p, const Vec& weights, Constraint constraint,
                               const SolverOptions& opts) {
    for (Index i = 0; i < weights.size(); ++i)
        if (!std::isfinite(weights[i])) throw std::invalid_argument("solve_weighted_l1: non-finite weight");
    const double eps = constraint == Constraint::Equality ? 0.0 : p.eps;
    return solve_constrained_l1(p.a, p.y, weights, eps, opts);
}

SolverResult solve_bpdn(const Problem& p, const SolverOptions& opts) {
    if (p.gamma <= 0.0) throw std::invalid_argument("solve_bpdn: gamma must be positive");
    LagrangianSpec spec;
    spec.weights = Vec::Constant(p.a.cols(), p.gamma);
    return solve_lagrangian_l1(p.a, p.y, spec, opts);
}

Vec hard_threshold(const Vec& v, Index s) {
    const Index m = v.size();
    if (s >= m) return v;
    Vec out = Vec::Zero(m);
    if (s <= 0) return out;
    std::vector<Index> idx(static_cast<std::size_t>(m));
    std::iota(idx.begin(), idx.end(), Index{0});
    std::partial_sort(idx.begin(), idx.begin() + s, idx.end(), [&](Index i, Index j) {
        const double ai = std::abs(v[i]), aj = std::abs(v[j]);
        return ai != aj ? ai > aj : i < j;
    });
    for (Index k = 0; k < s; ++k) out[idx[static_cast<std::size_t>(k)]] = v[idx[static_cast<std::size_t>(k)]];
    return out;
}

Vec iht_iterate(const MeasurementOperator& a, const Vec& y, Index s, const Vec& x, double rescale) {
    const double c2 = rescale * rescale;
    Vec g = a.adjoint(y - a.apply(x)) / c2;
    return hard_threshold(x + g, s);
}

SolverResult solve_iht(const Problem& p, Index s, const SolverOptions& opts) {
    const double nrm = p.a.op_norm();
    const double c = nrm > 1.0 ? nrm : 1.0;
    Vec x = opts.warm_start != nullptr ? *opts.warm_start : Vec::Zero(p.a.cols());
    SolverResult res;
    res.status = SolverStatus::MaxIter;
    int it = 0;
    for (; it < opts.max_iter; ++it) {
        Vec xn = iht_iterate(p.a, p.y, s, x, c);
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

SolverResult solve_omp(const Problem& p, Index s, const SupportSet& initial_support,
                       const SolverOptions& opts) {
    (void)opts;
    const Index m = p.a.cols();
    const Index n = p.a.rows();
    const Vec& col_norms = p.a.column_norms();
    SupportSet support = initial_support;
    support.check_range(m);

    Vec x = Vec::Zero(m);
    auto refit = [&]() {
        if (support.empty()) return;
        const Mat as = p.a.extract_columns(support);
        Eigen::ColPivHouseholderQR<Mat> qr(as);
        if (qr.rank() < support.size())
            throw std::runtime_error("solve_omp: selected sub-matrix is rank-deficient");
        x = scatter(qr.solve(p.y), support, m);
    };
    refit();

    int steps = 0;
    while (support.size() < std::min(s, n)) {
        const Vec r = p.y - p.a.apply(x);
        if (r.norm() <= std::max(p.eps, 1e-12 * (1.0 + p.y.norm()))) break;
        const Vec corr = p.a.adjoint(r);
        Index best = -1;
        double best_val = -1.0;
        for (Index i = 0; i < m; ++i) {
            if (support.contains(i) || col_norms[i] == 0.0) continue;
            const double v = std::abs(corr[i]) / col_norms[i];
            if (v > best_val) { // strict: ties keep the lowest index
                best_val = v;
                best = i;
            }
        }
        if (best < 0) break;
        support.insert(best);
        refit();
        ++steps;
    }
    SolverResult res;
    res.xhat = std::move(x);
    res.iterations = steps;
    const double resid = (p.y - p.a.apply(res.xhat)).norm();
    res.objective = resid;
    res.kkt_residual = resid;
    res.status = SolverStatus::Converged;
    return res;
}

namespace {

bool ls_fits(const MeasurementOperator& a, const Vec& y, const std::vector<Index>& sub, double fit_tol,
             Vec& out) {
    SupportSet s(sub);
    if (s.empty()) {
        out = Vec::Zero(a.cols());
        return y.norm() <= fit_tol;
    }
    const Mat as = a.extract_columns(s);
    Eigen::ColPivHouseholderQR<Mat> qr(as);
    const Vec bs = qr.solve(y);
    if ((as * bs - y).norm() > fit_tol) return false;
    out = scatter(bs, s, a.cols());
    return true;
}

} // namespace

L0Scan l0_scan(const Problem& p, Index s_max) {
    const Index m = p.a.cols();
    if (m > 20) throw std::invalid_argument("l0_scan: enumeration guard (m <= 20) exceeded");
    const double fit_tol = std::max(p.eps, 1e-9 * (1.0 + p.y.norm()));
    L0Scan scan;
    for (Index size = 0; size <= std::min(s_max, m); ++size) {
        std::vector<Vec> found;
        for_each_subset(m, size, [&](const std::vector<Index>& sub) {
            Vec sol;
            if (ls_fits(p.a, p.y, sub, fit_tol, sol)) found.push_back(std::move(sol));
        });
        if (!found.empty()) {
            scan.found = true;
            scan.support_size = size;
            for (auto& sol : found) {
                bool dup = false;
                for (const auto& kept : scan.solutions)
                    if ((kept - sol).norm() <= 1e-8 * (1.0 + kept.norm())) {
                        dup = true;
                        break;
                    }
                if (!dup) scan.solutions.push_back(std::move(sol));
            }
            break;
        }
    }
    return scan;
}

SolverResult solve_l0_bruteforce(const Problem& p, Index s_max) {
    L0Scan scan = l0_scan(p, s_max);
    SolverResult res;
    if (!scan.found) {
        res.xhat = Vec::Zero(p.a.cols());
        res.status = SolverStatus::Infeasible;
        return res;
    }
    res.xhat = scan.solutions.front();
    res.objective = static_cast<double>(scan.support_size);
    res.status = SolverStatus::Converged;
    res.degenerate = scan.solutions.size() > 1;
    return res;
}

} // namespace dyncs
