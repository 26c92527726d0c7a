#include "dyncs/tuning.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>
#include <cmath>
#include <map>
#include <stdexcept>

#include "dyncs/rip.hpp"
#include "dyncs/support_est.hpp"

namespace dyncs {

namespace {

double op2norm(const Mat& m) {
    if (m.rows() == 0 || m.cols() == 0) return 0.0;
    return Eigen::JacobiSVD<Mat>(m).singularValues()[0];
}

double inf_norm(const Mat& m) { // induced: max absolute row sum
    if (m.rows() == 0 || m.cols() == 0) return 0.0;
    return m.cwiseAbs().rowwise().sum().maxCoeff();
}

} // namespace

double bound_constant_c1(double delta) { return 4.0 * std::sqrt(1.0 + delta) / (1.0 - 2.0 * delta); }

BoundReport compute_bound(const MeasurementOperator& a, const Vec& x, const SupportSet& t,
                          const Vec& mu_hat, double lambda, double w_inf_bound, double w_2_bound) {
    const Index m = a.cols();
    const Index n = a.rows();
    t.check_range(m);
    if (x.size() != m) throw std::invalid_argument("compute_bound: x length");
    {
        const Vec& norms = a.column_norms();
        for (Index j = 0; j < m; ++j)
            if (std::abs(norms[j] - 1.0) > 1e-6)
                throw std::invalid_argument("compute_bound: columns must be unit-normalized");
    }
    const double w2 = w_2_bound >= 0.0 ? w_2_bound : std::sqrt(static_cast<double>(n)) * w_inf_bound;

    const SupportSet nset = SupportSet::from_nonzeros(x);
    const SupportSet delta_u = nset.set_difference(t);
    const Index ku = delta_u.size();

    // Delta_u ordered by decreasing |x|
    std::vector<Index> ordered(delta_u.indices());
    std::sort(ordered.begin(), ordered.end(), [&](Index i, Index j) {
        const double ai = std::abs(x[i]), aj = std::abs(x[j]);
        return ai != aj ? ai > aj : i < j;
    });

    const Mat at = a.extract_columns(t);
    const Index kt = t.size();
    Mat gram_t = at.transpose() * at + lambda * Mat::Identity(kt, kt);
    Eigen::FullPivLU<Mat> gram_t_lu(gram_t);
    BoundReport rep;
    rep.per_k_bounds.assign(static_cast<std::size_t>(ku) + 1,
                            std::numeric_limits<double>::infinity());
    if (kt > 0 && !gram_t_lu.isInvertible()) return rep; // lambda = 0 with rank-deficient A_T

    // M = I - A_T (A_T'A_T + lambda I)^{-1} A_T'
    Mat mmat = Mat::Identity(n, n);
    if (kt > 0) mmat -= at * gram_t_lu.solve(at.transpose());

    const double mu_diff = t.empty() ? 0.0 : (gather(x, t) - gather(mu_hat, t)).norm();

    for (Index k = 0; k <= ku; ++k) {
        SupportSet s(std::vector<Index>(ordered.begin(), ordered.begin() + k));
        const SupportSet ts = t.set_union(s);
        const SupportSet comp = ts.complement(m);
        const SupportSet rest = delta_u.set_difference(s);

        const Mat as = a.extract_columns(s);
        Mat cols_ts(n, kt + k);
        cols_ts.leftCols(kt) = at;
        cols_ts.rightCols(k) = as;

        Mat q = cols_ts.transpose() * cols_ts;
        for (Index i = 0; i < kt; ++i) q(i, i) += lambda;
        Eigen::FullPivLU<Mat> q_lu(q);
        if ((kt + k) > 0 && !q_lu.isInvertible()) continue;

        Mat p;
        double erc = 1.0;
        Mat comp_cols = a.extract_columns(comp);
        if (k > 0) {
            const Mat msa = mmat * as;
            Eigen::FullPivLU<Mat> p_lu(as.transpose() * msa);
            if (!p_lu.isInvertible()) continue;
            p = p_lu.inverse();
            if (comp.size() > 0) {
                const Mat probe = p * (msa.transpose() * comp_cols); // k x |comp|
                erc = 1.0 - probe.cwiseAbs().colwise().sum().maxCoeff();
            }
        } else {
            p = Mat(0, 0);
        }
        double maxcor = 0.0;
        if (comp.size() > 0 && (kt + k) > 0)
            maxcor = (comp_cols.transpose() * cols_ts).rowwise().norm().maxCoeff();

        const Mat q_inv = (kt + k) > 0 ? q_lu.inverse() : Mat(0, 0);
        double f1 = 0.0;
        if (k > 0) {
            double head = 0.0;
            if (kt > 0) head = op2norm(gram_t_lu.solve(at.transpose() * as) * p);
            const double tail = op2norm(p);
            f1 = std::sqrt(head * head + tail * tail);
        }
        const double f2 = op2norm(q_inv);
        const double f3 = (kt + k) > 0 ? op2norm(q_inv * cols_ts.transpose()) : 0.0;
        double f4 = 1.0;
        if (rest.size() > 0 && (kt + k) > 0) {
            const double head = op2norm(q_inv * (cols_ts.transpose() * a.extract_columns(rest)));
            f4 = std::sqrt(head * head + 1.0);
        }

        const double sk = std::sqrt(static_cast<double>(k));
        const double xrest = rest.empty() ? 0.0 : gather(x, rest).norm();

        if (erc <= 0.0) continue;
        const double ratio = sk * f1 * maxcor / erc;
        const double g1 = lambda * f2 * (ratio + 1.0);
        const double g2 = ratio * f3 + f3;
        const double g3 = ratio * f4 + f4;
        const double g4 = sk * inf_norm(comp_cols) * w_inf_bound * f1 / erc;
        const double gamma_star =
            (maxcor / erc) * (lambda * f2 * mu_diff + f3 * w2 + f4 * xrest) + w_inf_bound / erc;
        const double bound = g1 * mu_diff + g2 * w2 + g3 * xrest + g4;

        rep.per_k_bounds[static_cast<std::size_t>(k)] = bound;
        if (bound < rep.bound) {
            rep.feasible = true;
            rep.k_min = k;
            rep.delta_tilde_star = s;
            rep.gamma_star = gamma_star;
            rep.bound = bound;
            rep.erc = erc;
            rep.maxcor = maxcor;
            rep.f1 = f1;
            rep.f2 = f2;
            rep.f3 = f3;
            rep.f4 = f4;
            rep.g1 = g1;
            rep.g2 = g2;
            rep.g3 = g3;
            rep.g4 = g4;
        }
    }
    return rep;
}

const std::vector<double>& default_lambda_grid() {
    static const std::vector<double> grid = {0.5, 0.2, 0.1, 0.05, 0.01, 0.005, 0.001, 0.0001};
    return grid;
}

TunedParams tune_gamma_lambda(const Vec& xhat1, const Vec& xhat2, const Vec& y2,
                              const MeasurementOperator& a, const std::vector<double>& lambda_grid) {
    auto [an, d] = normalize_columns(a);
    // move estimates into the unit-column frame: x_tilde = D^{-1} x
    Vec x1 = xhat1.cwiseQuotient(d);
    Vec x2 = xhat2.cwiseQuotient(d);

    TunedParams out;
    out.alpha = auto_alpha(x1);
    const SupportSet t = estimate_support_simple(x1, out.alpha);
    const SupportSet n2 = estimate_support_simple(x2, out.alpha);

    Vec x_proxy = Vec::Zero(x2.size());
    for (Index i : n2) x_proxy[i] = x2[i];
    Vec mu = Vec::Zero(x1.size());
    for (Index i : t) mu[i] = x1[i];

    const Vec resid = y2 - an.apply(x2);
    const double w_inf = resid.lpNorm<Eigen::Infinity>();
    const double w_2 = resid.norm();

    bool any = false;
    for (double lambda : lambda_grid) {
        BoundReport rep = compute_bound(an, x_proxy, t, mu, lambda, w_inf, w_2);
        if (!rep.feasible) continue;
        if (!any || rep.bound < out.report.bound) {
            any = true;
            out.report = rep;
            out.lambda = lambda;
            out.gamma = rep.gamma_star;
        }
    }
    if (!any) throw std::runtime_error("tune_gamma_lambda: every lambda grid point is infeasible");
    return out;
}

KfParams tune_kf_params(const Vec& xhat1, const Vec& xhat2, const Vec& y2,
                        const MeasurementOperator& a, double alpha) {
    const SupportSet n2 = estimate_support_simple(xhat2, alpha);
    if (n2.empty()) throw std::runtime_error("tune_kf_params: empty calibration support");
    double acc = 0.0;
    for (Index i : n2) {
        const double d = xhat2[i] - xhat1[i];
        acc += d * d;
    }
    KfParams p;
    p.sigma_sys2 = std::max(1e-12, acc / static_cast<double>(n2.size()));
    p.sigma_obs2 = std::max(1e-12, (y2 - a.apply(xhat2)).squaredNorm() / static_cast<double>(a.cols()));
    return p;
}

namespace {

class DeltaCache {
public:
    explicit DeltaCache(const MeasurementOperator& a) : a_(a) {}
    // returns false (not verifiable) when the order is out of range or the
    // enumeration guard trips
    bool get(Index order, double& out) {
        if (order <= 0) {
            out = 0.0;
            return true;
        }
        if (order > a_.cols()) return false;
        auto it = cache_.find(order);
        if (it != cache_.end()) {
            out = it->second;
            return true;
        }
        try {
            out = ric_bruteforce(a_, order).delta;
        } catch (const std::invalid_argument&) {
            return false;
        }
        cache_[order] = out;
        return true;
    }
    bool theta(Index s, Index st, double& out) {
        if (s <= 0 || st <= 0) {
            out = 0.0;
            return true;
        }
        if (s + st > a_.cols()) return false;
        const auto key = std::make_pair(std::min(s, st), std::max(s, st));
        auto it = tcache_.find(key);
        if (it != tcache_.end()) {
            out = it->second;
            return true;
        }
        try {
            out = *roc_bruteforce(a_, key.first, key.second).theta;
        } catch (const std::invalid_argument&) {
            return false;
        }
        tcache_[key] = out;
        return true;
    }

private:
    const MeasurementOperator& a_;
    std::map<Index, double> cache_;
    std::map<std::pair<Index, Index>, double> tcache_;
};

CheckCondition delta_condition(DeltaCache& cache, const std::string& name, Index order,
                               double threshold, bool strict = true) {
    CheckCondition c;
    c.name = name;
    c.threshold = threshold;
    double d = 0.0;
    if (!cache.get(order, d)) {
        c.verifiable = false;
        return c;
    }
    c.value = d;
    c.pass = strict ? d < threshold : d <= threshold;
    return c;
}

bool all_subsets_full_rank(const MeasurementOperator& a, Index r) {
    if (r <= 0) return true;
    if (r > std::min(a.rows(), a.cols())) return false;
    if (subset_count(a.cols(), r) > 1e7)
        throw std::invalid_argument("rank check: enumeration guard exceeded");
    const Mat& ad = a.to_dense();
    const double scale = a.column_norms().maxCoeff();
    bool ok = true;
    for_each_subset(a.cols(), r, [&](const std::vector<Index>& sub) {
        if (!ok) return;
        Mat block(ad.rows(), r);
        for (Index i = 0; i < r; ++i) block.col(i) = ad.col(sub[static_cast<std::size_t>(i)]);
        Eigen::JacobiSVD<Mat> svd(block);
        if (svd.singularValues()[r - 1] <= 1e-8 * scale) ok = false;
    });
    return ok;
}

} // namespace

const char* to_string(RecoveryChecker c) {
    switch (c) {
        case RecoveryChecker::BpExact: return "bp-exact";
        case RecoveryChecker::BpNoisyBound: return "bp-noisy-bound";
        case RecoveryChecker::ModL0Rank: return "mod-l0-rank";
        case RecoveryChecker::ModCsExact: return "modcs-exact";
        case RecoveryChecker::WeightedL1Exact: return "weighted-l1-exact";
        case RecoveryChecker::ProjectedModCsExact: return "projected-modcs-exact";
        case RecoveryChecker::ModCsNoisyBound: return "modcs-noisy-bound";
        case RecoveryChecker::IhtPksContraction: return "iht-pks-contraction";
        case RecoveryChecker::DynamicStability: return "dynamic-stability";
        case RecoveryChecker::DynamicStabilityModel: return "dynamic-stability-model";
    }
    return "?";
}

CheckReport check_exact_recovery_conditions(RecoveryChecker which, const MeasurementOperator& a,
                                            const CheckerSizes& z) {
    CheckReport rep;
    DeltaCache cache(a);
    const double sqrt2m1 = std::sqrt(2.0) - 1.0;

    switch (which) {
        case RecoveryChecker::BpExact: {
            rep.conditions.push_back(delta_condition(cache, "delta_2s < sqrt(2)-1", 2 * z.s, sqrt2m1));
            rep.all_pass = rep.conditions[0].pass;
            break;
        }
        case RecoveryChecker::BpNoisyBound: {
            auto c = delta_condition(cache, "delta_2s < 0.207", 2 * z.s, 0.207);
            rep.conditions.push_back(c);
            if (c.pass) {
                CheckCondition b;
                b.name = "C1(2s) <= 7.50";
                b.value = bound_constant_c1(c.value);
                b.threshold = 7.50;
                b.pass = b.value <= 7.50;
                rep.conditions.push_back(b);
            }
            rep.all_pass = c.pass;
            break;
        }
        case RecoveryChecker::ModL0Rank: {
            CheckCondition c;
            c.name = "every (k+2u)-column subset independent";
            c.threshold = 0.0;
            try {
                c.pass = all_subsets_full_rank(a, z.k + 2 * z.u);
                c.value = c.pass ? 1.0 : 0.0;
            } catch (const std::invalid_argument&) {
                c.verifiable = false;
            }
            rep.conditions.push_back(c);
            rep.all_pass = c.pass;
            break;
        }
        case RecoveryChecker::ModCsExact: {
            const Index k = z.k, u = z.u;
            auto c1a1 = delta_condition(cache, "delta_{k+u} < 1", k + u, 1.0);
            double dk = 0.0, d2u = 0.0, du = 0.0, d3u = 0.0, dku = 0.0, dk2u = 0.0;
            double th_k2u = 0.0, th_uk = 0.0, th_2uk = 0.0, th_u2u = 0.0, th_uu = 0.0;
            const bool have = cache.get(k, dk) && cache.get(2 * u, d2u) && cache.get(u, du) &&
                              cache.get(3 * u, d3u) && cache.get(k + u, dku) &&
                              cache.get(k + 2 * u, dk2u) && cache.theta(k, 2 * u, th_k2u) &&
                              cache.theta(u, k, th_uk) && cache.theta(2 * u, k, th_2uk) &&
                              cache.theta(u, 2 * u, th_u2u) && cache.theta(u, u, th_uu);
            CheckCondition c1a2;
            c1a2.name = "delta_2u + delta_k + theta_{k,2u}^2 < 1";
            c1a2.threshold = 1.0;
            if (have) {
                c1a2.value = d2u + dk + th_k2u * th_k2u;
                c1a2.pass = c1a2.value < 1.0;
            } else {
                c1a2.verifiable = false;
            }
            CheckCondition c1b;
            c1b.name = "a_k(2u,u) + a_k(u,u) < 1";
            c1b.threshold = 1.0;
            if (have && dk < 1.0) {
                auto a_k = [&](double theta_chk_i, double theta_chk_k, double theta_i_k,
                               double delta_i) -> std::optional<double> {
                    const double den = 1.0 - delta_i - theta_i_k * theta_i_k / (1.0 - dk);
                    if (den <= 0.0) return std::nullopt;
                    return (theta_chk_i + theta_chk_k * theta_i_k / (1.0 - dk)) / den;
                };
                // a_k(2u, u): i = 2u, check = u ; a_k(u, u): i = u, check = u
                const auto a1 = a_k(th_u2u, th_uk, th_2uk, d2u);
                const auto a2 = a_k(th_uu, th_uk, th_uk, du);
                if (a1 && a2) {
                    c1b.value = *a1 + *a2;
                    c1b.pass = c1b.value < 1.0;
                } else {
                    c1b.verifiable = false; // denominator nonpositive: not verifiable
                }
            } else {
                c1b.verifiable = false;
            }
            CheckCondition c2;
            c2.name = "2 delta_2u + delta_3u + delta_k + delta_{k+u}^2 + 2 delta_{k+2u}^2 < 1";
            c2.threshold = 1.0;
            if (have) {
                c2.value = 2.0 * d2u + d3u + dk + dku * dku + 2.0 * dk2u * dk2u;
                c2.pass = c2.value < 1.0;
            } else {
                c2.verifiable = false;
            }
            auto c3 = delta_condition(cache, "delta_{k+2u} <= 0.2", k + 2 * u, 0.2, /*strict=*/false);
            rep.conditions = {c1a1, c1a2, c1b, c2, c3};
            rep.all_pass = (c1a1.pass && c1a2.pass && c1b.pass) || c2.pass || c3.pass;
            break;
        }
        case RecoveryChecker::WeightedL1Exact: {
            const double s = static_cast<double>(z.s);
            const double alpha = (s - static_cast<double>(z.u)) / (s + static_cast<double>(z.e - z.u));
            const double rho = (s + static_cast<double>(z.e - z.u)) / s;
            const double gamma = z.tau + (1.0 - z.tau) * std::sqrt(1.0 + rho - 2.0 * alpha * rho);
            bool any = false;
            const Index j_lo = static_cast<Index>(std::floor(std::max(1.0, (1.0 - alpha) * rho) * s)) + 1;
            for (Index j = j_lo; j + z.s <= a.cols(); ++j) {
                const double aa = static_cast<double>(j) / s;
                double dj = 0.0, djs = 0.0;
                if (!cache.get(j, dj) || !cache.get(j + z.s, djs)) break;
                const double lhs = dj + (aa / (gamma * gamma)) * djs;
                const double rhs = aa / (gamma * gamma) - 1.0;
                CheckCondition c;
                c.name = "delta_{as} + (a/g^2) delta_{(a+1)s} < a/g^2 - 1 at a=" +
                         std::to_string(aa);
                c.value = lhs;
                c.threshold = rhs;
                c.pass = lhs < rhs;
                rep.conditions.push_back(c);
                if (c.pass) {
                    any = true;
                    break;
                }
            }
            auto weak = delta_condition(cache, "delta_2s <= 1/(sqrt(2) gamma + 1)", 2 * z.s,
                                        1.0 / (std::sqrt(2.0) * gamma + 1.0), /*strict=*/false);
            rep.conditions.push_back(weak);
            rep.all_pass = any || weak.pass;
            break;
        }
        case RecoveryChecker::ProjectedModCsExact: {
            CheckCondition c;
            c.name = "partial delta_{2u}^k < sqrt(2)-1";
            c.threshold = sqrt2m1;
            try {
                c.value = partial_ric_bruteforce(a, z.k, 2 * z.u).delta;
                c.pass = c.value < c.threshold;
            } catch (const std::invalid_argument&) {
                c.verifiable = false;
            }
            rep.conditions.push_back(c);
            rep.all_pass = c.pass;
            break;
        }
        case RecoveryChecker::ModCsNoisyBound: {
            auto c = delta_condition(cache, "delta_{k+3u} < (sqrt(2)-1)/2", z.k + 3 * z.u, sqrt2m1 / 2.0);
            rep.conditions.push_back(c);
            if (c.pass) {
                CheckCondition b;
                b.name = "C1(k+3u) <= 7.50";
                b.value = bound_constant_c1(c.value);
                b.threshold = 7.50;
                b.pass = b.value <= 7.50;
                rep.conditions.push_back(b);
            }
            rep.all_pass = c.pass;
            break;
        }
        case RecoveryChecker::IhtPksContraction: {
            CheckCondition cn;
            cn.name = "||A||_2 < 1";
            cn.value = a.op_norm();
            cn.threshold = 1.0;
            cn.pass = cn.value < 1.0;
            auto cd = delta_condition(cache, "delta_{3s-2k} < 1/sqrt(32)", 3 * z.s - 2 * z.k,
                                      1.0 / std::sqrt(32.0));
            rep.conditions = {cn, cd};
            rep.all_pass = cn.pass && cd.pass;
            break;
        }
        case RecoveryChecker::DynamicStability: {
            auto c = delta_condition(cache, "delta_{s+6s_a} <= 0.207", z.s + 6 * z.s_a, 0.207,
                                     /*strict=*/false);
            rep.conditions.push_back(c);
            rep.all_pass = c.pass;
            break;
        }
        case RecoveryChecker::DynamicStabilityModel: {
            const Index order = z.s + 3 * (z.b + z.d0 + 1) * z.s_a;
            auto c = delta_condition(cache, "delta_{s+3(b+d0+1)s_a} <= 0.207", order, 0.207,
                                     /*strict=*/false);
            rep.conditions.push_back(c);
            rep.all_pass = c.pass;
            break;
        }
    }
    return rep;
}

bool stability_small_entry_cap_ok(const SequenceTrace& tr, double alpha, double eps, Index s_a) {
    for (std::size_t t = 0; t < tr.x.size(); ++t) {
        Index small = 0;
        for (Index i : tr.support[t])
            if (std::abs(tr.x[t][i]) <= alpha + 7.50 * eps) ++small;
        if (small > s_a) return false;
    }
    return true;
}

} // namespace dyncs
