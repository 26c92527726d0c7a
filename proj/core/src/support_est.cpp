#include "dyncs/support_est.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "dyncs/rip.hpp"

namespace dyncs {

SupportSet estimate_support_simple(const Vec& xhat, double alpha) {
    if (alpha < 0.0) throw std::invalid_argument("estimate_support_simple: alpha < 0");
    return SupportSet::from_nonzeros(xhat, alpha);
}

AddLsDelResult estimate_support_add_ls_del(const Vec& y, const MeasurementOperator& a,
                                           const SupportSet& t_prev, const Vec& xhat,
                                           const SupportEstimatorConfig& cfg) {
    AddLsDelResult out;
    out.t_add = t_prev.set_union(estimate_support_simple(xhat, cfg.alpha_add));
    if (out.t_add.size() > a.rows())
        throw std::runtime_error("estimate_support_add_ls_del: |T_add| exceeds measurement count");
    Vec x_add = Vec::Zero(a.cols());
    if (!out.t_add.empty())
        x_add = scatter(pseudo_inverse_on_support(a, out.t_add, y), out.t_add, a.cols());
    std::vector<Index> kept;
    for (Index i : out.t_add)
        if (std::abs(x_add[i]) > cfg.alpha_del) kept.push_back(i);
    out.support = SupportSet(std::move(kept));
    out.x_final = Vec::Zero(a.cols());
    if (!out.support.empty())
        out.x_final = scatter(pseudo_inverse_on_support(a, out.support, y), out.support, a.cols());
    return out;
}

double auto_alpha(const Vec& xhat_ref, const SupportEstimatorConfig& cfg) {
    const double energy = xhat_ref.squaredNorm();
    if (energy <= 0.0) throw std::invalid_argument("auto_alpha: reference vector is zero");
    Vec mags = xhat_ref.cwiseAbs();
    std::sort(mags.data(), mags.data() + mags.size(), std::greater<double>());
    double cum = 0.0;
    double alpha0 = mags[0];
    for (Index i = 0; i < mags.size(); ++i) {
        cum += mags[i] * mags[i];
        alpha0 = mags[i];
        if (cum >= cfg.energy_fraction * energy) break;
    }
    return cfg.alpha_scale * alpha0;
}

AddDelThresholds auto_alpha_add_del(const Vec& y, const MeasurementOperator& a,
                                    const SupportSet& t_prev, const Vec& xhat,
                                    const Vec& xhat_prev, const SupportEstimatorConfig& cfg) {
    const Index m = a.cols();
    AddDelThresholds out;

    // candidates off t_prev in descending magnitude
    std::vector<Index> cand;
    for (Index i = 0; i < m; ++i)
        if (!t_prev.contains(i) && xhat[i] != 0.0) cand.push_back(i);
    std::sort(cand.begin(), cand.end(), [&](Index i, Index j) {
        const double ai = std::abs(xhat[i]), aj = std::abs(xhat[j]);
        return ai != aj ? ai > aj : i < j;
    });

    auto sigma_min_ok = [&](const SupportSet& s) {
        if (s.empty()) return true;
        if (s.size() > a.rows()) return false;
        Eigen::JacobiSVD<Mat> svd(a.extract_columns(s));
        return svd.singularValues()[svd.singularValues().size() - 1] >= cfg.sigma_min_target;
    };

    SupportSet t_add = t_prev;
    if (!sigma_min_ok(t_add))
        throw std::runtime_error("auto_alpha_add_del: sigma_min target fails already at T_add = T_prev");
    // admit whole equal-magnitude levels so the result is a true threshold set
    out.alpha_add = 0.0;
    std::size_t k = 0;
    while (k < cand.size()) {
        const double level = std::abs(xhat[cand[k]]);
        SupportSet trial = t_add;
        std::size_t k_end = k;
        while (k_end < cand.size() && std::abs(xhat[cand[k_end]]) == level) {
            trial.insert(cand[k_end]);
            ++k_end;
        }
        if (!sigma_min_ok(trial)) {
            out.alpha_add = level;
            break;
        }
        t_add = std::move(trial);
        k = k_end;
    }

    double xhat_min = 0.0;
    if (!t_prev.empty()) {
        xhat_min = std::numeric_limits<double>::infinity();
        for (Index i : t_prev) xhat_min = std::min(xhat_min, std::abs(xhat_prev[i]));
    }
    double resid_term = 0.0;
    if (!t_add.empty()) {
        const Vec resid = y - a.apply(xhat);
        resid_term = pseudo_inverse_on_support(a, t_add, resid).lpNorm<Eigen::Infinity>();
    }
    out.alpha_del = std::max(0.0, 0.7 * xhat_min - resid_term);
    return out;
}

} // namespace dyncs
