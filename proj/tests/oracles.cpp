#include "oracles.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <functional>

namespace oracles {

Vec column_norms(const Mat& a) {
    Vec out(a.cols());
    for (Index j = 0; j < a.cols(); ++j) {
        double acc = 0.0;
        for (Index i = 0; i < a.rows(); ++i) acc += a(i, j) * a(i, j);
        out[j] = std::sqrt(acc);
    }
    return out;
}

namespace {

void subsets_rec(Index m, Index s, Index start, std::vector<Index>& cur,
                 const std::function<void(const std::vector<Index>&)>& fn) {
    if (static_cast<Index>(cur.size()) == s) {
        fn(cur);
        return;
    }
    for (Index i = start; i <= m - (s - static_cast<Index>(cur.size())); ++i) {
        cur.push_back(i);
        subsets_rec(m, s, i + 1, cur, fn);
        cur.pop_back();
    }
}

} // namespace

double ric(const Mat& a, Index s) {
    double delta = 0.0;
    std::vector<Index> cur;
    subsets_rec(a.cols(), s, 0, cur, [&](const std::vector<Index>& sub) {
        Mat block(a.rows(), static_cast<Index>(sub.size()));
        for (std::size_t k = 0; k < sub.size(); ++k) block.col(static_cast<Index>(k)) = a.col(sub[k]);
        Eigen::JacobiSVD<Mat> svd(block);
        const double smax = svd.singularValues()[0];
        const double smin = svd.singularValues()[svd.singularValues().size() - 1];
        delta = std::max({delta, smax * smax - 1.0, 1.0 - smin * smin});
    });
    return delta;
}

double pairwise_coherence(const Mat& a) {
    double best = 0.0;
    for (Index i = 0; i < a.cols(); ++i)
        for (Index j = i + 1; j < a.cols(); ++j) best = std::max(best, std::abs(a.col(i).dot(a.col(j))));
    return best;
}

Vec pinv_normal_equations(const Mat& a, const std::vector<Index>& t, const Vec& y) {
    Mat at(a.rows(), static_cast<Index>(t.size()));
    for (std::size_t k = 0; k < t.size(); ++k) at.col(static_cast<Index>(k)) = a.col(t[k]);
    const Mat gram = at.transpose() * at;
    return Eigen::FullPivLU<Mat>(gram).solve(at.transpose() * y);
}

bool l1_half_concentrated(const Vec& v, Index s) {
    std::vector<double> mags(static_cast<std::size_t>(v.size()));
    for (Index i = 0; i < v.size(); ++i) mags[static_cast<std::size_t>(i)] = std::abs(v[i]);
    std::sort(mags.begin(), mags.end(), std::greater<double>());
    double total = 0.0, top = 0.0;
    for (std::size_t i = 0; i < mags.size(); ++i) {
        total += mags[i];
        if (static_cast<Index>(i) < s) top += mags[i];
    }
    return top >= 0.5 * total;
}

double energy_alpha0(const Vec& v, double fraction) {
    std::vector<double> mags(static_cast<std::size_t>(v.size()));
    for (Index i = 0; i < v.size(); ++i) mags[static_cast<std::size_t>(i)] = std::abs(v[i]);
    std::sort(mags.begin(), mags.end(), std::greater<double>());
    double total = 0.0;
    for (double m : mags) total += m * m;
    double cum = 0.0;
    for (double m : mags) {
        cum += m * m;
        if (cum >= fraction * total) return m;
    }
    return mags.back();
}

double alpha_add_svd_scan(const Mat& a, const SupportSet& t_prev, const Vec& xhat,
                          double sigma_target) {
    // candidate thresholds: every off-support magnitude level plus zero
    std::vector<double> levels = {0.0};
    for (Index i = 0; i < xhat.size(); ++i)
        if (!t_prev.contains(i) && xhat[i] != 0.0) levels.push_back(std::abs(xhat[i]));
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    auto ok = [&](double alpha) {
        std::vector<Index> idx(t_prev.indices());
        for (Index i = 0; i < xhat.size(); ++i)
            if (!t_prev.contains(i) && std::abs(xhat[i]) > alpha) idx.push_back(i);
        std::sort(idx.begin(), idx.end());
        if (idx.empty()) return true;
        if (static_cast<Index>(idx.size()) > a.rows()) return false;
        Mat block(a.rows(), static_cast<Index>(idx.size()));
        for (std::size_t k = 0; k < idx.size(); ++k) block.col(static_cast<Index>(k)) = a.col(idx[k]);
        Eigen::JacobiSVD<Mat> svd(block);
        return svd.singularValues()[svd.singularValues().size() - 1] >= sigma_target;
    };
    for (double alpha : levels)
        if (ok(alpha)) return alpha;
    return levels.back();
}

std::vector<Vec> genie_kf(const Mat& a_full, const std::vector<Index>& support,
                          const std::vector<Vec>& ys, double sigma_sys2, double sigma_sys02,
                          double sigma_obs2, const Vec& x0_full) {
    const Index k = static_cast<Index>(support.size());
    Mat an(a_full.rows(), k);
    for (Index i = 0; i < k; ++i) an.col(i) = a_full.col(support[static_cast<std::size_t>(i)]);
    Vec mean(k);
    for (Index i = 0; i < k; ++i) mean[i] = x0_full[support[static_cast<std::size_t>(i)]];
    Mat p = sigma_sys02 * Mat::Identity(k, k);
    std::vector<Vec> out;
    for (const Vec& y : ys) {
        Mat pq = p + sigma_sys2 * Mat::Identity(k, k);
        Mat s = an * pq * an.transpose();
        s.diagonal().array() += sigma_obs2;
        const Mat gain = pq * an.transpose() * s.llt().solve(Mat::Identity(s.rows(), s.cols()));
        mean = mean + gain * (y - an * mean);
        p = (Mat::Identity(k, k) - gain * an) * pq;
        Vec full = Vec::Zero(a_full.cols());
        for (Index i = 0; i < k; ++i) full[support[static_cast<std::size_t>(i)]] = mean[i];
        out.push_back(std::move(full));
    }
    return out;
}

double scalar_bpdn(double y, double gamma) {
    if (y > gamma) return y - gamma;
    if (y < -gamma) return y + gamma;
    return 0.0;
}

} // namespace oracles
