#include "dyncs/rip.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "dyncs/rng.hpp"

namespace dyncs {

namespace {
constexpr double kEnumGuard = 1e7;
constexpr double kRankGuard = 1e-8; // sigma_min >= guard * sigma_max
} // namespace

double subset_count(Index m, Index s) {
    if (s < 0 || s > m) return 0.0;
    double c = 1.0;
    for (Index i = 0; i < s; ++i) {
        c *= static_cast<double>(m - i) / static_cast<double>(i + 1);
        if (c > 1e18) return c;
    }
    return c;
}

void for_each_subset(Index m, Index s, const std::function<void(const std::vector<Index>&)>& fn) {
    if (s > m) return;
    std::vector<Index> idx(static_cast<std::size_t>(s));
    for (Index i = 0; i < s; ++i) idx[static_cast<std::size_t>(i)] = i;
    if (s == 0) {
        fn(idx);
        return;
    }
    while (true) {
        fn(idx);
        Index i = s - 1;
        while (i >= 0 && idx[static_cast<std::size_t>(i)] == m - s + i) --i;
        if (i < 0) break;
        ++idx[static_cast<std::size_t>(i)];
        for (Index j = i + 1; j < s; ++j)
            idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
}

RipReport ric_bruteforce(const MeasurementOperator& a, Index s) {
    const Index m = a.cols();
    if (s < 1 || s > m) throw std::invalid_argument("ric_bruteforce: order out of range");
    if (subset_count(m, s) > kEnumGuard)
        throw std::invalid_argument("ric_bruteforce: C(m, s) exceeds enumeration guard; use a sampled bound instead");
    const Mat& ad = a.to_dense();
    const Mat gram = ad.transpose() * ad;
    double delta = 0.0;
    for_each_subset(m, s, [&](const std::vector<Index>& sub) {
        Mat g(s, s);
        for (Index i = 0; i < s; ++i)
            for (Index j = 0; j < s; ++j)
                g(i, j) = gram(sub[static_cast<std::size_t>(i)], sub[static_cast<std::size_t>(j)]);
        Eigen::SelfAdjointEigenSolver<Mat> eig(g, Eigen::EigenvaluesOnly);
        const double lmin = eig.eigenvalues().minCoeff();
        const double lmax = eig.eigenvalues().maxCoeff();
        delta = std::max({delta, std::abs(lmax - 1.0), std::abs(1.0 - lmin)});
    });
    RipReport r;
    r.s = s;
    r.delta = delta;
    r.exact = true;
    return r;
}

RipReport roc_bruteforce(const MeasurementOperator& a, Index s, Index s_tilde) {
    const Index m = a.cols();
    if (s < 1 || s_tilde < 1 || s + s_tilde > m)
        throw std::invalid_argument("roc_bruteforce: orders out of range");
    if (subset_count(m, s) * subset_count(m - s, s_tilde) > kEnumGuard)
        throw std::invalid_argument("roc_bruteforce: disjoint-pair enumeration exceeds guard");
    const Mat& ad = a.to_dense();
    const Mat gram = ad.transpose() * ad;
    double theta = 0.0;
    for_each_subset(m, s, [&](const std::vector<Index>& t1) {
        std::vector<Index> rest;
        rest.reserve(static_cast<std::size_t>(m - s));
        std::size_t p = 0;
        for (Index i = 0; i < m; ++i) {
            if (p < t1.size() && t1[p] == i) {
                ++p;
            } else {
                rest.push_back(i);
            }
        }
        for_each_subset(static_cast<Index>(rest.size()), s_tilde, [&](const std::vector<Index>& pick) {
            Mat cross(s, s_tilde);
            for (Index i = 0; i < s; ++i)
                for (Index j = 0; j < s_tilde; ++j)
                    cross(i, j) = gram(t1[static_cast<std::size_t>(i)],
                                       rest[static_cast<std::size_t>(pick[static_cast<std::size_t>(j)])]);
            Eigen::JacobiSVD<Mat> svd(cross);
            theta = std::max(theta, svd.singularValues()[0]);
        });
    });
    RipReport r;
    r.s = s;
    r.s_tilde = s_tilde;
    r.theta = theta;
    r.exact = true;
    return r;
}

RipReport partial_ric_bruteforce(const MeasurementOperator& a, Index k, Index u) {
    const Index m = a.cols();
    if (u < 1 || k < 0 || k + u > m) throw std::invalid_argument("partial_ric_bruteforce: orders out of range");
    if (k == 0) {
        RipReport r = ric_bruteforce(a, u);
        r.projected_known = 0;
        return r;
    }
    if (subset_count(m, k) * subset_count(m - k, u) > kEnumGuard)
        throw std::invalid_argument("partial_ric_bruteforce: enumeration exceeds guard");
    const Mat& ad = a.to_dense();
    const Index n = ad.rows();
    double delta = 0.0;
    for_each_subset(m, k, [&](const std::vector<Index>& tsub) {
        Mat at(n, k);
        for (Index i = 0; i < k; ++i) at.col(i) = ad.col(tsub[static_cast<std::size_t>(i)]);
        Eigen::HouseholderQR<Mat> qr(at);
        Mat q = qr.householderQ() * Mat::Identity(n, k);
        std::vector<Index> rest;
        std::size_t p = 0;
        for (Index i = 0; i < m; ++i) {
            if (p < tsub.size() && tsub[p] == i) {
                ++p;
            } else {
                rest.push_back(i);
            }
        }
        Mat proj(n, static_cast<Index>(rest.size()));
        for (std::size_t j = 0; j < rest.size(); ++j) {
            const Vec c = ad.col(rest[j]);
            proj.col(static_cast<Index>(j)) = c - q * (q.transpose() * c);
        }
        const Mat gram = proj.transpose() * proj;
        for_each_subset(static_cast<Index>(rest.size()), u, [&](const std::vector<Index>& pick) {
            Mat g(u, u);
            for (Index i = 0; i < u; ++i)
                for (Index j = 0; j < u; ++j)
                    g(i, j) = gram(pick[static_cast<std::size_t>(i)], pick[static_cast<std::size_t>(j)]);
            Eigen::SelfAdjointEigenSolver<Mat> eig(g, Eigen::EigenvaluesOnly);
            delta = std::max({delta, std::abs(eig.eigenvalues().maxCoeff() - 1.0),
                              std::abs(1.0 - eig.eigenvalues().minCoeff())});
        });
    });
    RipReport r;
    r.s = u;
    r.projected_known = k;
    r.delta = delta;
    r.exact = true;
    return r;
}

NspReport nsp_falsify(const MeasurementOperator& a, Index s, int samples, std::uint64_t seed) {
    const Mat& ad = a.to_dense();
    Eigen::JacobiSVD<Mat> svd(ad, Eigen::ComputeFullV);
    const Index m = ad.cols();
    const double smax = svd.singularValues().size() > 0 ? svd.singularValues()[0] : 0.0;
    Index rank = 0;
    for (Index i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()[i] > 1e-12 * std::max(1.0, smax)) ++rank;
    const Index nullity = m - rank;
    if (nullity <= 0) throw std::invalid_argument("nsp_falsify: trivial null space");

    auto check = [&](const Vec& v) -> bool {
        Vec mags = v.cwiseAbs();
        std::sort(mags.data(), mags.data() + mags.size(), std::greater<double>());
        const double total = mags.sum();
        double top = 0.0;
        for (Index i = 0; i < std::min(s, m); ++i) top += mags[i];
        return top >= 0.5 * total;
    };

    const Mat basis = svd.matrixV().rightCols(nullity);
    NspReport rep;
    if (nullity == 1) {
        rep.exact = true;
        Vec v = basis.col(0);
        if (check(v)) {
            rep.falsified = true;
            rep.witness = v;
        }
        return rep;
    }
    Rng rng(seed);
    for (int it = 0; it < samples; ++it) {
        Vec coeff = rng.gaussian_vector(nullity);
        Vec v = basis * coeff;
        if (v.norm() == 0.0) continue;
        if (check(v)) {
            rep.falsified = true;
            rep.witness = v;
            return rep;
        }
    }
    return rep;
}

Vec pseudo_inverse_on_support(const MeasurementOperator& a, const SupportSet& t, const Vec& y) {
    if (t.empty()) return Vec(0);
    const Mat at = a.extract_columns(t);
    Eigen::JacobiSVD<Mat> svd(at, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double smax = sv[0];
    const double smin = sv[sv.size() - 1];
    if (at.rows() < at.cols() || smin < kRankGuard * smax)
        throw std::runtime_error("pseudo_inverse_on_support: A_T rank-deficient (sigma_min = " +
                                 std::to_string(smin) + ")");
    return svd.solve(y);
}

} // namespace dyncs
