#include <doctest.h>

#include "dyncs/simulate.hpp"
#include "dyncs/solvers_pks.hpp"
#include "dyncs/support_est.hpp"
#include "instances.hpp"
#include "oracles.hpp"

using namespace dyncs;

TEST_SUITE_BEGIN("support-est");

TEST_CASE("simple thresholding is the strict exceedance set") {
    Vec x(3);
    x << 0.5, -2.0, 0.05;
    CHECK(estimate_support_simple(x, 0.1) == SupportSet{0, 1});
    CHECK(estimate_support_simple(Vec::Zero(4), 0.0).empty());
    Rng rng(1);
    SupportSet supp;
    const Vec exact = instances::sparse_signal(12, 4, 1.0, 2.0, rng, &supp);
    CHECK(estimate_support_simple(exact, 0.0) == supp);
    CHECK_THROWS_AS(estimate_support_simple(x, -0.5), std::invalid_argument);
}

TEST_CASE("simple thresholding is monotone in alpha") {
    Rng rng(2);
    const Vec x = rng.gaussian_vector(30);
    SupportSet prev = estimate_support_simple(x, 0.0);
    for (double alpha : {0.1, 0.4, 0.9, 1.5}) {
        const SupportSet cur = estimate_support_simple(x, alpha);
        CHECK(cur.set_difference(prev).empty()); // nested downward
        prev = cur;
    }
}

TEST_CASE("add-ls-del with zero thresholds recovers the exact estimate") {
    Rng rng(3);
    const MeasurementOperator a = normalize_columns(make_gaussian_operator(10, 18, 4)).first;
    SupportSet supp;
    const Vec x = instances::sparse_signal(18, 3, 1.0, 2.0, rng, &supp);
    const Vec y = a.apply(x);
    SupportEstimatorConfig cfg;
    cfg.alpha_add = 0.0;
    cfg.alpha_del = 0.0;
    const AddLsDelResult r = estimate_support_add_ls_del(y, a, SupportSet{}, x, cfg);
    CHECK(r.support == supp);
    CHECK((r.x_final - x).norm() <= 1e-10 * x.norm());
}

TEST_CASE("add-ls-del keeps an exact previous support when alpha_del is small") {
    Rng rng(5);
    const MeasurementOperator a = normalize_columns(make_gaussian_operator(10, 16, 6)).first;
    SupportSet supp;
    const Vec x = instances::sparse_signal(16, 3, 1.0, 2.0, rng, &supp);
    const Vec y = a.apply(x);
    double xmin = 1e300;
    for (Index i : supp) xmin = std::min(xmin, std::abs(x[i]));
    SupportEstimatorConfig cfg;
    cfg.alpha_add = 1e6; // nothing added
    cfg.alpha_del = 0.5 * xmin;
    const AddLsDelResult r = estimate_support_add_ls_del(y, a, supp, x, cfg);
    CHECK(r.support == supp);
    CHECK((r.x_final - x).norm() <= 1e-10 * x.norm());
}

TEST_CASE("add-ls-del final vector satisfies the normal equations on its support") {
    Rng rng(7);
    const MeasurementOperator a = normalize_columns(make_gaussian_operator(12, 24, 8)).first;
    SupportSet supp;
    const Vec x = instances::sparse_signal(24, 4, 1.0, 2.0, rng, &supp);
    const Vec y = add_noise(a.apply(x), 1e-4, 9);
    SupportEstimatorConfig cfg;
    cfg.alpha_add = 0.3;
    cfg.alpha_del = 0.2;
    const AddLsDelResult r = estimate_support_add_ls_del(y, a, SupportSet{}, x, cfg);
    for (Index i = 0; i < 24; ++i)
        if (!r.support.contains(i)) CHECK(r.x_final[i] == 0.0);
    const Mat as = a.extract_columns(r.support);
    const Vec resid = y - as * gather(r.x_final, r.support);
    CHECK((as.transpose() * resid).lpNorm<Eigen::Infinity>() <= 1e-10 * (1.0 + y.norm()));
}

TEST_CASE("add-ls-del trims support errors at least as well as one threshold") {
    // at low n the l1 stage is biased; the LS refit separates true entries
    // from spurious ones more cleanly
    double simple_excess = 0.0, addlsdel_excess = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        Rng rng(900 + static_cast<std::uint64_t>(trial));
        const MeasurementOperator a =
            normalize_columns(make_gaussian_operator(20, 64, 1300 + static_cast<std::uint64_t>(trial))).first;
        SupportSet supp;
        const Vec x = instances::sparse_signal(64, 6, 0.8, 1.8, rng, &supp);
        const double eps = 0.4;
        const Vec y = a.apply(x) + instances::bounded_noise(20, 0.9 * eps, rng);
        SupportSet t(std::vector<Index>(supp.indices().begin(), supp.indices().begin() + 5));
        const SolverResult sol = solve_modified_cs({a, y, eps, 0.0}, t, true);
        const double alpha = auto_alpha(sol.xhat);
        const SupportSet simple = estimate_support_simple(sol.xhat, alpha);

        SupportEstimatorConfig cfg;
        const AddDelThresholds thr = auto_alpha_add_del(y, a, t, sol.xhat, x, cfg);
        cfg.alpha_add = thr.alpha_add;
        cfg.alpha_del = thr.alpha_del;
        const AddLsDelResult r = estimate_support_add_ls_del(y, a, t, sol.xhat, cfg);

        simple_excess += static_cast<double>(simple.set_difference(supp).size() +
                                             supp.set_difference(simple).size());
        addlsdel_excess += static_cast<double>(r.support.set_difference(supp).size() +
                                               supp.set_difference(r.support).size());
    }
    CHECK(addlsdel_excess <= simple_excess);
}

TEST_CASE("auto alpha: single spike gives a twelfth of its height") {
    Vec x = Vec::Zero(8);
    x[0] = 1.0;
    CHECK(auto_alpha(x) == doctest::Approx(1.0 / 12.0));
    x[0] = 10.0;
    CHECK(auto_alpha(x) == doctest::Approx(10.0 / 12.0)); // scale equivariance
    CHECK_THROWS_AS(auto_alpha(Vec::Zero(4)), std::invalid_argument);
}

TEST_CASE("auto alpha is homogeneous and matches the sort-accumulate oracle") {
    Vec x(20);
    for (Index i = 0; i < 20; ++i) x[i] = std::pow(0.5, static_cast<double>(i + 1));
    const double a1 = auto_alpha(x);
    CHECK(a1 == doctest::Approx(oracles::energy_alpha0(x, 0.999) / 12.0).epsilon(1e-12));
    CHECK(auto_alpha(10.0 * x) == doctest::Approx(10.0 * a1).epsilon(1e-12));
}

TEST_CASE("auto add/del thresholds: orthonormal operator admits everything") {
    const MeasurementOperator a = instances::orthonormal_operator(10, 11);
    Rng rng(12);
    SupportSet supp;
    const Vec x = instances::sparse_signal(10, 3, 1.0, 2.0, rng, &supp);
    const Vec y = a.apply(x);
    const AddDelThresholds thr = auto_alpha_add_del(y, a, SupportSet{}, x, x);
    CHECK(thr.alpha_add == doctest::Approx(0.0));
}

TEST_CASE("auto del threshold equals 0.7 x_min on exact noise-free estimates") {
    Rng rng(13);
    const MeasurementOperator a = normalize_columns(make_gaussian_operator(10, 14, 14)).first;
    SupportSet supp;
    const Vec x = instances::sparse_signal(14, 3, 1.0, 2.0, rng, &supp);
    const Vec y = a.apply(x);
    double xmin = 1e300;
    for (Index i : supp) xmin = std::min(xmin, std::abs(x[i]));
    const AddDelThresholds thr = auto_alpha_add_del(y, a, supp, x, x);
    CHECK(thr.alpha_del == doctest::Approx(0.7 * xmin).epsilon(1e-9));
}

TEST_CASE("auto add threshold equals the exhaustive svd scan") {
    Rng rng(15);
    const MeasurementOperator a = make_gaussian_operator(8, 20, 16, true);
    const Vec xhat = rng.gaussian_vector(20);
    const SupportSet t_prev{2, 9};
    const AddDelThresholds thr = auto_alpha_add_del(Vec::Zero(8), a, t_prev, xhat, xhat);
    const double ref = oracles::alpha_add_svd_scan(a.to_dense(), t_prev, xhat, 0.4);
    CHECK(thr.alpha_add == doctest::Approx(ref).epsilon(1e-12));
}

TEST_CASE("auto add threshold errors when even T_prev violates the target") {
    Mat am(4, 6);
    am.setZero();
    am.col(0) << 1, 0, 0, 0;
    am.col(1) << 1, 1e-6, 0, 0; // nearly dependent pair
    am.col(1).normalize();
    for (Index j = 2; j < 6; ++j) am(static_cast<Index>(j % 4), j) = 1.0;
    const MeasurementOperator a = MeasurementOperator::dense(am);
    CHECK_THROWS_AS(auto_alpha_add_del(Vec::Zero(4), a, SupportSet{0, 1}, Vec::Ones(6), Vec::Ones(6)),
                    std::runtime_error);
}

TEST_SUITE_END();
