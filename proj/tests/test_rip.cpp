#include <doctest.h>

#include "dyncs/rip.hpp"
#include "dyncs/rng.hpp"
#include "dyncs/simulate.hpp"
#include "oracles.hpp"

using namespace dyncs;

TEST_SUITE_BEGIN("rip");

namespace {

MeasurementOperator orthonormal_op(Index n, std::uint64_t seed) {
    const MeasurementOperator g = make_gaussian_operator(n, n, seed);
    Eigen::HouseholderQR<Mat> qr(g.dense_matrix());
    Mat q = qr.householderQ() * Mat::Identity(n, n);
    return MeasurementOperator::dense(std::move(q));
}

} // namespace

TEST_CASE("ric is zero for an orthonormal operator") {
    const MeasurementOperator a = orthonormal_op(6, 2);
    for (Index s = 1; s <= 4; ++s) {
        const RipReport r = ric_bruteforce(a, s);
        CHECK(r.exact);
        CHECK(r.delta == doctest::Approx(0.0).epsilon(1e-10));
    }
}

TEST_CASE("duplicated columns give delta = 1 at order 2") {
    Mat a(3, 6);
    a << Mat::Identity(3, 3), Mat::Identity(3, 3);
    const RipReport r = ric_bruteforce(MeasurementOperator::dense(a), 2);
    CHECK(r.delta == doctest::Approx(1.0));
}

TEST_CASE("ric matches the independent subset eigen-scan on a seeded block") {
    const MeasurementOperator a = normalize_columns(make_gaussian_operator(8, 16, 77)).first;
    const RipReport r = ric_bruteforce(a, 2);
    CHECK(r.delta == doctest::Approx(oracles::ric(a.to_dense(), 2)).epsilon(1e-9));
}

TEST_CASE("ric is monotone in the order") {
    const MeasurementOperator a = normalize_columns(make_gaussian_operator(8, 12, 5)).first;
    double prev = 0.0;
    for (Index s = 1; s <= 5; ++s) {
        const double d = ric_bruteforce(a, s).delta;
        CHECK(d >= prev - 1e-12);
        prev = d;
    }
}

TEST_CASE("ric guard rejects infeasible enumerations") {
    const MeasurementOperator a = make_gaussian_operator(10, 60, 8);
    CHECK_THROWS_AS(ric_bruteforce(a, 12), std::invalid_argument);
}

TEST_CASE("roc: orthogonal columns give theta = 0") {
    const MeasurementOperator a = orthonormal_op(5, 4);
    const RipReport r = roc_bruteforce(a, 1, 1);
    CHECK(*r.theta == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("roc at order (1,1) equals the pairwise coherence oracle") {
    const MeasurementOperator a = normalize_columns(make_gaussian_operator(8, 16, 13)).first;
    const RipReport r = roc_bruteforce(a, 1, 1);
    CHECK(*r.theta == doctest::Approx(oracles::pairwise_coherence(a.to_dense())).epsilon(1e-10));
}

TEST_CASE("theta_{s,s~} <= delta_{s+s~} on exact computations") {
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        const MeasurementOperator a = normalize_columns(make_gaussian_operator(7, 10, seed)).first;
        for (Index s = 1; s <= 2; ++s) {
            for (Index st = 1; st <= 2; ++st) {
                const double theta = *roc_bruteforce(a, s, st).theta;
                const double delta = ric_bruteforce(a, s + st).delta;
                CHECK(theta <= delta + 1e-10);
            }
        }
    }
}

TEST_CASE("nsp falsifier finds the zero-column witness") {
    Mat a = Mat::Identity(4, 5); // null space spanned by e_5
    const NspReport r = nsp_falsify(MeasurementOperator::dense(a), 1, 10);
    CHECK(r.falsified);
    CHECK(r.exact);
    // witness concentrates all its l1 mass on one coordinate
    CHECK(oracles::l1_half_concentrated(r.witness, 1));
}

TEST_CASE("nsp falsifier rejects a trivial null space") {
    const MeasurementOperator a = orthonormal_op(4, 6);
    CHECK_THROWS_AS(nsp_falsify(a, 1, 10), std::invalid_argument);
}

TEST_CASE("nsp verdict is exact for a one-dimensional null space") {
    const MeasurementOperator a = make_gaussian_operator(15, 16, 19);
    const NspReport r = nsp_falsify(a, 3, 50);
    CHECK(r.exact);
    // the sort-and-sum oracle on the same basis vector must agree
    Eigen::JacobiSVD<Mat> svd(a.to_dense(), Eigen::ComputeFullV);
    const Vec v = svd.matrixV().col(15);
    CHECK(r.falsified == oracles::l1_half_concentrated(v, 3));
}

TEST_CASE("pseudo-inverse on support: orthonormal pick") {
    const MeasurementOperator a = orthonormal_op(5, 9);
    Vec e1 = Vec::Zero(5);
    e1[1] = 1.0;
    const Vec y = a.apply(e1);
    const Vec sol = pseudo_inverse_on_support(a, SupportSet{1}, y);
    REQUIRE(sol.size() == 1);
    CHECK(sol[0] == doctest::Approx(1.0));
}

TEST_CASE("pseudo-inverse on the empty support is empty") {
    const MeasurementOperator a = make_gaussian_operator(4, 6, 3);
    CHECK(pseudo_inverse_on_support(a, SupportSet{}, Vec::Zero(4)).size() == 0);
}

TEST_CASE("pseudo-inverse matches the normal-equations oracle") {
    const MeasurementOperator a = make_gaussian_operator(9, 6, 31);
    Rng rng(17);
    const Vec y = rng.gaussian_vector(9);
    const std::vector<Index> t{0, 2, 5};
    const Vec mine = pseudo_inverse_on_support(a, SupportSet(t), y);
    const Vec ref = oracles::pinv_normal_equations(a.dense_matrix(), t, y);
    CHECK((mine - ref).norm() <= 1e-10 * (1.0 + ref.norm()));
}

TEST_CASE("pseudo-inverse reports rank deficiency") {
    Mat a(3, 4);
    a.setZero();
    a.col(0) << 1, 0, 0;
    a.col(1) << 1, 0, 0; // duplicate
    CHECK_THROWS_WITH_AS(pseudo_inverse_on_support(MeasurementOperator::dense(a), SupportSet{0, 1},
                                                   Vec::Ones(3)),
                         doctest::Contains("sigma_min"), std::runtime_error);
}

TEST_CASE("partial ric: orthonormal operator projects to orthonormal residuals") {
    const MeasurementOperator a = orthonormal_op(6, 12);
    const RipReport r = partial_ric_bruteforce(a, 2, 1);
    CHECK(r.delta == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("partial ric with k = 0 reduces to the plain constant") {
    const MeasurementOperator a = normalize_columns(make_gaussian_operator(6, 9, 23)).first;
    CHECK(partial_ric_bruteforce(a, 0, 2).delta == doctest::Approx(ric_bruteforce(a, 2).delta));
}

TEST_CASE("partial ric on a seeded block agrees with a direct projected eigen-scan") {
    const MeasurementOperator a = normalize_columns(make_gaussian_operator(8, 12, 29)).first;
    const RipReport r = partial_ric_bruteforce(a, 2, 1);
    // independent scan: for every |T| = 2 and every remaining column j,
    // delta candidate = |  ||P A_j||^2 - 1 |
    const Mat ad = a.to_dense();
    double ref = 0.0;
    for (Index t1 = 0; t1 < 12; ++t1) {
        for (Index t2 = t1 + 1; t2 < 12; ++t2) {
            Mat at(8, 2);
            at.col(0) = ad.col(t1);
            at.col(1) = ad.col(t2);
            const Mat q = Eigen::HouseholderQR<Mat>(at).householderQ() * Mat::Identity(8, 2);
            for (Index j = 0; j < 12; ++j) {
                if (j == t1 || j == t2) continue;
                const Vec pj = ad.col(j) - q * (q.transpose() * ad.col(j));
                ref = std::max(ref, std::abs(pj.squaredNorm() - 1.0));
            }
        }
    }
    CHECK(r.delta == doctest::Approx(ref).epsilon(1e-9));
}

TEST_SUITE_END();
