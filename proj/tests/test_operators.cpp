#include <doctest.h>

#include <fstream>

#include "dyncs/matrix_io.hpp"
#include "dyncs/operator.hpp"
#include "dyncs/rng.hpp"
#include "dyncs/simulate.hpp"
#include "dyncs/wavelet.hpp"
#include "oracles.hpp"

using namespace dyncs;

TEST_SUITE_BEGIN("operators");

TEST_CASE("normalize_columns scales by inverse column norms") {
    Mat a(2, 3);
    a << 2, 0, 0, 0, 1, 4;
    // column norms [2, 1, 4] -> D = diag(1/2, 1, 1/4)
    auto [an, d] = normalize_columns(MeasurementOperator::dense(a));
    CHECK(d[0] == doctest::Approx(0.5));
    CHECK(d[1] == doctest::Approx(1.0));
    CHECK(d[2] == doctest::Approx(0.25));
    for (Index j = 0; j < 3; ++j) CHECK(an.column(j).norm() == doctest::Approx(1.0));
}

TEST_CASE("normalize_columns is the identity on an orthonormal block") {
    Mat q = Mat::Identity(4, 4);
    auto [an, d] = normalize_columns(MeasurementOperator::dense(q));
    for (Index j = 0; j < 4; ++j) CHECK(d[j] == doctest::Approx(1.0));
    CHECK((an.to_dense() - q).norm() == doctest::Approx(0.0));
}

TEST_CASE("normalize_columns matches the per-column norm oracle on a seeded block") {
    const MeasurementOperator a = make_gaussian_operator(4, 6, 42);
    const Vec norms = oracles::column_norms(a.dense_matrix());
    auto [an, d] = normalize_columns(a);
    for (Index j = 0; j < 6; ++j) {
        CHECK(d[j] == doctest::Approx(1.0 / norms[j]).epsilon(1e-12));
        CHECK(an.column(j).norm() == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("normalize_columns rejects a zero column naming its index") {
    Mat a = Mat::Identity(3, 3);
    a.col(1).setZero();
    CHECK_THROWS_WITH_AS(normalize_columns(MeasurementOperator::dense(a)),
                         doctest::Contains("index 1"), std::invalid_argument);
}

TEST_CASE("adjoint probe holds for both operator kinds") {
    Rng rng(5);
    SUBCASE("dense") {
        const MeasurementOperator a = make_gaussian_operator(7, 12, 3);
        for (int k = 0; k < 100; ++k) {
            const Vec x = rng.gaussian_vector(12);
            const Vec z = rng.gaussian_vector(7);
            const double lhs = a.apply(x).dot(z);
            const double rhs = x.dot(a.adjoint(z));
            CHECK(std::abs(lhs - rhs) <= 1e-10 * x.norm() * z.norm());
        }
    }
    SUBCASE("partial-fourier-dwt") {
        const MeasurementOperator a = make_partial_fourier_operator(16, 16, 40, 11);
        for (int k = 0; k < 100; ++k) {
            const Vec x = rng.gaussian_vector(a.cols());
            const Vec z = rng.gaussian_vector(a.rows());
            const double lhs = a.apply(x).dot(z);
            const double rhs = x.dot(a.adjoint(z));
            CHECK(std::abs(lhs - rhs) <= 1e-10 * x.norm() * z.norm());
        }
    }
}

TEST_CASE("column-scaled fourier operator keeps adjoint consistency") {
    const MeasurementOperator base = make_partial_fourier_operator(16, 16, 30, 6);
    const MeasurementOperator a = normalize_columns(base).first;
    Rng rng(7);
    for (int k = 0; k < 50; ++k) {
        const Vec x = rng.gaussian_vector(a.cols());
        const Vec z = rng.gaussian_vector(a.rows());
        CHECK(std::abs(a.apply(x).dot(z) - x.dot(a.adjoint(z))) <= 1e-10 * x.norm() * z.norm());
        CHECK(a.column_norms().maxCoeff() == doctest::Approx(1.0));
    }
}

TEST_CASE("fully sampled fourier-dwt operator is orthonormal") {
    const Index m1 = 8, m2 = 8;
    std::vector<Index> all;
    for (Index f = 0; f < m1 * m2; ++f)
        if (conjugate_canonical(f, m1, m2) == f) all.push_back(f);
    const MeasurementOperator a = MeasurementOperator::partial_fourier_dwt(m1, m2, all);
    Rng rng(9);
    for (int k = 0; k < 20; ++k) {
        const Vec x = rng.gaussian_vector(a.cols());
        CHECK((a.adjoint(a.apply(x)) - x).norm() <= 1e-8 * x.norm());
    }
}

TEST_CASE("column extraction equals applies of basis vectors") {
    const MeasurementOperator a = make_partial_fourier_operator(8, 8, 12, 4);
    const SupportSet s{0, 5, 17, 63};
    const Mat block = a.extract_columns(s);
    for (Index k = 0; k < s.size(); ++k) {
        Vec e = Vec::Zero(a.cols());
        e[s[k]] = 1.0;
        CHECK((block.col(k) - a.apply(e)).norm() == doctest::Approx(0.0));
    }
}

TEST_CASE("1-D wavelet transform is orthonormal and inverts") {
    Rng rng(21);
    const Vec x = rng.gaussian_vector(32);
    const Vec c = dwt_forward(x, 2);
    CHECK(c.norm() == doctest::Approx(x.norm()).epsilon(1e-12));
    CHECK((dwt_inverse(c, 2) - x).norm() <= 1e-12 * x.norm());
}

TEST_CASE("2-D wavelet transform inverts") {
    Rng rng(22);
    Mat img(16, 16);
    for (Index r = 0; r < 16; ++r)
        for (Index c = 0; c < 16; ++c) img(r, c) = rng.gaussian();
    const Mat coeffs = dwt2_forward(img, 2);
    CHECK((dwt2_inverse(coeffs, 2) - img).norm() <= 1e-12 * img.norm());
}

TEST_CASE("dense operator loads from a plain-text matrix file") {
    const std::string path = "test_matrix.txt";
    Mat a(2, 3);
    a << 1, 2, 3, 4, 5, 6;
    save_dense_matrix(path, a);
    const Mat b = load_dense_matrix(path);
    CHECK((a - b).norm() == doctest::Approx(0.0));
    std::remove(path.c_str());
}

TEST_CASE("matrix loader rejects missing files and ragged rows") {
    CHECK_THROWS_AS(load_dense_matrix("does_not_exist.txt"), std::runtime_error);
    {
        std::ofstream out("ragged.txt");
        out << "1 2 3\n1 2\n";
    }
    CHECK_THROWS_AS(load_dense_matrix("ragged.txt"), std::runtime_error);
    std::remove("ragged.txt");
}

TEST_CASE("support set algebra stays sorted and in range") {
    SupportSet a{5, 1, 3, 3};
    CHECK(a.size() == 3);
    CHECK(a[0] == 1);
    CHECK(a[2] == 5);
    SupportSet b{3, 4};
    CHECK(a.set_union(b) == SupportSet{1, 3, 4, 5});
    CHECK(a.set_difference(b) == SupportSet{1, 5});
    CHECK(a.set_intersection(b) == SupportSet{3});
    CHECK(a.complement(6) == SupportSet{0, 2, 4});
    CHECK_THROWS_AS(a.check_range(5), std::out_of_range);
}

TEST_SUITE_END();
