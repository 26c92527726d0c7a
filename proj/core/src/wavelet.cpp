#include "dyncs/wavelet.hpp"

#include <cmath>
#include <stdexcept>

namespace dyncs {

namespace {

// Daubechies four-tap scaling filter, unit 2-norm.
const double kH[4] = {
    (1.0 + std::sqrt(3.0)) / (4.0 * std::sqrt(2.0)),
    (3.0 + std::sqrt(3.0)) / (4.0 * std::sqrt(2.0)),
    (3.0 - std::sqrt(3.0)) / (4.0 * std::sqrt(2.0)),
    (1.0 - std::sqrt(3.0)) / (4.0 * std::sqrt(2.0)),
};
// Quadrature mirror: g_j = (-1)^j h_{3-j}
const double kG[4] = {kH[3], -kH[2], kH[1], -kH[0]};

void analysis_step(const double* x, Index n, double* approx, double* detail) {
    const Index half = n / 2;
    for (Index k = 0; k < half; ++k) {
        double a = 0.0, d = 0.0;
        for (Index j = 0; j < 4; ++j) {
            const double v = x[(2 * k + j) % n];
            a += kH[j] * v;
            d += kG[j] * v;
        }
        approx[k] = a;
        detail[k] = d;
    }
}

void synthesis_step(const double* approx, const double* detail, Index half, double* x) {
    const Index n = 2 * half;
    for (Index i = 0; i < n; ++i) x[i] = 0.0;
    for (Index k = 0; k < half; ++k) {
        for (Index j = 0; j < 4; ++j) {
            const Index i = (2 * k + j) % n;
            x[i] += kH[j] * approx[k] + kG[j] * detail[k];
        }
    }
}

void check_length(Index n, int levels) {
    if (levels < 1) throw std::invalid_argument("dwt: levels must be >= 1");
    if (n < (Index{2} << levels) || (n & (n - 1)) != 0)
        throw std::invalid_argument("dwt: length must be a power of two >= 2^(levels+1)");
}

} // namespace

Vec dwt_forward(const Vec& x, int levels) {
    check_length(x.size(), levels);
    Vec out = x;
    Vec tmp(x.size());
    Index n = x.size();
    for (int l = 0; l < levels; ++l) {
        analysis_step(out.data(), n, tmp.data(), tmp.data() + n / 2);
        out.head(n) = tmp.head(n);
        n /= 2;
    }
    return out;
}

Vec dwt_inverse(const Vec& coeffs, int levels) {
    check_length(coeffs.size(), levels);
    Vec out = coeffs;
    Vec tmp(coeffs.size());
    Index n = coeffs.size() >> levels;
    for (int l = 0; l < levels; ++l) {
        synthesis_step(out.data(), out.data() + n, n, tmp.data());
        out.head(2 * n) = tmp.head(2 * n);
        n *= 2;
    }
    return out;
}

Mat dwt2_forward(const Mat& img, int levels) {
    Mat out(img.rows(), img.cols());
    for (Index r = 0; r < img.rows(); ++r)
        out.row(r) = dwt_forward(img.row(r).transpose(), levels).transpose();
    for (Index c = 0; c < img.cols(); ++c)
        out.col(c) = dwt_forward(out.col(c), levels);
    return out;
}

Mat dwt2_inverse(const Mat& coeffs, int levels) {
    Mat out(coeffs.rows(), coeffs.cols());
    for (Index c = 0; c < coeffs.cols(); ++c)
        out.col(c) = dwt_inverse(coeffs.col(c), levels);
    for (Index r = 0; r < coeffs.rows(); ++r)
        out.row(r) = dwt_inverse(out.row(r).transpose(), levels).transpose();
    return out;
}

} // namespace dyncs
