#include "dyncs/operator.hpp"

#include <cmath>
#include <mutex>
#include <stdexcept>

#include "dyncs/fft.hpp"
#include "dyncs/rng.hpp"

namespace dyncs {

struct MeasurementOperator::Cache {
    std::mutex mu;
    double op_norm = -1.0;
    Vec col_norms;
    Mat dense;
    bool have_dense = false;
};

Index conjugate_canonical(Index flat, Index m1, Index m2) {
    const Index k1 = flat / m2, k2 = flat % m2;
    const Index c1 = (m1 - k1) % m1, c2 = (m2 - k2) % m2;
    const Index conj = c1 * m2 + c2;
    return std::min(flat, conj);
}

bool is_self_conjugate(Index flat, Index m1, Index m2) {
    return conjugate_canonical(flat, m1, m2) == flat &&
           flat == (((m1 - flat / m2) % m1) * m2 + (m2 - flat % m2) % m2);
}

MeasurementOperator MeasurementOperator::dense(Mat a) {
    MeasurementOperator op;
    op.kind_ = Kind::DenseMatrix;
    op.n_ = a.rows();
    op.m_ = a.cols();
    op.a_ = std::move(a);
    op.cache_ = std::make_shared<Cache>();
    return op;
}

MeasurementOperator MeasurementOperator::partial_fourier_dwt(Index m1, Index m2,
                                                             std::vector<Index> freqs,
                                                             WaveletSpec wavelet) {
    if ((m1 & (m1 - 1)) != 0 || (m2 & (m2 - 1)) != 0)
        throw std::invalid_argument("partial_fourier_dwt: image dims must be powers of two");
    MeasurementOperator op;
    op.kind_ = Kind::PartialFourierDwt;
    op.m1_ = m1;
    op.m2_ = m2;
    op.m_ = m1 * m2;
    op.wavelet_ = wavelet;
    op.freqs_ = std::move(freqs);
    op.freq_scale_.reserve(op.freqs_.size());
    for (Index f : op.freqs_) {
        if (f < 0 || f >= op.m_) throw std::out_of_range("partial_fourier_dwt: frequency index");
        if (conjugate_canonical(f, m1, m2) != f)
            throw std::invalid_argument("partial_fourier_dwt: frequency not conjugate-canonical");
        op.freq_scale_.push_back(is_self_conjugate(f, m1, m2) ? 1.0 : std::sqrt(2.0));
    }
    op.n_ = 2 * static_cast<Index>(op.freqs_.size());
    op.cache_ = std::make_shared<Cache>();
    return op;
}

Vec MeasurementOperator::base_apply(const Vec& x) const {
    if (kind_ == Kind::DenseMatrix) return a_ * x;
    // image = inverse DWT of coefficients, then unitary DFT, then row select
    Mat coeffs = Eigen::Map<const Mat>(x.data(), m2_, m1_).transpose(); // row-major view
    Mat img = dwt2_inverse(coeffs, wavelet_.levels);
    CMat u = dft2_unitary(img.cast<std::complex<double>>(), /*inverse=*/false);
    Vec y(n_);
    for (std::size_t i = 0; i < freqs_.size(); ++i) {
        const Index k1 = freqs_[i] / m2_, k2 = freqs_[i] % m2_;
        const std::complex<double> v = u(k1, k2) * freq_scale_[i];
        y[2 * static_cast<Index>(i)] = v.real();
        y[2 * static_cast<Index>(i) + 1] = v.imag();
    }
    return y;
}

Vec MeasurementOperator::base_adjoint(const Vec& y) const {
    if (kind_ == Kind::DenseMatrix) return a_.transpose() * y;
    CMat c = CMat::Zero(m1_, m2_);
    for (std::size_t i = 0; i < freqs_.size(); ++i) {
        const Index k1 = freqs_[i] / m2_, k2 = freqs_[i] % m2_;
        c(k1, k2) = freq_scale_[i] * std::complex<double>(y[2 * static_cast<Index>(i)],
                                                          y[2 * static_cast<Index>(i) + 1]);
    }
    CMat z = dft2_unitary(c, /*inverse=*/true);
    Mat img = z.real();
    Mat coeffs = dwt2_forward(img, wavelet_.levels);
    Mat coeffs_t = coeffs.transpose(); // back to row-major flattening
    return Eigen::Map<const Vec>(coeffs_t.data(), m_);
}

Vec MeasurementOperator::apply(const Vec& x) const {
    if (x.size() != m_) throw std::invalid_argument("operator apply: dimension mismatch");
    if (col_scale_.size() > 0) return base_apply(col_scale_.cwiseProduct(x));
    return base_apply(x);
}

Vec MeasurementOperator::adjoint(const Vec& y) const {
    if (y.size() != n_) throw std::invalid_argument("operator adjoint: dimension mismatch");
    Vec z = base_adjoint(y);
    if (col_scale_.size() > 0) z = col_scale_.cwiseProduct(z);
    return z;
}

Vec MeasurementOperator::column(Index j) const {
    if (kind_ == Kind::DenseMatrix) {
        Vec c = a_.col(j);
        if (col_scale_.size() > 0) c *= col_scale_[j];
        return c;
    }
    Vec e = Vec::Zero(m_);
    e[j] = 1.0;
    return apply(e);
}

Mat MeasurementOperator::extract_columns(const SupportSet& s) const {
    s.check_range(m_);
    Mat block(n_, s.size());
    for (Index k = 0; k < s.size(); ++k) block.col(k) = column(s[k]);
    return block;
}

double MeasurementOperator::op_norm() const {
    std::lock_guard<std::mutex> lock(cache_->mu);
    if (cache_->op_norm >= 0.0) return cache_->op_norm;
    Rng rng(0x5eedULL + static_cast<std::uint64_t>(n_) * 131 + static_cast<std::uint64_t>(m_));
    Vec v = rng.gaussian_vector(m_);
    v.normalize();
    double lambda = 0.0;
    for (int it = 0; it < 200; ++it) {
        Vec w = adjoint(apply(v));
        const double nl = w.norm();
        if (nl == 0.0) break;
        w /= nl;
        if (std::abs(nl - lambda) <= 1e-12 * std::max(1.0, nl) && it > 4) {
            lambda = nl;
            break;
        }
        lambda = nl;
        v = w;
    }
    cache_->op_norm = std::sqrt(lambda);
    return cache_->op_norm;
}

const Vec& MeasurementOperator::column_norms() const {
    std::lock_guard<std::mutex> lock(cache_->mu);
    if (cache_->col_norms.size() == 0) {
        Vec norms(m_);
        if (kind_ == Kind::DenseMatrix) {
            for (Index j = 0; j < m_; ++j) norms[j] = a_.col(j).norm();
            if (col_scale_.size() > 0) norms = norms.cwiseProduct(col_scale_.cwiseAbs());
        } else {
            for (Index j = 0; j < m_; ++j) norms[j] = column(j).norm();
        }
        cache_->col_norms = std::move(norms);
    }
    return cache_->col_norms;
}

const Mat& MeasurementOperator::to_dense() const {
    std::lock_guard<std::mutex> lock(cache_->mu);
    if (!cache_->have_dense) {
        if (kind_ == Kind::DenseMatrix && col_scale_.size() == 0) {
            cache_->dense = a_;
        } else {
            Mat d(n_, m_);
            for (Index j = 0; j < m_; ++j) d.col(j) = column(j);
            cache_->dense = std::move(d);
        }
        cache_->have_dense = true;
    }
    return cache_->dense;
}

const Mat& MeasurementOperator::dense_matrix() const {
    if (kind_ != Kind::DenseMatrix) throw std::logic_error("dense_matrix: operator is not dense");
    return a_;
}

std::pair<MeasurementOperator, Vec> normalize_columns(const MeasurementOperator& a) {
    const Vec& norms = a.column_norms();
    Vec d(a.cols());
    for (Index j = 0; j < a.cols(); ++j) {
        if (norms[j] <= 0.0)
            throw std::invalid_argument("normalize_columns: zero column at index " + std::to_string(j));
        d[j] = 1.0 / norms[j];
    }
    MeasurementOperator out = a;
    if (out.kind_ == MeasurementOperator::Kind::DenseMatrix && out.col_scale_.size() == 0) {
        out.a_ = out.a_ * d.asDiagonal();
    } else {
        out.col_scale_ = out.col_scale_.size() > 0 ? Vec(out.col_scale_.cwiseProduct(d)) : d;
    }
    out.cache_ = std::make_shared<MeasurementOperator::Cache>();
    return {std::move(out), d};
}

} // namespace dyncs
