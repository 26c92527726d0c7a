#pragma once

#include <memory>
#include <vector>

#include "dyncs/support_set.hpp"
#include "dyncs/types.hpp"
#include "dyncs/wavelet.hpp"

namespace dyncs {

/// Linear measurement map A = H o Phi. Two concrete kinds:
///   - DenseMatrix: explicit row-major coefficient block.
///   - PartialFourierDwt: row-selected unitary 2-D DFT composed with an
///     inverse 2-level Daubechies-4 DWT. Complex measurements are stacked as
///     interleaved (real, imag) pairs so downstream solvers stay real-valued;
///     selected frequencies live on a conjugate-canonical half grid and
///     non-self-conjugate rows carry a sqrt(2) scale, which keeps the fully
///     sampled operator exactly orthonormal.
///
/// Operators are immutable after construction; apply/adjoint are pure and
/// safe to share across threads.
class MeasurementOperator {
public:
    enum class Kind { DenseMatrix, PartialFourierDwt };

    static MeasurementOperator dense(Mat a);
    /// freqs are flattened 2-D frequency indices (k1 * m2 + k2); each must be
    /// the canonical representative of its conjugate pair.
    static MeasurementOperator partial_fourier_dwt(Index m1, Index m2, std::vector<Index> freqs,
                                                   WaveletSpec wavelet = {});

    Kind kind() const { return kind_; }
    Index rows() const { return n_; } // measurement length
    Index cols() const { return m_; } // ambient dimension

    Vec apply(const Vec& x) const;
    Vec adjoint(const Vec& y) const;

    /// n x |S| block whose j-th column equals apply(e_{S_j}).
    Mat extract_columns(const SupportSet& s) const;
    Vec column(Index j) const;

    /// Spectral norm estimate via power iteration (cached).
    double op_norm() const;

    /// Per-column 2-norms (cached).
    const Vec& column_norms() const;

    /// Full dense representation (cached; intended for desk-scale analysis).
    const Mat& to_dense() const;

    const Mat& dense_matrix() const; // throws unless kind == DenseMatrix

    bool has_column_scaling() const { return col_scale_.size() > 0; }
    const Vec& column_scaling() const { return col_scale_; }

    // PartialFourierDwt accessors
    Index image_rows() const { return m1_; }
    Index image_cols() const { return m2_; }
    const std::vector<Index>& observed_frequencies() const { return freqs_; }
    const WaveletSpec& wavelet() const { return wavelet_; }

private:
    MeasurementOperator() = default;
    Vec base_apply(const Vec& x) const;
    Vec base_adjoint(const Vec& y) const;
    friend std::pair<MeasurementOperator, Vec> normalize_columns(const MeasurementOperator&);

    Kind kind_ = Kind::DenseMatrix;
    Index n_ = 0, m_ = 0;
    Mat a_; // dense kind
    // fourier kind
    Index m1_ = 0, m2_ = 0;
    std::vector<Index> freqs_;
    std::vector<double> freq_scale_;
    WaveletSpec wavelet_;
    Vec col_scale_; // empty = identity

    struct Cache;
    std::shared_ptr<Cache> cache_;
};

/// Right-multiplies by diag(1/||A_i||) so every column has unit 2-norm.
/// Returns the normalized operator and the scaling D (A_normalized = A * D);
/// recover x = D * x_tilde after solving in the normalized frame.
/// Throws if some column is exactly zero, naming the column.
std::pair<MeasurementOperator, Vec> normalize_columns(const MeasurementOperator& a);

/// Canonical representative of a conjugate frequency pair on an m1 x m2 grid.
Index conjugate_canonical(Index flat, Index m1, Index m2);
bool is_self_conjugate(Index flat, Index m1, Index m2);

} // namespace dyncs
