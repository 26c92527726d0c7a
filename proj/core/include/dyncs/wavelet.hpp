#pragma once

#include "dyncs/types.hpp"

namespace dyncs {

/// Orthonormal Daubechies-4 (four-tap) DWT with periodic extension. The
/// periodic convention keeps the transform exactly orthogonal, so the inverse
/// equals the adjoint.
struct WaveletSpec {
    int levels = 2;
};

/// 1-D analysis/synthesis over `levels` octaves; signal length must be a
/// power of two and >= 2^levels * 2. Layout: [approx | detail_L | ... | detail_1].
Vec dwt_forward(const Vec& x, int levels);
Vec dwt_inverse(const Vec& coeffs, int levels);

/// Separable 2-D transform: the full multilevel 1-D transform applied along
/// each row and then each column (tensor-product construction).
Mat dwt2_forward(const Mat& img, int levels);
Mat dwt2_inverse(const Mat& coeffs, int levels);

} // namespace dyncs
