#pragma once

#include <complex>
#include <vector>

#include "dyncs/types.hpp"

namespace dyncs {

using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

/// In-place radix-2 FFT; n must be a power of two. inverse=true applies the
/// conjugate transform. No scaling here.
void fft_radix2(std::complex<double>* data, Index n, bool inverse);

/// Unitary 2-D DFT of a row-major m1 x m2 image (1/sqrt(m1*m2) scaling).
CMat dft2_unitary(const CMat& img, bool inverse);

} // namespace dyncs
