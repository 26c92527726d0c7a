#include "dyncs/fft.hpp"

#include <cmath>
#include <stdexcept>

namespace dyncs {

void fft_radix2(std::complex<double>* data, Index n, bool inverse) {
    if (n <= 0 || (n & (n - 1)) != 0) throw std::invalid_argument("fft: length must be a power of two");
    // bit-reversal permutation
    for (Index i = 1, j = 0; i < n; ++i) {
        Index bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(data[i], data[j]);
    }
    for (Index len = 2; len <= n; len <<= 1) {
        const double ang = (inverse ? 2.0 : -2.0) * M_PI / static_cast<double>(len);
        const std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (Index i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (Index k = 0; k < len / 2; ++k) {
                const std::complex<double> u = data[i + k];
                const std::complex<double> v = data[i + k + len / 2] * w;
                data[i + k] = u + v;
                data[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

CMat dft2_unitary(const CMat& img, bool inverse) {
    const Index m1 = img.rows(), m2 = img.cols();
    CMat out = img;
    std::vector<std::complex<double>> buf(static_cast<std::size_t>(std::max(m1, m2)));
    for (Index r = 0; r < m1; ++r) {
        for (Index c = 0; c < m2; ++c) buf[static_cast<std::size_t>(c)] = out(r, c);
        fft_radix2(buf.data(), m2, inverse);
        for (Index c = 0; c < m2; ++c) out(r, c) = buf[static_cast<std::size_t>(c)];
    }
    for (Index c = 0; c < m2; ++c) {
        for (Index r = 0; r < m1; ++r) buf[static_cast<std::size_t>(r)] = out(r, c);
        fft_radix2(buf.data(), m1, inverse);
        for (Index r = 0; r < m1; ++r) out(r, c) = buf[static_cast<std::size_t>(r)];
    }
    out /= std::sqrt(static_cast<double>(m1) * static_cast<double>(m2));
    return out;
}

} // namespace dyncs
