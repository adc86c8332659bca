#pragma once

#include <complex>
#include <vector>

namespace homog::fft {

bool is_pow2(int n);

// In-place radix-2 complex FFT, size must be a power of two.
// sign = -1 forward, +1 inverse (inverse includes the 1/n factor).
void transform(std::complex<double>* data, int n, int sign);

// 2D transform of row-major nx x ny complex data (x fastest).
void transform2d(std::vector<std::complex<double>>& data, int nx, int ny, int sign);

}  // namespace homog::fft
