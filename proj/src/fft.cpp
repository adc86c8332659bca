#include "homog/fft.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace homog::fft {

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

void transform(std::complex<double>* a, int n, int sign) {
  if (!is_pow2(n)) throw std::invalid_argument("fft: size must be a power of two");
  // bit-reversal permutation
  for (int i = 1, j = 0; i < n; ++i) {
    int bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (int len = 2; len <= n; len <<= 1) {
    const double ang = sign * 2.0 * std::numbers::pi / len;
    const std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (int i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (int k = 0; k < len / 2; ++k) {
        const std::complex<double> x = a[i + k];
        const std::complex<double> y = a[i + k + len / 2] * w;
        a[i + k] = x + y;
        a[i + k + len / 2] = x - y;
        w *= wl;
      }
    }
  }
  if (sign > 0) {
    const double inv = 1.0 / n;
    for (int i = 0; i < n; ++i) a[i] *= inv;
  }
}

void transform2d(std::vector<std::complex<double>>& data, int nx, int ny, int sign) {
  std::vector<std::complex<double>> col(ny);
  for (int j = 0; j < ny; ++j) transform(data.data() + static_cast<std::size_t>(j) * nx, nx, sign);
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) col[j] = data[static_cast<std::size_t>(j) * nx + i];
    transform(col.data(), ny, sign);
    for (int j = 0; j < ny; ++j) data[static_cast<std::size_t>(j) * nx + i] = col[j];
  }
}

}  // namespace homog::fft
