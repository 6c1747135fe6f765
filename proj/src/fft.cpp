#include "mrt/fft.hpp"

#include <cmath>
#include <cstddef>
#include <map>

namespace mrt {

namespace {

const std::vector<std::complex<double>>& twiddles(std::size_t n) {
  static std::map<std::size_t, std::vector<std::complex<double>>> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  std::vector<std::complex<double>> w(n / 2);
  const double base = -2.0 * M_PI / static_cast<double>(n);
  for (std::size_t k = 0; k < n / 2; ++k) w[k] = std::polar(1.0, base * static_cast<double>(k));
  return cache.emplace(n, std::move(w)).first->second;
}

}  // namespace

void fft_radix2(std::vector<std::complex<double>>& a, bool inverse) {
  const std::size_t n = a.size();
  if (n <= 1) return;
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  const auto& w = twiddles(n);
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t stride = n / len;
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < len / 2; ++k) {
        std::complex<double> tw = w[k * stride];
        if (inverse) tw = std::conj(tw);
        std::complex<double> u = a[i + k];
        std::complex<double> v = a[i + k + len / 2] * tw;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
      }
    }
  }
  if (inverse) {
    const double inv = 1.0 / static_cast<double>(n);
    for (auto& x : a) x *= inv;
  }
}

std::vector<double> convolve_cells(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty()) return {};
  const std::size_t out = a.size() + b.size() - 1;
  if (a.size() * b.size() <= 1u << 16) {
    std::vector<double> c(out, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double ai = a[i];
      if (ai == 0.0) continue;
      for (std::size_t j = 0; j < b.size(); ++j) c[i + j] += ai * b[j];
    }
    return c;
  }
  std::size_t n = 1;
  while (n < out) n <<= 1;
  std::vector<std::complex<double>> fa(n), fb(n);
  for (std::size_t i = 0; i < a.size(); ++i) fa[i] = a[i];
  for (std::size_t i = 0; i < b.size(); ++i) fb[i] = b[i];
  fft_radix2(fa, false);
  fft_radix2(fb, false);
  for (std::size_t i = 0; i < n; ++i) fa[i] *= fb[i];
  fft_radix2(fa, true);
  std::vector<double> c(out);
  for (std::size_t i = 0; i < out; ++i) {
    double v = fa[i].real();
    c[i] = v < 0.0 ? 0.0 : v;
  }
  return c;
}

}  // namespace mrt
