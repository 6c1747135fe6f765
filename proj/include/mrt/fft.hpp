#ifndef MRT_FFT_HPP
#define MRT_FFT_HPP

#include <complex>
#include <vector>

namespace mrt {

// In-place iterative radix-2 FFT; size must be a power of two.
void fft_radix2(std::vector<std::complex<double>>& a, bool inverse);

// Linear convolution of two nonnegative mass vectors.  Uses the direct
// O(n*m) sum for small sizes and an FFT for large ones; tiny negative
// round-off from the FFT path is clamped to zero.
std::vector<double> convolve_cells(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace mrt

#endif  // MRT_FFT_HPP
