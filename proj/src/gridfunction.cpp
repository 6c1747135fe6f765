#include "mrt/gridfunction.hpp"

#include <cmath>

#include "mrt/errors.hpp"
#include "mrt/fft.hpp"

namespace mrt {

GridFunction make_grid_function(const Grid& grid, int m,
                                const std::function<double(int, double)>& f) {
  GridFunction g;
  g.grid = grid;
  g.m = m;
  g.values.assign(m, Vec(static_cast<std::size_t>(grid.npoints()), 0.0));
  for (int i = 0; i < m; ++i)
    for (std::int64_t k = 0; k < grid.npoints(); ++k)
      g.values[i][static_cast<std::size_t>(k)] = f(i, grid.point(k));
  return g;
}

double eval(const GridFunction& f, int state, double t) {
  const double s = t / f.grid.step - static_cast<double>(f.grid.lo);
  if (s < 0.0 || s > static_cast<double>(f.grid.npoints() - 1)) return 0.0;
  const auto k = static_cast<std::int64_t>(std::floor(s));
  const double frac = s - static_cast<double>(k);
  const Vec& v = f.values[state];
  if (k + 1 >= static_cast<std::int64_t>(v.size())) return v.back();
  return v[static_cast<std::size_t>(k)] * (1.0 - frac) + v[static_cast<std::size_t>(k + 1)] * frac;
}

Vec convolve_measure_function(const Dist& mu, const Vec& z, std::int64_t z_lo,
                              std::int64_t out_lo, std::int64_t out_hi, double step) {
  if (mu.step != step) throw GridMismatch("convolve_measure_function: step mismatch");
  const std::int64_t npts = out_hi - out_lo + 1;
  Vec out(static_cast<std::size_t>(npts), 0.0);
  // cell part: raw discrete convolution then the two-point average that
  // realizes the cell-uniform model
  if (!mu.cells.empty() && !z.empty()) {
    std::vector<double> raw = convolve_cells(mu.cells, z);
    const std::int64_t raw_lo = mu.origin + z_lo;  // abs index of raw[0]
    for (std::int64_t n = out_lo; n <= out_hi; ++n) {
      const std::int64_t k1 = n - raw_lo;      // z[n - a] term
      const std::int64_t k0 = n - raw_lo - 1;  // z[n - a - 1] term
      double s = 0.0;
      if (k0 >= 0 && k0 < static_cast<std::int64_t>(raw.size()))
        s += raw[static_cast<std::size_t>(k0)];
      if (k1 >= 0 && k1 < static_cast<std::int64_t>(raw.size()))
        s += raw[static_cast<std::size_t>(k1)];
      out[static_cast<std::size_t>(n - out_lo)] += 0.5 * s;
    }
  }
  // atom part: exact shifts with linear interpolation between samples
  for (const Atom& a : mu.atoms) {
    const double off = a.x / step;
    for (std::int64_t n = out_lo; n <= out_hi; ++n) {
      const double s = static_cast<double>(n) - off - static_cast<double>(z_lo);
      if (s < 0.0 || s > static_cast<double>(z.size() - 1)) continue;
      const auto k = static_cast<std::int64_t>(std::floor(s));
      const double frac = s - static_cast<double>(k);
      double zv = z[static_cast<std::size_t>(k)];
      if (frac > 0.0 && k + 1 < static_cast<std::int64_t>(z.size()))
        zv = zv * (1.0 - frac) + z[static_cast<std::size_t>(k + 1)] * frac;
      out[static_cast<std::size_t>(n - out_lo)] += a.w * zv;
    }
  }
  return out;
}

GridFunction kernel_apply(const SemiMarkovKernel& k, const GridFunction& f) {
  if (f.grid.step != k.step) throw GridMismatch("kernel_apply: step mismatch");
  GridFunction out;
  out.grid = f.grid;
  out.m = f.m;
  out.left_tail = {TailTag::Kind::Unknown, 0.0};
  out.right_tail = {TailTag::Kind::Unknown, 0.0};
  out.values.assign(f.m, Vec(static_cast<std::size_t>(f.grid.npoints()), 0.0));
  for (int i = 0; i < k.m; ++i) {
    for (int j = 0; j < k.m; ++j) {
      const double w = k.weights(i, j);
      if (w == 0.0) continue;
      Vec part = convolve_measure_function(k.dist(i, j), f.values[j], f.grid.lo, f.grid.lo,
                                           f.grid.hi, k.step);
      for (std::size_t n = 0; n < part.size(); ++n) out.values[i][n] += w * part[n];
    }
  }
  return out;
}

}  // namespace mrt
