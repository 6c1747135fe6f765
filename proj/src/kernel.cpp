#include "mrt/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mrt/errors.hpp"

namespace mrt {

SemiMarkovKernel make_kernel(Matrix weights, std::vector<Dist> dists, double mass_tol) {
  SemiMarkovKernel k;
  k.m = weights.rows();
  if (weights.rows() != weights.cols()) throw Error("make_kernel: weights must be square");
  if (dists.size() != static_cast<std::size_t>(k.m) * k.m)
    throw Error("make_kernel: expected one distribution per matrix entry");
  QSMatrix q(weights);
  if (!strongly_connected(q)) throw NotIrreducible("make_kernel: weight matrix is reducible");
  k.step = dists.empty() ? 1e-2 : dists.front().step;
  for (int i = 0; i < k.m; ++i)
    for (int j = 0; j < k.m; ++j) {
      const Dist& d = dists[static_cast<std::size_t>(i) * k.m + j];
      if (d.step != k.step) throw GridMismatch("make_kernel: mixed grid steps");
      if (weights(i, j) > 0.0 && std::abs(total_mass(d) - 1.0) > mass_tol)
        throw Error("make_kernel: entry (" + std::to_string(i) + "," + std::to_string(j) +
                    ") must be a proper distribution");
    }
  k.weights = std::move(weights);
  k.dists = std::move(dists);
  return k;
}

std::vector<Dist> kernel_convolve(const SemiMarkovKernel& k, const std::vector<Dist>& b) {
  const int m = k.m;
  if (b.size() != static_cast<std::size_t>(m) * m)
    throw Error("kernel_convolve: shape mismatch");
  std::vector<Dist> out(static_cast<std::size_t>(m) * m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      Dist& r = out[static_cast<std::size_t>(i) * m + j];
      r.step = k.step;
      for (int l = 0; l < m; ++l) {
        const double w = k.weights(i, l);
        if (w == 0.0) continue;
        const Dist& blj = b[static_cast<std::size_t>(l) * m + j];
        if (blj.empty()) continue;
        add_dist(r, dist_convolve(k.dist(i, l), blj), w);
      }
    }
  return out;
}

std::vector<Dist> kernel_power(const SemiMarkovKernel& k, int n) {
  if (n < 0) throw Error("kernel_power: negative power");
  const int m = k.m;
  std::vector<Dist> acc(static_cast<std::size_t>(m) * m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      Dist& d = acc[static_cast<std::size_t>(i) * m + j];
      d = (i == j) ? delta_dist(0.0, k.step) : Dist{};
      d.step = k.step;
      d.family.reset();
    }
  for (int t = 0; t < n; ++t) acc = kernel_convolve(k, acc);
  return acc;
}

namespace {

double real_gcd(double a, double b, double snap) {
  a = std::abs(a);
  b = std::abs(b);
  if (a < b) std::swap(a, b);
  while (b > snap) {
    const double r = std::fmod(a, b);
    a = b;
    // fold residues that sit within snap of either end of [0, b)
    b = (r > b - snap) ? 0.0 : r;
  }
  return a;
}

}  // namespace

LatticeType lattice_type(const SemiMarkovKernel& k, const PerronData& pd, double snap_tol) {
  const int m = k.m;
  LatticeType lt;

  double max_support = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      if (!(pd.u[i] * k.weights(i, j) * pd.v[j] > 0.0)) continue;
      const Dist& d = k.dist(i, j);
      double cell_mass = 0.0;
      for (double c : d.cells) cell_mass += c;
      const bool density = cell_mass > 1e-12 ||
                           (d.family && spec_has_density(**d.family));
      if (density) {
        lt.arithmetic = false;
        lt.spread_out = true;
        return lt;
      }
      for (const Atom& a : d.atoms) max_support = std::max(max_support, std::abs(a.x));
    }
  if (snap_tol <= 0.0) snap_tol = 1e-9 * std::max(1.0, max_support);

  // Spanning tree over the positive-weight digraph assigns raw potentials.
  std::vector<double> gamma_raw(m, 0.0);
  std::vector<char> seen(m, 0);
  std::vector<int> queue{0};
  seen[0] = 1;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const int i = queue[head];
    for (int j = 0; j < m; ++j) {
      if (k.weights(i, j) <= 0.0 || seen[j]) continue;
      const Dist& d = k.dist(i, j);
      if (d.atoms.empty()) continue;
      gamma_raw[j] = gamma_raw[i] + d.atoms.front().x;
      seen[j] = 1;
      queue.push_back(j);
    }
  }

  double g = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      if (k.weights(i, j) <= 0.0) continue;
      for (const Atom& a : k.dist(i, j).atoms) {
        const double r = a.x + gamma_raw[i] - gamma_raw[j];
        if (std::abs(r) > snap_tol) g = real_gcd(g, r, snap_tol);
      }
    }
  if (g <= snap_tol) {
    lt.arithmetic = false;
    lt.spread_out = false;
    return lt;
  }
  // verify every residue is a span multiple
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      if (k.weights(i, j) <= 0.0) continue;
      for (const Atom& a : k.dist(i, j).atoms) {
        const double r = (a.x + gamma_raw[i] - gamma_raw[j]) / g;
        if (std::abs(r - std::round(r)) * g > 16.0 * snap_tol) {
          lt.arithmetic = false;
          lt.spread_out = false;
          return lt;
        }
      }
    }
  lt.arithmetic = true;
  lt.span = g;
  lt.gamma.resize(m);
  for (int i = 0; i < m; ++i) {
    double x = std::fmod(gamma_raw[i], g);
    if (x < 0) x += g;
    if (g - x <= snap_tol) x = 0.0;
    lt.gamma[i] = x;
  }
  return lt;
}

KernelStats stationary_drift(const SemiMarkovKernel& k, const PerronData& pd) {
  const int m = k.m;
  KernelStats stats;
  stats.mean_matrix = Matrix(m, m);
  double mu = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      if (k.weights(i, j) == 0.0) continue;
      const double mean = dist_mean(k.dist(i, j)).value;
      if (!std::isfinite(mean)) throw Error("stationary_drift: entry mean not finite");
      stats.mean_matrix(i, j) = mean;
      mu += pd.u[i] * k.weights(i, j) * pd.v[j] * mean;
    }
  if (!(mu > 0.0))
    throw NonPositiveDrift("stationary_drift: mu = " + std::to_string(mu) +
                           " is not positive");
  stats.mu = mu;
  stats.lattice = lattice_type(k, pd);
  return stats;
}

}  // namespace mrt
