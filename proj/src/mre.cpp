#include "mrt/mre.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mrt/errors.hpp"

namespace mrt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Tail contribution to a mesh sup-sum beyond the window edge.
double tail_sup_sum(const TailTag& tag, double edge_value, double edge_t, double mesh) {
  switch (tag.kind) {
    case TailTag::Kind::Zero:
      return 0.0;
    case TailTag::Kind::ExpDecay: {
      const double q = std::exp(-tag.param * mesh);
      return std::abs(edge_value) * q / (1.0 - q);
    }
    case TailTag::Kind::PowerDecay:
      if (tag.param <= 1.0) return kInf;
      return std::abs(edge_value) * std::abs(edge_t) / (mesh * (tag.param - 1.0));
    case TailTag::Kind::Unknown:
      return 0.0;
  }
  return 0.0;
}

double tail_l1(const TailTag& tag, double edge_value, double edge_t) {
  switch (tag.kind) {
    case TailTag::Kind::Zero:
      return 0.0;
    case TailTag::Kind::ExpDecay:
      return std::abs(edge_value) / tag.param;
    case TailTag::Kind::PowerDecay:
      if (tag.param <= 1.0) return kInf;
      return std::abs(edge_value) * std::abs(edge_t) / (tag.param - 1.0);
    case TailTag::Kind::Unknown:
      return 0.0;
  }
  return 0.0;
}

bool tail_vanishes(const TailTag& tag, double edge_value, double scale) {
  if (tag.kind == TailTag::Kind::Unknown) return std::abs(edge_value) <= 1e-9 * scale;
  return true;  // Zero and any decaying tag vanish at infinity
}

// Effective support hull of all kernel entries at the given mass tolerance.
std::pair<double, double> kernel_support(const SemiMarkovKernel& k, double tol) {
  double lo = 0.0, hi = 0.0;
  for (int i = 0; i < k.m; ++i)
    for (int j = 0; j < k.m; ++j) {
      if (k.weights(i, j) == 0.0) continue;
      auto [a, b] = effective_support(k.dist(i, j), tol);
      lo = std::min(lo, a);
      hi = std::max(hi, b);
    }
  return {lo, hi};
}

}  // namespace

DriReport dri_check(const GridFunction& g, const Vec& lambda, double eps) {
  DriReport rep;
  const double mesh = std::max(eps, g.grid.step);
  const double a = g.grid.left(), b = g.grid.right();
  double sup_sum = 0.0, sup_norm_sum = 0.0, l1 = 0.0;
  double scale = 0.0;
  for (int i = 0; i < g.m; ++i) scale = std::max(scale, max_abs(g.values[i]));
  bool lim0 = true;
  for (int i = 0; i < g.m; ++i) {
    const Vec& v = g.values[i];
    double cell_sum = 0.0, sup_norm = 0.0, abs_int = 0.0;
    const auto per_mesh = std::max<std::int64_t>(
        1, static_cast<std::int64_t>(std::llround(mesh / g.grid.step)));
    for (std::int64_t start = 0; start < g.grid.npoints(); start += per_mesh) {
      double sup = 0.0;
      for (std::int64_t t = start; t < std::min(start + per_mesh + 1, g.grid.npoints()); ++t)
        sup = std::max(sup, std::abs(v[static_cast<std::size_t>(t)]));
      cell_sum += sup;
    }
    for (std::size_t t = 0; t < v.size(); ++t) {
      sup_norm = std::max(sup_norm, std::abs(v[t]));
      abs_int += std::abs(v[t]) * g.grid.step;
    }
    cell_sum += tail_sup_sum(g.left_tail, v.front(), a, mesh) / 1.0;
    cell_sum += tail_sup_sum(g.right_tail, v.back(), b, mesh);
    abs_int += tail_l1(g.left_tail, v.front(), a) + tail_l1(g.right_tail, v.back(), b);
    lim0 = lim0 && tail_vanishes(g.left_tail, v.front(), scale) &&
           tail_vanishes(g.right_tail, v.back(), scale);
    sup_sum += lambda[i] * cell_sum;
    sup_norm_sum += lambda[i] * sup_norm;
    l1 += lambda[i] * abs_int;
  }
  rep.sup_sum = sup_sum;
  rep.sup_norm_sum = sup_norm_sum;
  rep.l1 = l1;
  rep.dri = std::isfinite(sup_sum);
  rep.spread_out_ok = lim0 && std::isfinite(sup_norm_sum) && std::isfinite(l1);
  rep.window_only = g.left_tail.kind == TailTag::Kind::Unknown ||
                    g.right_tail.kind == TailTag::Kind::Unknown;
  return rep;
}

MreSolution solve_mre(const SemiMarkovKernel& k, const PerronData& pd, const GridMeasure& v,
                      const GridFunction& z) {
  if (z.grid.step != v.grid.step) throw GridMismatch("solve_mre: step mismatch");
  if (k.m != v.m || z.m != v.m) throw Error("solve_mre: state count mismatch");
  // the sampled inhomogeneity must not be cut off at its window edges
  double scale = 0.0;
  for (int i = 0; i < z.m; ++i) scale = std::max(scale, max_abs(z.values[i]));
  for (int i = 0; i < z.m; ++i) {
    if (std::abs(z.values[i].front()) > 1e-7 * scale ||
        std::abs(z.values[i].back()) > 1e-7 * scale)
      throw WindowTooSmall("solve_mre: z is truncated at its window edge; widen the window");
  }

  MreSolution sol;
  sol.z_star.grid = v.grid;
  sol.z_star.m = v.m;
  sol.z_star.left_tail = {TailTag::Kind::Unknown, 0.0};
  sol.z_star.right_tail = {TailTag::Kind::Unknown, 0.0};
  sol.z_star.values.assign(v.m, Vec(static_cast<std::size_t>(v.grid.npoints()), 0.0));
  for (int i = 0; i < v.m; ++i)
    for (int j = 0; j < v.m; ++j) {
      const Dist& mu = v.entry(i, j);
      if (mu.empty()) continue;
      Vec part = convolve_measure_function(mu, z.values[j], z.grid.lo, v.grid.lo, v.grid.hi,
                                           v.grid.step);
      for (std::size_t n = 0; n < part.size(); ++n) sol.z_star.values[i][n] += part[n];
    }
  for (int i = 0; i < v.m; ++i)
    for (std::size_t n = 0; n < 3 && n < sol.z_star.values[i].size(); ++n)
      sol.left_edge_hat_sup =
          std::max(sol.left_edge_hat_sup, std::abs(sol.z_star.values[i][n]) / pd.v[i]);
  return sol;
}

ResidualReport residual(const GridFunction& z_fun, const GridFunction& inhom,
                        const SemiMarkovKernel& k) {
  if (z_fun.grid.step != k.step) throw GridMismatch("residual: step mismatch");
  const GridFunction kz = kernel_apply(k, z_fun);
  auto [slo, shi] = kernel_support(k, 1e-9);
  ResidualReport rep;
  rep.interior_left = z_fun.grid.left() + std::max(shi, 0.0);
  rep.interior_right = z_fun.grid.right() + std::min(slo, 0.0);
  rep.per_state.assign(z_fun.m, 0.0);
  for (int i = 0; i < z_fun.m; ++i) {
    for (std::int64_t n = 0; n < z_fun.grid.npoints(); ++n) {
      const double t = z_fun.grid.point(n);
      if (t < rep.interior_left - 1e-12 || t > rep.interior_right + 1e-12) continue;
      const double r = z_fun.values[i][static_cast<std::size_t>(n)] - eval(inhom, i, t) -
                       kz.values[i][static_cast<std::size_t>(n)];
      rep.per_state[i] = std::max(rep.per_state[i], std::abs(r));
    }
    rep.global = std::max(rep.global, rep.per_state[i]);
  }
  return rep;
}

HomogeneousProbe homogeneous_probe(const GridFunction& z_fun, const SemiMarkovKernel& k,
                                   const PerronData& pd, int n_iter) {
  HomogeneousProbe probe;
  // weighted least squares of Z against the right eigenvector
  double num = 0.0, den = 0.0;
  for (int i = 0; i < z_fun.m; ++i) {
    double s = 0.0;
    for (double x : z_fun.values[i]) s += x;
    num += pd.pi[i] * pd.v[i] * s;
    den += pd.pi[i] * pd.v[i] * pd.v[i] * static_cast<double>(z_fun.values[i].size());
  }
  probe.c_fit = den > 0.0 ? num / den : 0.0;

  // stochastic form of the kernel
  SemiMarkovKernel p = k;
  for (int i = 0; i < k.m; ++i)
    for (int j = 0; j < k.m; ++j) p.weights(i, j) = k.weights(i, j) * pd.v[j] / pd.v[i];

  GridFunction delta = z_fun;
  for (int i = 0; i < z_fun.m; ++i)
    for (double& x : delta.values[i]) x = (x - probe.c_fit * pd.v[i]) / pd.v[i];

  auto [slo, shi] = kernel_support(k, 1e-9);
  double left = z_fun.grid.left(), right = z_fun.grid.right();
  for (int it = 0; it <= n_iter; ++it) {
    double sup = 0.0;
    std::int64_t pts = 0;
    for (int i = 0; i < z_fun.m; ++i)
      for (std::int64_t n = 0; n < delta.grid.npoints(); ++n) {
        const double t = delta.grid.point(n);
        if (t < left - 1e-12 || t > right + 1e-12) continue;
        ++pts;
        sup = std::max(sup, std::abs(delta.values[i][static_cast<std::size_t>(n)]));
      }
    if (pts < 10 * z_fun.m) break;
    probe.sup_trace.push_back(sup);
    probe.valid_iters = it;
    if (it == n_iter) break;
    delta = kernel_apply(p, delta);
    left += std::max(shi, 0.0);
    right += std::min(slo, 0.0);
  }
  return probe;
}

Vec asymptotic_limit(const GridFunction& z, const PerronData& pd, const KernelStats& stats) {
  Vec limit(z.m, 0.0);
  double weighted = 0.0;
  for (int j = 0; j < z.m; ++j) {
    const Vec& v = z.values[j];
    double integral = 0.0;
    for (double x : v) integral += x * z.grid.step;
    integral -= 0.5 * z.grid.step * (v.front() + v.back());
    integral += tail_l1(z.left_tail, v.front(), z.grid.left()) * (v.front() < 0 ? -1.0 : 1.0);
    integral += tail_l1(z.right_tail, v.back(), z.grid.right()) * (v.back() < 0 ? -1.0 : 1.0);
    weighted += pd.u[j] * integral;
  }
  for (int i = 0; i < z.m; ++i) limit[i] = pd.v[i] * weighted / stats.mu;
  return limit;
}

}  // namespace mrt
