#include "mrt/renewal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "mrt/csv.hpp"
#include "mrt/errors.hpp"

namespace mrt {

namespace {

// Kernels whose increments are all (essentially) nonnegative keep their
// renewal mass inside [0, right]; anything two-sided gets a safety margin so
// excursions outside the window can re-enter before clipping.
bool one_sided(const SemiMarkovKernel& k) {
  for (int i = 0; i < k.m; ++i)
    for (int j = 0; j < k.m; ++j) {
      if (k.weights(i, j) == 0.0) continue;
      const Dist& d = k.dist(i, j);
      if (!d.atoms.empty() && d.atoms.front().x < -1e-12) return false;
      if (!d.cells.empty() &&
          static_cast<double>(d.origin) * d.step < -d.step - 1e-12)
        return false;
      if (d.overflow_left > 0.0) return false;
    }
  return true;
}

Grid computation_grid(const SemiMarkovKernel& k, const Grid& window, double margin_factor) {
  if (one_sided(k)) return window;
  const auto margin = static_cast<std::int64_t>(
      std::ceil(margin_factor * static_cast<double>(window.ncells())));
  return window.expanded(margin, margin);
}

double row_metric(const std::vector<Dist>& entries, double right_edge) {
  double metric = 0.0;
  for (const Dist& d : entries) metric = std::max(metric, mass_at_most(d, right_edge));
  return metric;
}

double finish_report(TruncationReport& rep, double eps) {
  // geometric extrapolation of the dropped tail from the last observed decay
  double ratio = 0.9;
  const auto n = rep.term_mass.size();
  if (n >= 2 && rep.term_mass[n - 2] > 0.0) {
    ratio = std::clamp(rep.term_mass[n - 1] / rep.term_mass[n - 2], 0.0, 0.95);
  }
  const double last = n ? rep.term_mass.back() : 0.0;
  rep.residual_bound = std::min(last, eps) / (1.0 - ratio);
  return rep.residual_bound;
}

}  // namespace

GridMeasure renewal_measure(const SemiMarkovKernel& k, const PerronData& pd,
                            const KernelStats& stats, const Grid& window,
                            const RenewalOptions& opt) {
  (void)pd;
  if (!(stats.mu > 0.0)) throw NonPositiveDrift("renewal_measure: needs positive drift");
  const int m = k.m;
  const Grid comp = computation_grid(k, window, opt.margin_factor);
  const double b = window.right();

  GridMeasure gm;
  gm.grid = window;
  gm.m = m;
  gm.entries.assign(static_cast<std::size_t>(m) * m, Dist{});
  for (auto& e : gm.entries) e.step = k.step;

  // n = 0 term: identity, point mass at zero on the diagonal
  std::vector<Dist> cur(static_cast<std::size_t>(m) * m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      Dist& d = cur[static_cast<std::size_t>(i) * m + j];
      d.step = k.step;
      if (i == j) d.atoms.push_back({0.0, 1.0});
    }

  int consec = 0;
  for (int n = 0;; ++n) {
    if (n > opt.max_terms)
      throw TruncationFailure("renewal_measure: series did not clear the window within " +
                              std::to_string(opt.max_terms) + " terms");
    for (std::size_t e = 0; e < cur.size(); ++e) {
      Dist clipped = cur[e];
      clip_dist(clipped, window);
      clipped.overflow_left = clipped.overflow_right = 0.0;
      add_dist(gm.entries[e], clipped);
    }
    const double metric = row_metric(cur, b);
    gm.trunc.term_mass.push_back(metric);
    gm.trunc.n_terms = n + 1;
    if (metric < opt.eps_trunc && n + 1 >= opt.min_terms) {
      if (++consec >= opt.consecutive) break;
    } else {
      consec = 0;
    }
    cur = kernel_convolve(k, cur);
    for (Dist& d : cur) clip_dist(d, comp);
  }
  finish_report(gm.trunc, opt.eps_trunc);
  // mass clipped on the left of the expanded window would have re-entered
  double lost_left = 0.0;
  for (const Dist& d : cur) lost_left = std::max(lost_left, d.overflow_left);
  if (lost_left > opt.eps_trunc) {
    gm.trunc.margin_warning = true;
    gm.trunc.residual_bound += lost_left;
  }
  return gm;
}

GridMeasure uv_transform(const GridMeasure& in, const PerronData& pd, UVDirection dir) {
  GridMeasure out = in;
  for (int i = 0; i < in.m; ++i)
    for (int j = 0; j < in.m; ++j) {
      const double f =
          dir == UVDirection::VtoU ? pd.v[j] / pd.v[i] : pd.v[i] / pd.v[j];
      scale_dist(out.entry(i, j), f);
    }
  return out;
}

TabooOccupation taboo_occupation(const SemiMarkovKernel& p_kernel, int i, const Grid& window,
                                 const RenewalOptions& opt) {
  const int m = p_kernel.m;
  for (int r = 0; r < m; ++r) {
    double s = 0.0;
    for (int c = 0; c < m; ++c) s += p_kernel.weights(r, c);
    if (std::abs(s - 1.0) > 1e-9)
      throw Error("taboo_occupation: stochastic form required (row sums one)");
  }
  const Grid comp = computation_grid(p_kernel, window, opt.margin_factor);

  TabooOccupation occ;
  occ.grid = window;
  occ.m = m;
  occ.base_state = i;
  occ.row.assign(m, Dist{});
  for (auto& d : occ.row) d.step = p_kernel.step;

  std::vector<Dist> cur(m);
  for (int j = 0; j < m; ++j) cur[j].step = p_kernel.step;
  cur[i].atoms.push_back({0.0, 1.0});

  for (int n = 0;; ++n) {
    if (n > opt.max_terms)
      throw TruncationFailure("taboo_occupation: pre-return series did not converge");
    double mass = 0.0;
    for (int j = 0; j < m; ++j) {
      Dist clipped = cur[j];
      clip_dist(clipped, window);
      clipped.overflow_left = clipped.overflow_right = 0.0;
      add_dist(occ.row[j], clipped);
      mass += total_mass(cur[j]);
    }
    occ.trunc.term_mass.push_back(mass);
    occ.trunc.n_terms = n + 1;
    if (mass < opt.eps_trunc) break;
    // one step of the kernel with transitions into i removed
    std::vector<Dist> nxt(m);
    for (int j = 0; j < m; ++j) nxt[j].step = p_kernel.step;
    for (int l = 0; l < m; ++l) {
      if (cur[l].empty()) continue;
      for (int j = 0; j < m; ++j) {
        if (j == i) continue;
        const double w = p_kernel.weights(l, j);
        if (w == 0.0) continue;
        add_dist(nxt[j], dist_convolve(cur[l], p_kernel.dist(l, j)), w);
      }
    }
    for (Dist& d : nxt) clip_dist(d, comp);
    cur = std::move(nxt);
  }
  finish_report(occ.trunc, opt.eps_trunc);
  return occ;
}

LocalBoundReport local_bound_check(const GridMeasure& u, const Vec& pi, double h) {
  LocalBoundReport rep;
  const Grid& g = u.grid;
  for (int i = 0; i < u.m; ++i) {
    const double uii_local = interval_mass(u.entry(i, i), -h, h, true, true);
    for (int j = 0; j < u.m; ++j) {
      const Dist& d = u.entry(i, j);
      LocalBoundReport::Entry e;
      e.i = i;
      e.j = j;
      e.bound = (pi[j] / pi[i]) * uii_local;
      std::vector<double> candidates;
      for (std::int64_t c = 0; c <= g.ncells(); ++c) {
        const double t = g.point(c);
        if (t + h <= g.right() + 1e-12) candidates.push_back(t);
      }
      for (const Atom& a : d.atoms) {
        candidates.push_back(a.x);
        candidates.push_back(a.x - h);
      }
      for (double t : candidates) {
        if (t < g.left() - 1e-12 || t + h > g.right() + 1e-12) continue;
        const double mass = interval_mass(d, t, t + h, true, true);
        if (mass > e.sup_slab) {
          e.sup_slab = mass;
          e.t_at_sup = t;
        }
      }
      e.ratio = e.bound > 0.0 ? e.sup_slab / e.bound : 0.0;
      rep.max_ratio = std::max(rep.max_ratio, e.ratio);
      rep.entries.push_back(e);
    }
  }
  return rep;
}

BlackwellReport blackwell_check(const GridMeasure& v, const PerronData& pd,
                                const KernelStats& stats, double h, double t_eval) {
  if (stats.lattice.arithmetic)
    throw ArithmeticKernel(
        "blackwell_check: kernel is arithmetic; use the span-lattice variant");
  BlackwellReport rep;
  rep.h = h;
  rep.t_eval = t_eval;
  const double a = v.grid.left();
  for (int i = 0; i < v.m; ++i)
    for (int j = 0; j < v.m; ++j) {
      const double limit = pd.v[i] * pd.u[j] * h / stats.mu;
      BlackwellReport::Entry e;
      e.i = i;
      e.j = j;
      e.increment = interval_mass(v.entry(i, j), t_eval, t_eval + h, false, true);
      e.limit = limit;
      e.abs_error = std::abs(e.increment - limit);
      rep.right.push_back(e);

      BlackwellReport::Entry l;
      l.i = i;
      l.j = j;
      l.increment = interval_mass(v.entry(i, j), a, a + h, false, true);
      l.limit = 0.0;
      l.abs_error = l.increment;
      rep.left_edge.push_back(l);
    }
  return rep;
}

BlackwellReport blackwell_check_arithmetic(const GridMeasure& v, const PerronData& pd,
                                           const KernelStats& stats, double t_eval) {
  if (!stats.lattice.arithmetic)
    throw Error("blackwell_check_arithmetic: kernel is not arithmetic");
  const double d = stats.lattice.span;
  BlackwellReport rep;
  rep.h = d;
  rep.t_eval = t_eval;
  for (int i = 0; i < v.m; ++i)
    for (int j = 0; j < v.m; ++j) {
      const double offset = stats.lattice.gamma[j] - stats.lattice.gamma[i];
      const double t = offset + d * std::round((t_eval - offset) / d);
      const double eps = 1e-9 * std::max(1.0, std::abs(t));
      BlackwellReport::Entry e;
      e.i = i;
      e.j = j;
      e.increment = interval_mass(v.entry(i, j), t - eps, t + eps, true, true);
      e.limit = pd.v[i] * pd.u[j] * d / stats.mu;
      e.abs_error = std::abs(e.increment - e.limit);
      rep.right.push_back(e);

      const double tl = offset + d * std::ceil((v.grid.left() - offset) / d);
      BlackwellReport::Entry l;
      l.i = i;
      l.j = j;
      l.increment = interval_mass(v.entry(i, j), tl - eps, tl + eps, true, true);
      l.limit = 0.0;
      l.abs_error = l.increment;
      rep.left_edge.push_back(l);
    }
  return rep;
}

StoneDiagnostics stone_density(const GridMeasure& v, const PerronData& pd,
                               const KernelStats& stats) {
  if (stats.lattice.arithmetic || !stats.lattice.spread_out)
    throw NotSpreadOut("stone_density: kernel is not spread out");
  StoneDiagnostics sd;
  sd.grid = v.grid;
  sd.m = v.m;
  const auto ncells = static_cast<std::size_t>(v.grid.ncells());
  sd.density.assign(static_cast<std::size_t>(v.m) * v.m, Vec(ncells, 0.0));
  sd.right_edge.assign(sd.density.size(), 0.0);
  sd.left_edge.assign(sd.density.size(), 0.0);
  sd.limit.assign(sd.density.size(), 0.0);
  const auto edge_cells = std::max<std::size_t>(5, ncells / 20);
  for (int i = 0; i < v.m; ++i)
    for (int j = 0; j < v.m; ++j) {
      const std::size_t e = static_cast<std::size_t>(i) * v.m + j;
      const Dist& d = v.entry(i, j);
      Vec& den = sd.density[e];
      for (std::size_t c = 0; c < d.cells.size(); ++c) {
        const std::int64_t abs_idx = d.origin + static_cast<std::int64_t>(c);
        if (abs_idx < v.grid.lo || abs_idx >= v.grid.hi) continue;
        den[static_cast<std::size_t>(abs_idx - v.grid.lo)] = d.cells[c] / d.step;
      }
      double right = 0.0, left = 0.0;
      for (std::size_t c = 0; c < edge_cells; ++c) {
        right += den[ncells - 1 - c];
        left += den[c];
      }
      sd.right_edge[e] = right / static_cast<double>(edge_cells);
      sd.left_edge[e] = left / static_cast<double>(edge_cells);
      sd.limit[e] = pd.v[i] * pd.u[j] / stats.mu;
    }
  return sd;
}

void write_measure_csv(const GridMeasure& gm, const std::vector<std::string>& labels,
                       std::ostream& os) {
  os << "i,j,cell_left,cell_right,mass,atom_flag\n";
  for (int i = 0; i < gm.m; ++i)
    for (int j = 0; j < gm.m; ++j) {
      const Dist& d = gm.entry(i, j);
      const std::string li = labels.empty() ? std::to_string(i) : labels[i];
      const std::string lj = labels.empty() ? std::to_string(j) : labels[j];
      for (std::size_t c = 0; c < d.cells.size(); ++c) {
        const double lo = static_cast<double>(d.origin + static_cast<std::int64_t>(c)) * d.step;
        os << li << ',' << lj << ',' << csv_num(lo) << ',' << csv_num(lo + d.step) << ','
           << csv_num(d.cells[c]) << ",0\n";
      }
      for (const Atom& a : d.atoms)
        os << li << ',' << lj << ',' << csv_num(a.x) << ',' << csv_num(a.x) << ','
           << csv_num(a.w) << ",1\n";
    }
}

}  // namespace mrt
