#include "mrt/dist.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mrt/errors.hpp"
#include "mrt/fft.hpp"

namespace mrt {

namespace {

constexpr double kAtomSnapRel = 1e-12;
constexpr std::size_t kMaxAtoms = 1u << 20;

double snap_tol_for(double x) { return kAtomSnapRel * std::max(1.0, std::abs(x)); }

void sort_merge_atoms(std::vector<Atom>& atoms) {
  std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.x < b.x; });
  std::vector<Atom> out;
  out.reserve(atoms.size());
  for (const Atom& a : atoms) {
    if (a.w == 0.0) continue;
    if (!out.empty() && std::abs(a.x - out.back().x) <= snap_tol_for(a.x))
      out.back().w += a.w;
    else
      out.push_back(a);
  }
  atoms = std::move(out);
  if (atoms.size() > kMaxAtoms) throw Error("atom count exploded; check the model's lattice");
}

// Accumulator for cell blocks with varying origins.
struct CellAccum {
  std::int64_t lo = 0;
  std::vector<double> v;

  void add(std::int64_t origin, const double* cells, std::size_t n, double w) {
    if (n == 0 || w == 0.0) return;
    if (v.empty()) {
      lo = origin;
      v.assign(cells, cells + n);
      if (w != 1.0)
        for (double& x : v) x *= w;
      return;
    }
    const std::int64_t new_lo = std::min(lo, origin);
    const std::int64_t new_hi = std::max(lo + static_cast<std::int64_t>(v.size()),
                                         origin + static_cast<std::int64_t>(n));
    if (new_lo != lo || new_hi != lo + static_cast<std::int64_t>(v.size())) {
      std::vector<double> nv(static_cast<std::size_t>(new_hi - new_lo), 0.0);
      std::copy(v.begin(), v.end(), nv.begin() + static_cast<std::size_t>(lo - new_lo));
      v = std::move(nv);
      lo = new_lo;
    }
    double* dst = v.data() + (origin - lo);
    for (std::size_t i = 0; i < n; ++i) dst[i] += w * cells[i];
  }

  void move_into(Dist& d) {
    d.origin = lo;
    d.cells = std::move(v);
  }
};

void trim_cells(Dist& d) {
  std::size_t a = 0, b = d.cells.size();
  while (a < b && d.cells[a] == 0.0) ++a;
  while (b > a && d.cells[b - 1] == 0.0) --b;
  if (a == 0 && b == d.cells.size()) return;
  d.origin += static_cast<std::int64_t>(a);
  d.cells.assign(d.cells.begin() + static_cast<std::ptrdiff_t>(a),
                 d.cells.begin() + static_cast<std::ptrdiff_t>(b));
}

// Splits a lattice offset into whole cells and a fractional part in [0, 1),
// snapping near-integers so that on-lattice shifts stay exact.
void split_offset(double x, double step, std::int64_t& q, double& theta) {
  const double t = x / step;
  q = static_cast<std::int64_t>(std::floor(t));
  theta = t - static_cast<double>(q);
  if (theta < 1e-9) theta = 0.0;
  if (theta > 1.0 - 1e-9) {
    theta = 0.0;
    ++q;
  }
}

// Shift a cell block by x (mass- and mean-preserving splat).
void add_shifted_block(CellAccum& acc, std::int64_t origin, const std::vector<double>& cells,
                       double x, double step, double w) {
  if (cells.empty() || w == 0.0) return;
  std::int64_t q;
  double theta;
  split_offset(x, step, q, theta);
  if (theta == 0.0) {
    acc.add(origin + q, cells.data(), cells.size(), w);
    return;
  }
  acc.add(origin + q, cells.data(), cells.size(), w * (1.0 - theta));
  acc.add(origin + q + 1, cells.data(), cells.size(), w * theta);
}

// Cumulative in-window cell mass on (-inf, x], uniform within cells.
double cell_cum(const Dist& d, double x) {
  if (d.cells.empty()) return 0.0;
  const double left = static_cast<double>(d.origin) * d.step;
  const double right = static_cast<double>(d.origin + static_cast<std::int64_t>(d.cells.size())) *
                       d.step;
  if (x <= left) return 0.0;
  double total = 0.0;
  if (x >= right) {
    for (double m : d.cells) total += m;
    return total;
  }
  const double t = x / d.step - static_cast<double>(d.origin);
  const auto idx = static_cast<std::int64_t>(std::floor(t));
  const double frac = t - static_cast<double>(idx);
  for (std::int64_t k = 0; k < idx && k < static_cast<std::int64_t>(d.cells.size()); ++k)
    total += d.cells[static_cast<std::size_t>(k)];
  if (idx >= 0 && idx < static_cast<std::int64_t>(d.cells.size()))
    total += d.cells[static_cast<std::size_t>(idx)] * frac;
  return total;
}

}  // namespace

Dist delta_dist(double location, double step, double mass) {
  Dist d;
  d.step = step;
  if (mass != 0.0) d.atoms.push_back({location, mass});
  d.family = make_point(location);
  return d;
}

double total_mass(const Dist& d) {
  double s = d.overflow_left + d.overflow_right;
  for (double m : d.cells) s += m;
  for (const Atom& a : d.atoms) s += a.w;
  return s;
}

double in_window_mass(const Dist& d) {
  double s = 0.0;
  for (double m : d.cells) s += m;
  for (const Atom& a : d.atoms) s += a.w;
  return s;
}

double interval_mass(const Dist& d, double a, double b, bool include_a, bool include_b) {
  if (!(a <= b)) return 0.0;
  double m = cell_cum(d, b) - cell_cum(d, a);
  for (const Atom& at : d.atoms) {
    const double tol = snap_tol_for(at.x);
    const bool at_a = std::abs(at.x - a) <= tol;
    const bool at_b = std::abs(at.x - b) <= tol;
    if (at_a) {
      if (include_a) m += at.w;
    } else if (at_b) {
      if (include_b) m += at.w;
    } else if (at.x > a && at.x < b) {
      m += at.w;
    }
  }
  return m;
}

double mass_at_most(const Dist& d, double x) {
  double m = d.overflow_left + cell_cum(d, x);
  for (const Atom& a : d.atoms)
    if (a.x <= x + snap_tol_for(a.x)) m += a.w;
  return m;
}

std::pair<double, double> effective_support(const Dist& d, double tol) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  if (!d.atoms.empty()) {
    lo = d.atoms.front().x;
    hi = d.atoms.back().x;
  }
  if (!d.cells.empty()) {
    double cum = 0.0;
    std::size_t a = 0;
    while (a + 1 < d.cells.size() && cum + d.cells[a] <= tol) cum += d.cells[a++];
    cum = 0.0;
    std::size_t b = d.cells.size();
    while (b > a + 1 && cum + d.cells[b - 1] <= tol) cum += d.cells[--b];
    lo = std::min(lo, static_cast<double>(d.origin + static_cast<std::int64_t>(a)) * d.step);
    hi = std::max(hi, static_cast<double>(d.origin + static_cast<std::int64_t>(b)) * d.step);
  }
  if (lo > hi) lo = hi = 0.0;
  return {lo, hi};
}

void scale_dist(Dist& d, double c) {
  for (double& m : d.cells) m *= c;
  for (Atom& a : d.atoms) a.w *= c;
  d.overflow_left *= c;
  d.overflow_right *= c;
}

Dist scaled(const Dist& d, double c) {
  Dist out = d;
  scale_dist(out, c);
  return out;
}

void add_dist(Dist& into, const Dist& d, double w) {
  if (into.step != d.step) throw GridMismatch("add_dist: identical grid step required");
  CellAccum acc;
  acc.add(into.origin, into.cells.data(), into.cells.size(), 1.0);
  acc.add(d.origin, d.cells.data(), d.cells.size(), w);
  acc.move_into(into);
  for (const Atom& a : d.atoms) into.atoms.push_back({a.x, a.w * w});
  sort_merge_atoms(into.atoms);
  into.overflow_left += w * d.overflow_left;
  into.overflow_right += w * d.overflow_right;
  into.family.reset();
}

void clip_dist(Dist& d, const Grid& g) {
  const double wl = g.left(), wr = g.right();
  // cells
  if (!d.cells.empty()) {
    const std::int64_t lo = d.origin;
    const std::int64_t hi = d.origin + static_cast<std::int64_t>(d.cells.size());
    if (lo < g.lo) {
      const std::int64_t cut = std::min(g.lo, hi) - lo;
      for (std::int64_t k = 0; k < cut; ++k)
        d.overflow_left += d.cells[static_cast<std::size_t>(k)];
      d.cells.erase(d.cells.begin(), d.cells.begin() + static_cast<std::ptrdiff_t>(cut));
      d.origin += cut;
    }
    if (hi > g.hi && !d.cells.empty()) {
      const std::int64_t keep = std::max<std::int64_t>(g.hi - d.origin, 0);
      for (std::size_t k = static_cast<std::size_t>(keep); k < d.cells.size(); ++k)
        d.overflow_right += d.cells[k];
      d.cells.resize(static_cast<std::size_t>(keep));
    }
  }
  // atoms
  std::vector<Atom> kept;
  kept.reserve(d.atoms.size());
  for (const Atom& a : d.atoms) {
    if (a.x < wl - snap_tol_for(a.x))
      d.overflow_left += a.w;
    else if (a.x > wr + snap_tol_for(a.x))
      d.overflow_right += a.w;
    else
      kept.push_back(a);
  }
  d.atoms = std::move(kept);
  trim_cells(d);
}

Dist dist_convolve(const Dist& f, const Dist& g) {
  if (f.step != g.step) throw GridMismatch("dist_convolve: identical grid step required");
  Dist r;
  r.step = f.step;

  // atom x atom
  for (const Atom& a : f.atoms)
    for (const Atom& b : g.atoms) r.atoms.push_back({a.x + b.x, a.w * b.w});
  sort_merge_atoms(r.atoms);

  CellAccum acc;
  // cells x cells with the half-cell split
  if (!f.cells.empty() && !g.cells.empty()) {
    std::vector<double> raw = convolve_cells(f.cells, g.cells);
    std::vector<double> split(raw.size() + 1, 0.0);
    split[0] = 0.5 * raw[0];
    for (std::size_t k = 1; k < raw.size(); ++k) split[k] = 0.5 * (raw[k] + raw[k - 1]);
    split[raw.size()] = 0.5 * raw.back();
    acc.add(f.origin + g.origin, split.data(), split.size(), 1.0);
  }
  // atoms x cells
  for (const Atom& a : f.atoms) add_shifted_block(acc, g.origin, g.cells, a.x, r.step, a.w);
  for (const Atom& b : g.atoms) add_shifted_block(acc, f.origin, f.cells, b.x, r.step, b.w);
  acc.move_into(r);
  trim_cells(r);

  // Overflow propagation keeps total mass multiplicative; products with an
  // ambiguous side (left x right) land in the left bucket.
  const double tf = total_mass(f), tg = total_mass(g);
  const double f_in = tf - f.overflow_left - f.overflow_right;
  r.overflow_left = f.overflow_left * tg + (tf - f.overflow_left) * g.overflow_left;
  r.overflow_right = f.overflow_right * (tg - g.overflow_left) + f_in * g.overflow_right;
  return r;
}

namespace {

// Discretize a leaf analytic law (one with a CDF in closed form).
Dist discretize_leaf(const DistSpec& spec, const Grid& window, double trim_tol) {
  Dist d;
  d.step = window.step;
  const double smin = spec_support_min(spec);
  const double smax = spec_support_max(spec);
  std::int64_t c0 = window.lo, c1 = window.hi;
  if (std::isfinite(smin))
    c0 = std::max(c0, static_cast<std::int64_t>(std::floor(smin / d.step + 1e-9)));
  if (std::isfinite(smax))
    c1 = std::min(c1, static_cast<std::int64_t>(std::ceil(smax / d.step - 1e-9)));
  if (c1 < c0) c1 = c0;
  d.origin = c0;
  d.cells.resize(static_cast<std::size_t>(c1 - c0), 0.0);
  double prev = spec_cdf(spec, static_cast<double>(c0) * d.step);
  d.overflow_left = prev;
  for (std::int64_t k = c0; k < c1; ++k) {
    const double cur = spec_cdf(spec, static_cast<double>(k + 1) * d.step);
    d.cells[static_cast<std::size_t>(k - c0)] = std::max(cur - prev, 0.0);
    prev = cur;
  }
  d.overflow_right = 1.0 - prev;

  // trim negligible tail cells into the overflow buckets
  {
    std::size_t a = 0, b = d.cells.size();
    double cum = 0.0;
    while (a < b && cum + d.cells[a] <= trim_tol) {
      cum += d.cells[a];
      ++a;
    }
    d.overflow_left += cum;
    cum = 0.0;
    while (b > a && cum + d.cells[b - 1] <= trim_tol) {
      cum += d.cells[b - 1];
      --b;
    }
    d.overflow_right += cum;
    d.origin += static_cast<std::int64_t>(a);
    d.cells.assign(d.cells.begin() + static_cast<std::ptrdiff_t>(a),
                   d.cells.begin() + static_cast<std::ptrdiff_t>(b));
  }

  // Match the first moment of the windowed law with one sub-cell shift.
  double mass = 0.0, model_mean = 0.0;
  for (std::size_t k = 0; k < d.cells.size(); ++k) {
    mass += d.cells[k];
    model_mean += d.cells[k] * (static_cast<double>(d.origin + static_cast<std::int64_t>(k)) + 0.5) *
                  d.step;
  }
  if (mass > 1e-14) {
    const double lo_edge = static_cast<double>(d.origin) * d.step;
    const double hi_edge =
        static_cast<double>(d.origin + static_cast<std::int64_t>(d.cells.size())) * d.step;
    const double target = spec_partial_mean(spec, lo_edge, hi_edge);
    double shift = (target - model_mean) / mass;
    shift = std::clamp(shift, -0.49 * d.step, 0.49 * d.step);
    if (shift != 0.0) {
      CellAccum acc;
      add_shifted_block(acc, d.origin, d.cells, shift, d.step, 1.0);
      Dist shifted;
      shifted.step = d.step;
      acc.move_into(shifted);
      d.origin = shifted.origin;
      d.cells = std::move(shifted.cells);
      trim_cells(d);
    }
  }
  return d;
}

}  // namespace

Dist discretize(const DistSpec& spec, const Grid& window, double trim_tol) {
  using K = DistSpec::Kind;
  Dist d;
  switch (spec.kind) {
    case K::Point: {
      d = delta_dist(spec.a, window.step);
      clip_dist(d, window);
      break;
    }
    case K::Exponential:
    case K::Normal:
    case K::Uniform:
    case K::TiltedUniform:
      d = discretize_leaf(spec, window, trim_tol);
      break;
    case K::Shift: {
      Grid inner_window = window;
      std::int64_t q;
      double theta;
      split_offset(spec.a, window.step, q, theta);
      inner_window.lo -= q + 1;
      inner_window.hi -= q;
      Dist in = discretize(*spec.parts[0], inner_window, trim_tol);
      d.step = window.step;
      d.overflow_left = in.overflow_left;
      d.overflow_right = in.overflow_right;
      CellAccum acc;
      add_shifted_block(acc, in.origin, in.cells, spec.a, d.step, 1.0);
      acc.move_into(d);
      for (const Atom& a : in.atoms) d.atoms.push_back({a.x + spec.a, a.w});
      sort_merge_atoms(d.atoms);
      clip_dist(d, window);
      break;
    }
    case K::Negate: {
      Grid mirror{window.step, -window.hi, -window.lo};
      Dist in = discretize(*spec.parts[0], mirror, trim_tol);
      d.step = window.step;
      d.overflow_left = in.overflow_right;
      d.overflow_right = in.overflow_left;
      d.cells.assign(in.cells.rbegin(), in.cells.rend());
      d.origin = -(in.origin + static_cast<std::int64_t>(in.cells.size()));
      for (auto it = in.atoms.rbegin(); it != in.atoms.rend(); ++it)
        d.atoms.push_back({-it->x, it->w});
      sort_merge_atoms(d.atoms);
      break;
    }
    case K::Mixture: {
      d.step = window.step;
      for (std::size_t k = 0; k < spec.parts.size(); ++k)
        add_dist(d, discretize(*spec.parts[k], window, trim_tol), spec.weights[k]);
      break;
    }
    case K::Sum: {
      d = discretize(*spec.parts[0], window, trim_tol);
      for (std::size_t k = 1; k < spec.parts.size(); ++k) {
        d = dist_convolve(d, discretize(*spec.parts[k], window, trim_tol));
        clip_dist(d, window);
      }
      break;
    }
  }
  trim_cells(d);
  d.family = std::make_shared<DistSpec>(spec);
  return d;
}

MomentResult dist_mean(const Dist& d) {
  if (d.family) return {spec_mean(**d.family), false};
  MomentResult r;
  for (const Atom& a : d.atoms) r.value += a.w * a.x;
  for (std::size_t k = 0; k < d.cells.size(); ++k)
    r.value += d.cells[k] * (static_cast<double>(d.origin + static_cast<std::int64_t>(k)) + 0.5) *
               d.step;
  r.tail_warning = d.overflow_left + d.overflow_right > 1e-12;
  return r;
}

MomentResult exponential_moment(const Dist& d, double lambda) {
  if (d.family) return {spec_mgf(**d.family, lambda), false};
  MomentResult r;
  for (const Atom& a : d.atoms) r.value += a.w * std::exp(lambda * a.x);
  for (std::size_t k = 0; k < d.cells.size(); ++k)
    r.value += d.cells[k] *
               std::exp(lambda *
                        (static_cast<double>(d.origin + static_cast<std::int64_t>(k)) + 0.5) *
                        d.step);
  r.tail_warning = d.overflow_left + d.overflow_right > 1e-12;
  return r;
}

double sample_dist(const Dist& d, Rng& rng) {
  if (d.family) return spec_sample(**d.family, rng);
  const double total = in_window_mass(d);
  if (!(total > 0)) throw Error("sample_dist: empty distribution");
  double u = rng.uniform_co() * total;
  for (const Atom& a : d.atoms) {
    if (u < a.w) return a.x;
    u -= a.w;
  }
  for (std::size_t k = 0; k < d.cells.size(); ++k) {
    if (u < d.cells[k]) {
      const double left = static_cast<double>(d.origin + static_cast<std::int64_t>(k)) * d.step;
      return left + d.step * (d.cells[k] > 0 ? u / d.cells[k] : 0.5);
    }
    u -= d.cells[k];
  }
  return d.atoms.empty()
             ? static_cast<double>(d.origin + static_cast<std::int64_t>(d.cells.size())) * d.step
             : d.atoms.back().x;
}

}  // namespace mrt
