#include "mrt/apps.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "mrt/errors.hpp"
#include "mrt/stats.hpp"

namespace mrt {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// Second crossing of rho(.) = 1 for a log-convex map with rho(0) = 1 and a
// negative slope at 0.  Divergent moments count as +infinity when bracketing.
double find_second_unit_root(const std::function<double(double)>& rho_of, double lo, double hi,
                             double rho_tol, const std::string& who) {
  if (!(lo > 0.0) || !(hi > lo)) throw Error(who + ": invalid bracket");
  auto eval = [&](double x) -> double {
    try {
      return rho_of(x);
    } catch (const DivergentMoment&) {
      return std::numeric_limits<double>::infinity();
    }
  };
  double left = lo;
  double r_left = eval(left);
  if (std::isinf(r_left))
    throw DivergentMoment(who + ": moments diverge at the bracket's lower edge");
  int shrink = 0;
  while (r_left >= 1.0) {
    left *= 0.125;
    if (++shrink > 80)
      throw NoRoot(who + ": no positive root separated from zero");
    r_left = eval(left);
  }
  // geometric scan upward for the crossing
  const int scan = 256;
  double lo_b = left, hi_b = -1.0;
  for (int k = 1; k <= scan; ++k) {
    const double x = left * std::pow(hi / left, static_cast<double>(k) / scan);
    const double r = eval(x);
    if (r >= 1.0) {
      hi_b = x;
      break;
    }
    lo_b = x;
  }
  if (hi_b < 0.0) throw NoRoot(who + ": spectral radius stays below one on the bracket");
  for (int it = 0; it < 200 && hi_b - lo_b > 1e-15 * std::max(1.0, hi_b); ++it) {
    const double mid = 0.5 * (lo_b + hi_b);
    (eval(mid) >= 1.0 ? hi_b : lo_b) = mid;
  }
  double best = lo_b, best_err = std::abs(eval(lo_b) - 1.0);
  const double hi_val = eval(hi_b);
  if (std::isfinite(hi_val) && std::abs(hi_val - 1.0) < best_err) {
    best = hi_b;
    best_err = std::abs(hi_val - 1.0);
  }
  if (!(best_err <= rho_tol))
    throw NonConvergence(who + ": root refinement stalled at |rho-1| = " +
                         std::to_string(best_err));
  return best;
}

// Unique root of a decreasing rho(.) = 1 on [lo, hi].
double find_unit_root_decreasing(const std::function<double(double)>& rho_of, double lo,
                                 double hi, double rho_tol, const std::string& who) {
  double r_lo = rho_of(lo);
  if (std::abs(r_lo - 1.0) <= rho_tol) return lo;
  if (r_lo < 1.0) throw NoRoot(who + ": spectral radius below one on the whole bracket");
  double r_hi = rho_of(hi);
  if (std::abs(r_hi - 1.0) <= rho_tol) return hi;
  if (r_hi > 1.0) throw NoRoot(who + ": spectral radius above one on the whole bracket");
  double a = lo, b = hi;
  for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, b); ++it) {
    const double mid = 0.5 * (a + b);
    (rho_of(mid) >= 1.0 ? a : b) = mid;
  }
  const double best_a = std::abs(rho_of(a) - 1.0), best_b = std::abs(rho_of(b) - 1.0);
  const double best = best_a <= best_b ? a : b;
  if (!(std::min(best_a, best_b) <= rho_tol))
    throw NonConvergence(who + ": root refinement stalled");
  return best;
}

int sample_row(const Matrix& p, int row, Rng& rng) {
  double u = rng.uniform_co();
  const int m = p.cols();
  for (int j = 0; j < m; ++j) {
    if (u < p(row, j)) return j;
    u -= p(row, j);
  }
  return m - 1;
}

int sample_categorical(const Vec& w, Rng& rng) {
  double u = rng.uniform_co();
  for (std::size_t j = 0; j < w.size(); ++j) {
    if (u < w[j]) return static_cast<int>(j);
    u -= w[j];
  }
  return static_cast<int>(w.size()) - 1;
}

std::vector<int> recurrent_states(const Matrix& counts) {
  const int m = counts.rows();
  std::vector<std::vector<char>> reach(m, std::vector<char>(m, 0));
  for (int i = 0; i < m; ++i) {
    reach[i][i] = 1;
    for (int j = 0; j < m; ++j)
      if (counts(i, j) > 0) reach[i][j] = 1;
  }
  for (int k = 0; k < m; ++k)
    for (int i = 0; i < m; ++i)
      if (reach[i][k])
        for (int j = 0; j < m; ++j)
          if (reach[k][j]) reach[i][j] = 1;
  std::vector<int> rec;
  for (int i = 0; i < m; ++i) {
    bool closed = true;
    bool visited = false;
    for (int j = 0; j < m; ++j) {
      if (counts(i, j) > 0 || counts(j, i) > 0) visited = true;
      if (reach[i][j] && !reach[j][i]) closed = false;
    }
    if (closed && visited) rec.push_back(i);
  }
  return rec;
}

// log-log tail slope over a quantile window of a sorted positive sample
double tail_slope(const Vec& sorted, double q_lo, double q_hi, int npts) {
  if (sorted.size() < 1000) return kNan;
  const double t_lo = quantile_sorted(sorted, q_lo);
  const double t_hi = quantile_sorted(sorted, q_hi);
  if (!(t_lo > 0.0) || !(t_hi > t_lo * 1.001)) return kNan;
  Vec xs, ys;
  const auto n = static_cast<double>(sorted.size());
  for (int k = 0; k < npts; ++k) {
    const double t =
        std::exp(std::log(t_lo) + (std::log(t_hi) - std::log(t_lo)) * k / (npts - 1));
    const auto idx = std::upper_bound(sorted.begin(), sorted.end(), t) - sorted.begin();
    const double p = 1.0 - static_cast<double>(idx) / n;
    if (p <= 0.0) continue;
    xs.push_back(std::log(t));
    ys.push_back(std::log(p));
  }
  if (xs.size() < 5) return kNan;
  return fit_line(xs, ys).slope;
}

}  // namespace

double find_tilt_root(const Matrix& p, const std::vector<DistSpecPtr>& g, double bracket_lo,
                      double bracket_hi, double rho_tol) {
  const int m = p.rows();
  const PerronData pd0 = perron_pair(QSMatrix(p));
  double drift = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      if (p(i, j) > 0.0) drift += pd0.pi[i] * p(i, j) * spec_mean(*g[static_cast<std::size_t>(i) * m + j]);
  if (!(drift < 0.0))
    throw Error("find_tilt_root: stationary drift must be negative, got " +
                std::to_string(drift));
  auto rho_of = [&](double lam) {
    Matrix q(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        if (p(i, j) > 0.0)
          q(i, j) = p(i, j) * spec_mgf(*g[static_cast<std::size_t>(i) * m + j], lam);
    return spectral_radius(QSMatrix(q));
  };
  return find_second_unit_root(rho_of, bracket_lo, bracket_hi, rho_tol, "find_tilt_root");
}

TiltModel make_tilt_model(Matrix p, std::vector<DistSpecPtr> g, double bracket_lo,
                          double bracket_hi) {
  TiltModel model;
  model.lambda = find_tilt_root(p, g, bracket_lo, bracket_hi);
  model.tilted = tilted_kernel(p, g, model.lambda);
  model.p = std::move(p);
  model.g = std::move(g);
  return model;
}

LindleyReport lindley_tail(const TiltModel& model, const Vec& t_grid, long n_paths,
                           std::uint64_t seed) {
  const int m = model.p.rows();
  const double lambda = model.lambda;
  const double margin = 30.0 / lambda;
  const Vec& v = model.tilted.pd.v;

  LindleyReport rep;
  rep.lambda = lambda;
  rep.n_paths = n_paths;
  rep.t_grid = t_grid;
  rep.tail.assign(m, Vec(t_grid.size(), 0.0));
  rep.tail_se.assign(m, Vec(t_grid.size(), 0.0));
  rep.compensated.assign(m, Vec(t_grid.size(), 0.0));
  rep.slope.assign(m, 0.0);
  rep.prefactor.assign(m, 0.0);
  rep.ladder_q = Matrix(m, m);
  rep.ladder_q_se = Matrix(m, m);
  rep.row_identity.assign(m, 0.0);
  rep.row_identity_se.assign(m, 0.0);
  Matrix chain_counts(m, m);

  for (int i0 = 0; i0 < m; ++i0) {
    std::vector<long> exceed(t_grid.size(), 0);
    Matrix lq_sum(m, m), lq_sq(m, m);
    for (long r = 0; r < n_paths; ++r) {
      Rng rng = Rng::for_replicate(seed, static_cast<std::uint64_t>(i0) * n_paths + r);
      int cur = i0;
      double s = 0.0, record = 0.0;
      int first_state = -1;
      double first_height = 0.0;
      int prev_ladder = -1;
      long steps = 0;
      while (s > record - margin) {
        const int nxt = sample_row(model.p, cur, rng);
        s += spec_sample(*model.g[static_cast<std::size_t>(cur) * m + nxt], rng);
        cur = nxt;
        if (s > record) {
          record = s;
          if (first_state < 0) {
            first_state = cur;
            first_height = s;
          }
          if (prev_ladder >= 0) chain_counts(prev_ladder, cur) += 1.0;
          prev_ladder = cur;
        }
        if (++steps > 100000000L)
          throw Error("lindley_tail: runaway path; check the drift sign");
      }
      for (std::size_t k = 0; k < t_grid.size(); ++k)
        if (record > t_grid[k]) ++exceed[k];
      if (first_state >= 0) {
        const double val = std::exp(lambda * first_height);
        lq_sum(i0, first_state) += val;
        lq_sq(i0, first_state) += val * val;
      }
    }
    const auto n = static_cast<double>(n_paths);
    Vec xs, ys;
    for (std::size_t k = 0; k < t_grid.size(); ++k) {
      const double p_hat = static_cast<double>(exceed[k]) / n;
      rep.tail[i0][k] = p_hat;
      rep.tail_se[i0][k] = std::sqrt(std::max(p_hat * (1.0 - p_hat), 0.0) / n);
      rep.compensated[i0][k] = std::exp(lambda * t_grid[k]) * p_hat;
      if (exceed[k] >= 10) {
        xs.push_back(t_grid[k]);
        ys.push_back(std::log(p_hat));
      }
    }
    if (xs.size() >= 3) {
      const LineFit f = fit_line(xs, ys);
      rep.slope[i0] = f.slope;
      rep.prefactor[i0] = std::exp(f.intercept);
    } else {
      rep.slope[i0] = kNan;
      rep.prefactor[i0] = kNan;
    }
    double ident = 0.0, var = 0.0;
    for (int j = 0; j < m; ++j) {
      const double mean = lq_sum(i0, j) / n;
      const double sq = lq_sq(i0, j) / n;
      const double se = std::sqrt(std::max(sq - mean * mean, 0.0) / n);
      rep.ladder_q(i0, j) = mean;
      rep.ladder_q_se(i0, j) = se;
      ident += mean * v[j];
      var += se * se * v[j] * v[j];
    }
    rep.row_identity[i0] = ident / v[i0];
    rep.row_identity_se[i0] = std::sqrt(var) / v[i0];
  }
  rep.ladder_chain = Matrix(m, m);
  for (int i = 0; i < m; ++i) {
    double tot = 0.0;
    for (int j = 0; j < m; ++j) tot += chain_counts(i, j);
    if (tot > 0.0)
      for (int j = 0; j < m; ++j) rep.ladder_chain(i, j) = chain_counts(i, j) / tot;
  }
  rep.ladder_class = recurrent_states(chain_counts);
  return rep;
}

MalthusianReport malthusian(const BranchingModel& model) {
  const int mtypes = model.mean_offspring.rows();
  const QSMatrix moff(model.mean_offspring);
  if (!strongly_connected(moff)) throw NotIrreducible("malthusian: mean matrix is reducible");
  MalthusianReport rep;
  rep.primitive = digraph_period(moff) == 1;

  auto rho_of = [&](double alpha) {
    Matrix q(mtypes, mtypes);
    for (int i = 0; i < mtypes; ++i) {
      const double phi = spec_mgf(*model.lifetime[i], -alpha);
      for (int j = 0; j < mtypes; ++j) q(i, j) = model.mean_offspring(i, j) * phi;
    }
    return spectral_radius(QSMatrix(q));
  };
  rep.alpha =
      find_unit_root_decreasing(rho_of, model.bracket_lo, model.bracket_hi, 1e-9, "malthusian");

  // transformed kernel: weights m_ij phi_i(alpha), lifetimes tilted by -alpha
  Matrix weights(mtypes, mtypes);
  std::vector<Dist> dists(static_cast<std::size_t>(mtypes) * mtypes);
  for (int i = 0; i < mtypes; ++i) {
    const double phi = spec_mgf(*model.lifetime[i], -rep.alpha);
    const DistSpecPtr tilted = spec_tilt(*model.lifetime[i], -rep.alpha);
    const Dist row_dist = discretize(*tilted, model.window);
    for (int j = 0; j < mtypes; ++j) {
      weights(i, j) = model.mean_offspring(i, j) * phi;
      dists[static_cast<std::size_t>(i) * mtypes + j] = row_dist;
    }
  }
  SemiMarkovKernel kernel = make_kernel(std::move(weights), std::move(dists));
  rep.pd = perron_pair(QSMatrix(kernel.weights));
  rep.rho_check = rep.pd.rho;
  rep.stats = stationary_drift(kernel, rep.pd);
  if (!rep.primitive && rep.stats.lattice.arithmetic)
    throw NotPrimitive("malthusian: periodic mean matrix with lattice lifetimes");

  const double alpha = rep.alpha;
  GridFunction z = make_grid_function(model.window, mtypes, [&](int i, double t) {
    if (i != model.target_type || t < 0.0) return 0.0;
    const double bar = 1.0 - spec_cdf(*model.lifetime[i], t);
    const double base = std::exp(-alpha * t) * bar;
    return model.total_age ? t * base : base;
  });
  RenewalOptions opt;
  opt.eps_trunc = model.eps_trunc;
  const GridMeasure v = renewal_measure(kernel, rep.pd, rep.stats, model.window, opt);
  MreSolution sol = solve_mre(kernel, rep.pd, v, z);
  rep.limit = asymptotic_limit(z, rep.pd, rep.stats);
  rep.right_edge.assign(mtypes, 0.0);
  const auto npts = sol.z_star.values[0].size();
  const auto edge = std::max<std::size_t>(3, npts / 50);
  for (int i = 0; i < mtypes; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < edge; ++k) s += sol.z_star.values[i][npts - 1 - k];
    rep.right_edge[i] = s / static_cast<double>(edge);
  }
  rep.z = std::move(sol.z_star);
  return rep;
}

PerpetuityReport perpetuity(const PerpetuityModel& model, long n_samples, std::uint64_t seed) {
  const int m = model.p.rows();
  if (static_cast<int>(model.values.size()) != m)
    throw Error("perpetuity: one multiplier value per state required");
  for (double s : model.values)
    if (!(s > 0.0)) throw Error("perpetuity: multiplier values must be positive");

  PerpetuityReport rep;
  const PerronData pd = perron_pair(QSMatrix(model.p));
  const Vec& pi = pd.u;  // stationary distribution of the forward chain
  double elog = 0.0;
  for (int s = 0; s < m; ++s) elog += pi[s] * std::log(model.values[s]);
  rep.moment_ok = elog < 0.0;
  if (!rep.moment_ok)
    throw Error("perpetuity: requires E log A < 0, got " + std::to_string(elog));

  rep.backward = Matrix(m, m);
  for (int s = 0; s < m; ++s)
    for (int s2 = 0; s2 < m; ++s2) rep.backward(s, s2) = pi[s2] * model.p(s2, s) / pi[s];

  auto rho_of = [&](double alpha) {
    Matrix q(m, m);
    for (int s = 0; s < m; ++s) {
      const double sa = std::pow(model.values[s], alpha);
      for (int s2 = 0; s2 < m; ++s2) q(s, s2) = sa * rep.backward(s, s2);
    }
    return spectral_radius(QSMatrix(q));
  };
  rep.alpha = find_second_unit_root(rho_of, model.bracket_lo, model.bracket_hi, 1e-10,
                                    "perpetuity");
  rep.rho_check = rho_of(rep.alpha);
  rep.n_samples = n_samples;

  // backward-series sampler
  Vec back(static_cast<std::size_t>(n_samples));
  for (long r = 0; r < n_samples; ++r) {
    Rng rng = Rng::for_replicate(seed, static_cast<std::uint64_t>(r));
    int k = sample_categorical(pi, rng);
    double y = spec_sample(*model.b_law, rng);
    double prod = model.values[k];
    while (prod > 1e-12) {
      y += prod * spec_sample(*model.b_law, rng);
      k = sample_row(rep.backward, k, rng);
      prod *= model.values[k];
    }
    back[static_cast<std::size_t>(r)] = y;
  }

  // forward iteration with burn-in, keeping (Y_{n-1}, A_n, Y_n) pairs
  const long n_fwd = std::min<long>(n_samples, 200000);
  const long burn = static_cast<long>(std::ceil(std::log(1e-12) / elog)) + 64;
  Vec fwd(static_cast<std::size_t>(n_fwd));
  std::vector<int> a_state(static_cast<std::size_t>(n_fwd));
  Vec y_prev(static_cast<std::size_t>(n_fwd));
  for (long r = 0; r < n_fwd; ++r) {
    Rng rng = Rng::for_replicate(seed + 0x517CC1B727220A95ULL, static_cast<std::uint64_t>(r));
    int k = sample_categorical(pi, rng);
    double y = 0.0, prev = 0.0;
    for (long step = 0; step < burn; ++step) {
      const int nxt = sample_row(model.p, k, rng);
      prev = y;
      y = model.values[nxt] * y + spec_sample(*model.b_law, rng);
      k = nxt;
    }
    fwd[static_cast<std::size_t>(r)] = y;
    a_state[static_cast<std::size_t>(r)] = k;
    y_prev[static_cast<std::size_t>(r)] = prev;
  }

  Vec abs_sorted, pos_sorted, neg_sorted;
  abs_sorted.reserve(back.size());
  for (double y : back) {
    abs_sorted.push_back(std::abs(y));
    if (y > 0) pos_sorted.push_back(y);
    if (y < 0) neg_sorted.push_back(-y);
  }
  std::sort(abs_sorted.begin(), abs_sorted.end());
  std::sort(pos_sorted.begin(), pos_sorted.end());
  std::sort(neg_sorted.begin(), neg_sorted.end());
  rep.slope_abs = tail_slope(abs_sorted, 0.99, 0.9997, 25);
  rep.slope_pos = tail_slope(pos_sorted, 0.99, 0.9997, 25);
  rep.slope_neg = tail_slope(neg_sorted, 0.99, 0.9997, 25);

  Vec back_head(back.begin(),
                back.begin() + static_cast<std::ptrdiff_t>(std::min<long>(n_fwd, n_samples)));
  const KsResult ks = ks_two_sample(back_head, fwd);
  rep.ks_stat = ks.statistic;
  rep.ks_p = ks.p_value;

  // smoothed tail functions on a log grid spanning the fitted tail window
  if (!abs_sorted.empty() && abs_sorted.back() > 0.0) {
    const double t_lo = std::log(std::max(quantile_sorted(abs_sorted, 0.5), 1e-8));
    const double t_hi = std::log(std::max(quantile_sorted(abs_sorted, 0.9997), 1e-6));
    const int npts = 16;
    rep.t_grid.resize(npts);
    rep.z_plus.assign(m, Vec(npts, 0.0));
    rep.z_minus.assign(m, Vec(npts, 0.0));
    for (int kpt = 0; kpt < npts; ++kpt) {
      const double t = t_lo + (t_hi - t_lo) * kpt / (npts - 1);
      rep.t_grid[kpt] = t;
      const double et = std::exp(t);
      Vec acc_p(m, 0.0), acc_m(m, 0.0);
      for (long r = 0; r < n_fwd; ++r) {
        const int s = a_state[static_cast<std::size_t>(r)];
        const double sy = model.values[s] * y_prev[static_cast<std::size_t>(r)];
        const double up = std::min(et, std::max(sy, 0.0));
        const double um = std::min(et, std::max(-sy, 0.0));
        acc_p[s] += std::pow(up, rep.alpha + 1.0);
        acc_m[s] += std::pow(um, rep.alpha + 1.0);
      }
      for (int s = 0; s < m; ++s) {
        const double norm = pi[s] * et * (rep.alpha + 1.0) * static_cast<double>(n_fwd);
        rep.z_plus[s][kpt] = acc_p[s] / norm;
        rep.z_minus[s][kpt] = acc_m[s] / norm;
      }
    }
  }
  return rep;
}

}  // namespace mrt
