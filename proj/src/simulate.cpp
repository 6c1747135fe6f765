#include "mrt/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "mrt/csv.hpp"
#include "mrt/errors.hpp"

namespace mrt {

Dist analytic_dist(DistSpecPtr spec, double step) {
  Dist d;
  d.step = step;
  d.family = std::move(spec);
  return d;
}

PathRecord sample_path(const Matrix& p, const std::vector<Dist>& f, int i0, int n_steps,
                       std::uint64_t seed) {
  const int m = p.rows();
  if (f.size() != static_cast<std::size_t>(m) * m) throw Error("sample_path: shape mismatch");
  Rng rng(seed);
  PathRecord path;
  path.seed = seed;
  path.states.reserve(n_steps + 1);
  path.increments.reserve(n_steps);
  path.partial_sums.reserve(n_steps + 1);
  path.states.push_back(i0);
  path.partial_sums.push_back(0.0);
  double s = 0.0;
  int cur = i0;
  for (int n = 0; n < n_steps; ++n) {
    double u = rng.uniform_co();
    int nxt = m - 1;
    for (int j = 0; j < m; ++j) {
      if (u < p(cur, j)) {
        nxt = j;
        break;
      }
      u -= p(cur, j);
    }
    const double x = sample_dist(f[static_cast<std::size_t>(cur) * m + nxt], rng);
    cur = nxt;
    s += x;
    path.states.push_back(cur);
    path.increments.push_back(x);
    path.partial_sums.push_back(s);
  }
  return path;
}

std::vector<CyclePoint> return_cycles(const PathRecord& path, int i) {
  if (path.states.empty() || path.states.front() != i)
    throw Error("return_cycles: path must start in the return state");
  std::vector<CyclePoint> cycles;
  for (std::size_t n = 1; n < path.states.size(); ++n)
    if (path.states[n] == i) cycles.push_back({static_cast<long>(n), path.partial_sums[n]});
  if (cycles.size() < 2)
    throw InsufficientVisits("return_cycles: fewer than two returns observed");
  return cycles;
}

namespace {

void mean_se(const Vec& xs, double& mean, double& se) {
  const auto n = static_cast<double>(xs.size());
  mean = 0.0;
  se = 0.0;
  if (xs.empty()) return;
  for (double x : xs) mean += x;
  mean /= n;
  if (xs.size() < 2) return;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  se = std::sqrt(ss / (n - 1.0) / n);
}

}  // namespace

CycleEstimates cycle_estimators(const std::vector<PathRecord>& paths, int i, int m,
                                const std::function<double(int, double)>& g) {
  Vec cyc_s, cyc_len, cyc_g;
  std::vector<Vec> cyc_occ(m);
  for (const PathRecord& path : paths) {
    if (path.states.empty() || path.states.front() != i)
      throw Error("cycle_estimators: paths must start in the return state");
    long prev = 0;
    Vec occ(m, 0.0);
    double gsum = 0.0;
    for (std::size_t n = 1; n < path.states.size(); ++n) {
      occ[path.states[n]] += 1.0;
      if (g) gsum += g(path.states[n], path.increments[n - 1]);
      if (path.states[n] == i) {
        cyc_s.push_back(path.partial_sums[n] - path.partial_sums[prev]);
        cyc_len.push_back(static_cast<double>(static_cast<long>(n) - prev));
        for (int j = 0; j < m; ++j) cyc_occ[j].push_back(occ[j]);
        if (g) cyc_g.push_back(gsum);
        occ.assign(m, 0.0);
        gsum = 0.0;
        prev = static_cast<long>(n);
      }
    }
  }
  CycleEstimates est;
  est.n_cycles = static_cast<long>(cyc_s.size());
  mean_se(cyc_s, est.mean_s, est.se_s);
  mean_se(cyc_len, est.mean_len, est.se_len);
  est.occupation.assign(m, 0.0);
  est.occupation_se.assign(m, 0.0);
  for (int j = 0; j < m; ++j) mean_se(cyc_occ[j], est.occupation[j], est.occupation_se[j]);
  if (g) mean_se(cyc_g, est.functional_mean, est.functional_se);
  return est;
}

EmpiricalMeasure empirical_renewal(const std::vector<PathRecord>& paths, int m,
                                   const Grid& window) {
  EmpiricalMeasure em;
  em.grid = window;
  em.m = m;
  em.n_paths = static_cast<long>(paths.size());
  em.base_state = paths.empty() ? 0 : paths.front().states.front();
  const auto ncells = static_cast<std::size_t>(window.ncells());
  em.mean.assign(m, Vec(ncells, 0.0));
  em.se.assign(m, Vec(ncells, 0.0));
  std::vector<std::vector<Vec>> counts(paths.size());
  for (std::size_t r = 0; r < paths.size(); ++r) {
    counts[r].assign(m, Vec(ncells, 0.0));
    const PathRecord& path = paths[r];
    for (std::size_t n = 0; n < path.states.size(); ++n) {
      const double s = path.partial_sums[n];
      // cell c covers (c*step, (c+1)*step]
      const auto c = static_cast<std::int64_t>(std::ceil(s / window.step - 1e-9)) - 1;
      if (c < window.lo || c >= window.hi) continue;
      counts[r][path.states[n]][static_cast<std::size_t>(c - window.lo)] += 1.0;
    }
  }
  const auto r_n = static_cast<double>(paths.size());
  for (int j = 0; j < m; ++j)
    for (std::size_t c = 0; c < ncells; ++c) {
      double mean = 0.0;
      for (std::size_t r = 0; r < paths.size(); ++r) mean += counts[r][j][c];
      mean /= r_n;
      double ss = 0.0;
      for (std::size_t r = 0; r < paths.size(); ++r)
        ss += (counts[r][j][c] - mean) * (counts[r][j][c] - mean);
      em.mean[j][c] = mean;
      em.se[j][c] = paths.size() > 1 ? std::sqrt(ss / (r_n - 1.0) / r_n) : 0.0;
    }
  return em;
}

LadderData ladder_epochs(const PathRecord& path) {
  LadderData ld;
  double record = 0.0;
  for (std::size_t n = 1; n < path.partial_sums.size(); ++n) {
    if (path.partial_sums[n] > record) {
      record = path.partial_sums[n];
      ld.epochs.push_back(static_cast<long>(n));
      ld.heights.push_back(record);
      ld.states.push_back(path.states[n]);
    }
  }
  return ld;
}

TiltedKernel tilted_kernel(const Matrix& p, const std::vector<DistSpecPtr>& g, double lambda) {
  const int m = p.rows();
  if (g.size() != static_cast<std::size_t>(m) * m) throw Error("tilted_kernel: shape mismatch");
  TiltedKernel tk;
  tk.lambda = lambda;
  tk.q_lambda = Matrix(m, m);
  tk.f_tilted.resize(g.size());
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      const std::size_t e = static_cast<std::size_t>(i) * m + j;
      if (p(i, j) == 0.0) {
        tk.f_tilted[e] = g[e] ? g[e] : make_point(0.0);
        continue;
      }
      if (!g[e]) throw Error("tilted_kernel: missing increment law on a positive entry");
      tk.q_lambda(i, j) = p(i, j) * spec_mgf(*g[e], lambda);
      tk.f_tilted[e] = spec_tilt(*g[e], lambda);
    }
  tk.pd = perron_pair(QSMatrix(tk.q_lambda));
  tk.p_tilted = Matrix(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      tk.p_tilted(i, j) = tk.q_lambda(i, j) * tk.pd.v[j] / (tk.pd.rho * tk.pd.v[i]);
  return tk;
}

void write_path_csv(const PathRecord& path, const std::vector<std::string>& labels,
                    std::ostream& os) {
  os << "n,state,increment,partial_sum\n";
  for (std::size_t n = 0; n < path.states.size(); ++n) {
    const int st = path.states[n];
    os << n << ',' << (labels.empty() ? std::to_string(st) : labels[st]) << ','
       << (n == 0 ? "" : csv_num(path.increments[n - 1])) << ','
       << csv_num(path.partial_sums[n]) << '\n';
  }
}

}  // namespace mrt
