#include "mrt/perron.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "mrt/errors.hpp"

namespace mrt {

QSMatrix::QSMatrix(Matrix entries) : entries_(std::move(entries)) {
  if (entries_.rows() < 1 || entries_.rows() != entries_.cols())
    throw Error("QSMatrix: needs a square matrix with at least one state");
  for (int i = 0; i < entries_.rows(); ++i)
    for (int j = 0; j < entries_.cols(); ++j) {
      const double q = entries_(i, j);
      if (!(q >= 0.0) || !std::isfinite(q))
        throw Error("QSMatrix: entries must be finite and nonnegative");
    }
}

bool strongly_connected(const QSMatrix& q) {
  const int m = q.size();
  auto reach = [&](bool forward) {
    std::vector<char> seen(m, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      const int i = stack.back();
      stack.pop_back();
      for (int j = 0; j < m; ++j) {
        const double w = forward ? q(i, j) : q(j, i);
        if (w > 0.0 && !seen[j]) {
          seen[j] = 1;
          stack.push_back(j);
        }
      }
    }
    return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
  };
  return reach(true) && reach(false);
}

int digraph_period(const QSMatrix& q) {
  const int m = q.size();
  std::vector<long> level(m, -1);
  std::vector<int> order;
  order.reserve(m);
  level[0] = 0;
  order.push_back(0);
  long g = 0;
  for (std::size_t head = 0; head < order.size(); ++head) {
    const int i = order[head];
    for (int j = 0; j < m; ++j) {
      if (q(i, j) <= 0.0) continue;
      if (level[j] < 0) {
        level[j] = level[i] + 1;
        order.push_back(j);
      } else {
        g = std::gcd(g, std::abs(level[i] + 1 - level[j]));
      }
    }
  }
  return g == 0 ? 1 : static_cast<int>(g);
}

namespace {

// One outer round: apply Q over a full period, average the normalized
// iterates (a one-period Cesaro mean kills the peripheral spectrum), and
// bracket rho with the Collatz-Wielandt ratios.
struct PowerResult {
  double rho;
  Vec x;
  int iters;
};

PowerResult power_iterate(const Matrix& q, int period, double tol, int max_iter) {
  const int m = q.rows();
  Vec x(m, 1.0 / m);
  double rho = 1.0;
  for (int it = 0; it < max_iter; ++it) {
    Vec acc(m, 0.0);
    Vec y = x;
    for (int l = 0; l < period; ++l) {
      y = q.apply(y);
      double nrm = 0.0;
      for (double v : y) nrm += v;
      if (!(nrm > 0.0)) throw NonConvergence("power iteration collapsed to zero");
      for (double& v : y) v /= nrm;
      for (int i = 0; i < m; ++i) acc[i] += y[i];
    }
    double nrm = 0.0;
    for (double v : acc) nrm += v;
    for (int i = 0; i < m; ++i) x[i] = acc[i] / nrm;
    const Vec qx = q.apply(x);
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (int i = 0; i < m; ++i) {
      if (x[i] <= 0.0) {
        lo = 0.0;
        hi = std::numeric_limits<double>::infinity();
        break;
      }
      const double r = qx[i] / x[i];
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    rho = 0.5 * (lo + hi);
    if (std::isfinite(hi) && hi - lo <= tol * std::max(1.0, hi)) return {rho, x, it + 1};
  }
  throw NonConvergence("power iteration exhausted its budget");
}

}  // namespace

double spectral_radius(const QSMatrix& q, double tol, int max_iter) {
  if (!strongly_connected(q)) throw NotIrreducible("spectral_radius: matrix is reducible");
  if (q.size() == 1) return q(0, 0);
  const int p = digraph_period(q);
  return power_iterate(q.entries(), p, tol, max_iter).rho;
}

PerronData perron_pair(const QSMatrix& q, double tol, int max_iter) {
  if (!strongly_connected(q)) throw NotIrreducible("perron_pair: matrix is reducible");
  const int m = q.size();
  const double itol = std::min(tol, 1e-12);
  PerronData pd;
  pd.tol_used = tol;
  if (m == 1) {
    pd.rho = q(0, 0);
    pd.u = {1.0};
    pd.v = {1.0};
    pd.pi = {1.0};
    return pd;
  }
  const int p = digraph_period(q);
  PowerResult right = power_iterate(q.entries(), p, itol, max_iter);
  PowerResult left = power_iterate(q.entries().transpose(), p, itol, max_iter);
  pd.rho = 0.5 * (right.rho + left.rho);
  pd.u = left.x;  // already sums to one
  pd.v = right.x;
  const double uv = dot(pd.u, pd.v);
  if (!(uv > 0.0)) throw NonConvergence("perron_pair: degenerate eigenvectors");
  for (double& v : pd.v) v /= uv;
  pd.pi.resize(m);
  for (int i = 0; i < m; ++i) pd.pi[i] = pd.u[i] * pd.v[i];
  return pd;
}

HarmonicTransform harmonic_transform(const QSMatrix& q, const PerronData& pd, double tol) {
  if (std::abs(pd.rho - 1.0) > tol)
    throw NotQuasiStochastic("harmonic_transform: spectral radius differs from 1 by " +
                             std::to_string(pd.rho - 1.0));
  const int m = q.size();
  HarmonicTransform ht;
  ht.d = pd.v;
  ht.p = Matrix(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) ht.p(i, j) = q(i, j) * pd.v[j] / pd.v[i];
  return ht;
}

Vec stationary_measure(const PerronData& pd) {
  Vec pi(pd.u.size());
  for (std::size_t i = 0; i < pi.size(); ++i) pi[i] = pd.u[i] * pd.v[i];
  return pi;
}

}  // namespace mrt
