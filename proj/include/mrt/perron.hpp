#ifndef MRT_PERRON_HPP
#define MRT_PERRON_HPP

#include "mrt/matrix.hpp"

namespace mrt {

// Nonnegative square matrix with finite entries.
class QSMatrix {
 public:
  explicit QSMatrix(Matrix entries);

  int size() const { return entries_.rows(); }
  double operator()(int i, int j) const { return entries_(i, j); }
  const Matrix& entries() const { return entries_; }

 private:
  Matrix entries_;
};

struct PerronData {
  double rho = 0.0;
  Vec u;   // left eigenvector, sum(u) = 1
  Vec v;   // right eigenvector, sum(u_i v_i) = 1
  Vec pi;  // pi_i = u_i * v_i
  double tol_used = 0.0;
};

struct HarmonicTransform {
  Matrix p;  // stochastic matrix D^{-1} Q D
  Vec d;     // diagonal of D, equal to v
};

// True iff the digraph with an edge i->j whenever q_ij > 0 is strongly
// connected.
bool strongly_connected(const QSMatrix& q);

// Period of the (strongly connected) digraph of positive entries.
int digraph_period(const QSMatrix& q);

// Spectral radius via power iteration; iterates are averaged over one full
// digraph period so periodic matrices converge geometrically too.
double spectral_radius(const QSMatrix& q, double tol = 1e-12, int max_iter = 100000);

// Perron eigenpair (rho, u, v) with the normalization sum(u)=1, u.v=1.
PerronData perron_pair(const QSMatrix& q, double tol = 1e-12, int max_iter = 100000);

// P = D^{-1} Q D with D = diag(v); requires |rho - 1| <= tol.
HarmonicTransform harmonic_transform(const QSMatrix& q, const PerronData& pd, double tol = 1e-10);

// pi_i = u_i v_i, a probability vector.
Vec stationary_measure(const PerronData& pd);

}  // namespace mrt

#endif  // MRT_PERRON_HPP
