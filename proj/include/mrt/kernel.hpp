#ifndef MRT_KERNEL_HPP
#define MRT_KERNEL_HPP

#include <vector>

#include "mrt/dist.hpp"
#include "mrt/matrix.hpp"
#include "mrt/perron.hpp"

namespace mrt {

// Matrix of weighted distributions (q_ij, F_ij) acting by matrix convolution.
struct SemiMarkovKernel {
  int m = 0;
  double step = 1e-2;
  Matrix weights;           // irreducible, nonnegative
  std::vector<Dist> dists;  // m*m row-major; proper where the weight is positive

  const Dist& dist(int i, int j) const { return dists[static_cast<std::size_t>(i) * m + j]; }
  Dist& dist(int i, int j) { return dists[static_cast<std::size_t>(i) * m + j]; }
};

// Weights must be irreducible and every positive-weight entry must carry a
// proper (mass one) distribution on a common grid step.
SemiMarkovKernel make_kernel(Matrix weights, std::vector<Dist> dists, double mass_tol = 1e-9);

struct LatticeType {
  bool arithmetic = false;
  double span = 0.0;   // d, arithmetic case
  Vec gamma;           // per-state shifts in [0, span)
  bool spread_out = false;  // nonarithmetic case only
};

struct KernelStats {
  double mu = 0.0;     // stationary drift under the (u, v) normalization
  Matrix mean_matrix;  // entrywise means of the F_ij
  LatticeType lattice;
};

// Matrix convolution (K * B)_ij = sum_k q_ik (F_ik conv B_kj); B is m*m
// row-major.
std::vector<Dist> kernel_convolve(const SemiMarkovKernel& k, const std::vector<Dist>& b);

// n-fold convolution power; n = 0 is the identity (diagonal point mass at 0).
std::vector<Dist> kernel_power(const SemiMarkovKernel& k, int n);

// Lattice classification.  Any density component on a positive-weight entry
// certifies spread-out; purely atomic kernels get the maximal span d as the
// gcd of cycle sums of support points, with shifts read off a spanning tree.
// snap_tol <= 0 selects 1e-9 * max|support|.
LatticeType lattice_type(const SemiMarkovKernel& k, const PerronData& pd, double snap_tol = -1.0);

// Drift mu = sum_ij u_i q_ij v_j mean(F_ij); throws NonPositiveDrift when
// the result is not positive.  Also classifies the lattice type.
KernelStats stationary_drift(const SemiMarkovKernel& k, const PerronData& pd);

}  // namespace mrt

#endif  // MRT_KERNEL_HPP
