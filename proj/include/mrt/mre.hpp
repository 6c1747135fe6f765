#ifndef MRT_MRE_HPP
#define MRT_MRE_HPP

#include <vector>

#include "mrt/gridfunction.hpp"
#include "mrt/renewal.hpp"

namespace mrt {

// Direct-Riemann-integrability diagnostic: weighted mesh sup-sums over the
// window plus tail extrapolation from the decay tags, and the relaxed
// conditions available for spread-out kernels.
struct DriReport {
  bool dri = false;
  double sup_sum = 0.0;       // sum_i lambda_i sum_cells sup |g_i|
  bool spread_out_ok = false;
  double sup_norm_sum = 0.0;  // sum_i lambda_i ||g_i||_inf
  double l1 = 0.0;            // sum_i lambda_i ||g_i||_1
  bool window_only = false;   // tails untagged; certified on the window only
};

DriReport dri_check(const GridFunction& g, const Vec& lambda, double eps);

struct MreSolution {
  GridFunction z_star;
  // sup of |Z_i / v_i| over the leftmost samples; small values witness the
  // vanishing left tail of the solution class.
  double left_edge_hat_sup = 0.0;
};

// Z* = V conv z on the window of V.
MreSolution solve_mre(const SemiMarkovKernel& k, const PerronData& pd, const GridMeasure& v,
                      const GridFunction& z);

struct ResidualReport {
  Vec per_state;
  double global = 0.0;
  double interior_left = 0.0;
  double interior_right = 0.0;
};

// sup | Z - z - (Q x F) * Z | over the interior window (shrunk by the
// effective kernel support so no missing samples enter the convolution).
ResidualReport residual(const GridFunction& z_fun, const GridFunction& inhom,
                        const SemiMarkovKernel& k);

struct HomogeneousProbe {
  double c_fit = 0.0;              // least-squares constant against v
  std::vector<double> sup_trace;   // sup |delta_k| per kernel iterate
  int valid_iters = 0;             // iterations before the window ran out
};

// Fits Z ~ c v, then iterates the stochastic-form kernel on the residual;
// for genuine solutions of the homogeneous equation the trace is zero from
// the start, for bounded perturbations it decays.
HomogeneousProbe homogeneous_probe(const GridFunction& z_fun, const SemiMarkovKernel& k,
                                   const PerronData& pd, int n_iter);

// Per-state limit (v_i / mu) sum_j u_j integral z_j(x) dx.
Vec asymptotic_limit(const GridFunction& z, const PerronData& pd, const KernelStats& stats);

}  // namespace mrt

#endif  // MRT_MRE_HPP
