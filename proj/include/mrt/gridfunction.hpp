#ifndef MRT_GRIDFUNCTION_HPP
#define MRT_GRIDFUNCTION_HPP

#include <functional>
#include <vector>

#include "mrt/dist.hpp"
#include "mrt/grid.hpp"
#include "mrt/kernel.hpp"
#include "mrt/matrix.hpp"

namespace mrt {

// Decay hints for the unseen part of a function outside its window; used by
// integrability diagnostics and tail integrals.
struct TailTag {
  enum class Kind { Zero, ExpDecay, PowerDecay, Unknown };
  Kind kind = Kind::Zero;
  double param = 0.0;  // rate for ExpDecay, exponent for PowerDecay
};

// Vector of real functions on the states, sampled at the lattice points of a
// window (grid.lo .. grid.hi inclusive).
struct GridFunction {
  Grid grid;
  int m = 1;
  std::vector<Vec> values;  // [state][lattice point]
  TailTag left_tail, right_tail;
};

GridFunction make_grid_function(const Grid& grid, int m,
                                const std::function<double(int, double)>& f);

// Linear interpolation between lattice samples; zero outside the window.
double eval(const GridFunction& f, int state, double t);

// (mu conv z)(t) = integral z(t - x) mu(dx) evaluated at the lattice points
// out_lo..out_hi (absolute indices).  Cell masses act through their
// cell-uniform average, atoms through exact shifts.
Vec convolve_measure_function(const Dist& mu, const Vec& z, std::int64_t z_lo,
                              std::int64_t out_lo, std::int64_t out_hi, double step);

// ((Q x F) * f)_i = sum_j q_ij integral f_j(t - x) F_ij(dx), sampled on the
// same window as f.
GridFunction kernel_apply(const SemiMarkovKernel& k, const GridFunction& f);

}  // namespace mrt

#endif  // MRT_GRIDFUNCTION_HPP
