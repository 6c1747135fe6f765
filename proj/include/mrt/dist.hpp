#ifndef MRT_DIST_HPP
#define MRT_DIST_HPP

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "mrt/distspec.hpp"
#include "mrt/grid.hpp"

namespace mrt {

struct Atom {
  double x = 0.0;
  double w = 0.0;
};

// Sub-probability distribution (or, more generally, finite measure) on the
// line: exact atoms plus a gridded density stored as cell masses.  Cell k of
// a block with origin o covers ((o+k)*step, (o+k+1)*step] and its mass is
// modeled as uniform within the cell.  Mass pushed outside a working window
// is kept in the two overflow buckets so totals stay exact.
struct Dist {
  double step = 1e-2;
  std::int64_t origin = 0;
  std::vector<double> cells;
  std::vector<Atom> atoms;  // sorted by location, strictly increasing
  double overflow_left = 0.0;
  double overflow_right = 0.0;
  std::optional<DistSpecPtr> family;

  bool empty() const {
    return cells.empty() && atoms.empty() && overflow_left == 0 && overflow_right == 0;
  }
};

Dist delta_dist(double location, double step, double mass = 1.0);

double total_mass(const Dist& d);
double in_window_mass(const Dist& d);

// Mass of the interval between a and b; endpoint inclusion only matters for
// atoms since cell mass is treated as absolutely continuous.
double interval_mass(const Dist& d, double a, double b, bool include_a, bool include_b);

// Mass of (-inf, x], counting the left overflow bucket.
double mass_at_most(const Dist& d, double x);

// Smallest [a, b] carrying all but `tol` of the in-window mass.
std::pair<double, double> effective_support(const Dist& d, double tol);

void scale_dist(Dist& d, double c);
Dist scaled(const Dist& d, double c);
void add_dist(Dist& into, const Dist& d, double w = 1.0);

// Restrict to the window of `g`, moving outside mass to the overflow buckets.
void clip_dist(Dist& d, const Grid& g);

// Convolution of independent laws.  Atom*atom products stay exact; cell
// blocks convolve with a second-order accurate half-cell split; atom*cell
// products shift the block with a mass- and mean-preserving two-cell splat.
// Total mass is multiplicative; overflow propagates conservatively.
Dist dist_convolve(const Dist& f, const Dist& g);

// Exact-cell discretization of an analytic law on the given window: cell
// masses are CDF increments and a final sub-cell shift matches the first
// moment of the windowed law exactly.
Dist discretize(const DistSpec& spec, const Grid& window, double trim_tol = 1e-16);

struct MomentResult {
  double value = 0.0;
  bool tail_warning = false;  // set when grid sums miss overflow mass
};

MomentResult dist_mean(const Dist& d);
// E exp(lambda X); analytic when a family tag is present, otherwise a grid
// sum over atoms and cell centers.
MomentResult exponential_moment(const Dist& d, double lambda);

// Draw from the distribution: analytic family sampler when tagged, otherwise
// inverse-CDF over atoms and cells (uniform within a cell).
double sample_dist(const Dist& d, Rng& rng);

}  // namespace mrt

#endif  // MRT_DIST_HPP
