#ifndef MRT_RENEWAL_HPP
#define MRT_RENEWAL_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "mrt/grid.hpp"
#include "mrt/kernel.hpp"

namespace mrt {

struct TruncationReport {
  int n_terms = 0;
  double residual_bound = 0.0;
  bool margin_warning = false;  // mass left the expanded window on the left
  std::vector<double> term_mass;  // per-term mass at or left of the window's right edge
};

// Windowed matrix measure: one measure per (i, j) pair, cells plus atoms.
struct GridMeasure {
  Grid grid;
  int m = 0;
  std::vector<Dist> entries;  // m*m row-major
  TruncationReport trunc;

  const Dist& entry(int i, int j) const { return entries[static_cast<std::size_t>(i) * m + j]; }
  Dist& entry(int i, int j) { return entries[static_cast<std::size_t>(i) * m + j]; }
};

struct RenewalOptions {
  double eps_trunc = 1e-8;
  int max_terms = 100000;
  int min_terms = 16;
  int consecutive = 3;     // sub-threshold terms required before stopping
  double margin_factor = 0.5;  // window extension per side for two-sided kernels
};

// Sum of convolution powers of the kernel restricted to the window.  The
// series stops once the n-step mass at or left of the right window edge has
// stayed below eps_trunc for several consecutive terms.
GridMeasure renewal_measure(const SemiMarkovKernel& k, const PerronData& pd,
                            const KernelStats& stats, const Grid& window,
                            const RenewalOptions& opt = {});

enum class UVDirection { VtoU, UtoV };

// Entrywise rescale between the weighted measure and its stochastic-form
// counterpart: V_ij = (v_i / v_j) U_ij.
GridMeasure uv_transform(const GridMeasure& in, const PerronData& pd, UVDirection dir);

// Occupation measure of (state, S_n) before the first return to state i,
// computed from the kernel with all transitions into i removed.  Requires the
// stochastic form (row sums one).
struct TabooOccupation {
  Grid grid;
  int m = 0;
  int base_state = 0;
  std::vector<Dist> row;  // entry j is the measure on {j} x R
  TruncationReport trunc;
};

TabooOccupation taboo_occupation(const SemiMarkovKernel& p_kernel, int i, const Grid& window,
                                 const RenewalOptions& opt = {});

// Checks sup_t U_ij([t, t+h]) <= pi_j^{(i)} U_ii([-h, h]) for all pairs.
struct LocalBoundReport {
  struct Entry {
    int i = 0, j = 0;
    double sup_slab = 0.0;
    double t_at_sup = 0.0;
    double bound = 0.0;
    double ratio = 0.0;
  };
  std::vector<Entry> entries;
  double max_ratio = 0.0;
};

LocalBoundReport local_bound_check(const GridMeasure& u, const Vec& pi, double h);

// Slab increments against the limit v_i u_j h / mu (nonarithmetic kernels).
struct BlackwellReport {
  struct Entry {
    int i = 0, j = 0;
    double increment = 0.0;
    double limit = 0.0;
    double abs_error = 0.0;
  };
  std::vector<Entry> right;      // increments at t_eval
  std::vector<Entry> left_edge;  // increments at the left window edge, limit 0
  double t_eval = 0.0;
  double h = 0.0;
};

BlackwellReport blackwell_check(const GridMeasure& v, const PerronData& pd,
                                const KernelStats& stats, double h, double t_eval);

// Arithmetic counterpart: atom masses on the span lattice against
// v_i u_j d / mu, evaluated near t_eval.
BlackwellReport blackwell_check_arithmetic(const GridMeasure& v, const PerronData& pd,
                                           const KernelStats& stats, double t_eval);

// Smoothed density diagnostics for spread-out kernels: cell mass / step with
// atoms kept apart, edge estimates against v_i u_j / mu and 0.
struct StoneDiagnostics {
  Grid grid;
  int m = 0;
  std::vector<Vec> density;  // m*m, per window cell
  std::vector<double> right_edge;  // m*m estimates
  std::vector<double> left_edge;
  std::vector<double> limit;  // v_i u_j / mu
};

StoneDiagnostics stone_density(const GridMeasure& v, const PerronData& pd,
                               const KernelStats& stats);

// CSV export: one row per (i, j, cell_left, cell_right, mass, atom_flag).
void write_measure_csv(const GridMeasure& gm, const std::vector<std::string>& labels,
                       std::ostream& os);

}  // namespace mrt

#endif  // MRT_RENEWAL_HPP
