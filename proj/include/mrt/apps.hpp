#ifndef MRT_APPS_HPP
#define MRT_APPS_HPP

#include <cstdint>
#include <vector>

#include "mrt/gridfunction.hpp"
#include "mrt/matrix.hpp"
#include "mrt/mre.hpp"
#include "mrt/simulate.hpp"

namespace mrt {

// --- supremum of a random walk with negative drift ------------------------

// Smallest lambda > 0 with unit spectral radius of (p_ij phi_ij(lambda)).
// The trivial root at 0 is excluded; requires negative stationary drift.
double find_tilt_root(const Matrix& p, const std::vector<DistSpecPtr>& g, double bracket_lo,
                      double bracket_hi, double rho_tol = 1e-10);

struct TiltModel {
  Matrix p;
  std::vector<DistSpecPtr> g;  // m*m increment laws
  double lambda = 0.0;
  TiltedKernel tilted;  // Perron data and tilted laws at lambda
};

TiltModel make_tilt_model(Matrix p, std::vector<DistSpecPtr> g, double bracket_lo,
                          double bracket_hi);

struct LindleyReport {
  double lambda = 0.0;
  long n_paths = 0;
  Vec t_grid;
  std::vector<Vec> tail;         // per start state: P_i(W > t)
  std::vector<Vec> tail_se;
  std::vector<Vec> compensated;  // e^{lambda t} P_i(W > t)
  Vec slope;                     // per start state log-tail slope
  Vec prefactor;                 // per start state fitted prefactor
  Matrix ladder_q;               // estimated tilted ladder kernel
  Matrix ladder_q_se;
  Vec row_identity;              // sum_j ladder_q_ij v_j / v_i, should be 1
  Vec row_identity_se;
  Matrix ladder_chain;           // estimated ladder-state transition matrix
  std::vector<int> ladder_class; // recurrent states of the ladder chain
};

// Simulates W = sup_n S_n under the original (negative drift) law; a path's
// supremum is final once S drops 30/lambda below the running maximum.
LindleyReport lindley_tail(const TiltModel& model, const Vec& t_grid, long n_paths,
                           std::uint64_t seed);

// --- age-dependent multitype branching -------------------------------------

struct BranchingModel {
  Matrix mean_offspring;
  std::vector<DistSpecPtr> lifetime;  // one law per type, on (0, inf)
  double bracket_lo = 0.0;
  double bracket_hi = 64.0;
  int target_type = 0;
  Grid window = Grid::from_window(-10.0, 60.0, 1e-2);
  double eps_trunc = 1e-8;
  bool total_age = false;  // solve the total-age functional instead of counts
};

struct MalthusianReport {
  double alpha = 0.0;
  bool primitive = true;
  double rho_check = 0.0;  // Perron root of the transformed weights
  PerronData pd;
  KernelStats stats;
  Vec limit;            // per start type
  Vec right_edge;       // measured right edge of the compensated counts
  GridFunction z;       // compensated mean counts of the target type
};

MalthusianReport malthusian(const BranchingModel& model);

// --- perpetuities -----------------------------------------------------------

struct PerpetuityModel {
  Vec values;   // states of the multiplier chain, all positive
  Matrix p;     // forward transition matrix
  DistSpecPtr b_law;
  double bracket_lo = 1e-6;
  double bracket_hi = 64.0;
};

struct PerpetuityReport {
  double alpha = 0.0;
  Matrix backward;  // time-reversed transition matrix
  double rho_check = 0.0;
  bool moment_ok = false;  // E log A < 0 and E log+ |B| < infinity
  long n_samples = 0;
  double slope_abs = 0.0;  // log-log tail slope of |Y|
  double slope_pos = 0.0;  // of +Y (NaN when the tail is empty)
  double slope_neg = 0.0;  // of -Y
  double ks_stat = 0.0;    // forward vs backward sampler
  double ks_p = 0.0;
  Vec t_grid;                      // log scale: tail functions sampled at e^t
  std::vector<Vec> z_plus, z_minus;  // smoothed tail functions per state
};

// Samples the stationary law by the backward series (truncated once the
// running product drops below 1e-12), cross-checks against long forward
// iteration, and fits the power tail exponent.
PerpetuityReport perpetuity(const PerpetuityModel& model, long n_samples, std::uint64_t seed);

}  // namespace mrt

#endif  // MRT_APPS_HPP
