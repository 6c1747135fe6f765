#ifndef MRT_SIMULATE_HPP
#define MRT_SIMULATE_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "mrt/dist.hpp"
#include "mrt/grid.hpp"
#include "mrt/matrix.hpp"
#include "mrt/perron.hpp"

namespace mrt {

// One simulated trajectory of the Markov random walk (M_n, S_n).
struct PathRecord {
  std::uint64_t seed = 0;
  std::vector<int> states;        // M_0 .. M_n
  std::vector<double> increments; // X_1 .. X_n
  std::vector<double> partial_sums;  // S_0 = 0, S_1, .. S_n
};

// Distribution carrying only an analytic family tag; samples analytically.
Dist analytic_dist(DistSpecPtr spec, double step);

// Path under the transition law p_ij F_ij; deterministic given the seed.
PathRecord sample_path(const Matrix& p, const std::vector<Dist>& f, int i0, int n_steps,
                       std::uint64_t seed);

struct CyclePoint {
  long epoch = 0;
  double s = 0.0;
};

// Successive return epochs of the driving chain to state i along with the
// embedded random walk values; the path must start in i.
std::vector<CyclePoint> return_cycles(const PathRecord& path, int i);

struct CycleEstimates {
  long n_cycles = 0;
  double mean_s = 0.0, se_s = 0.0;      // cycle sums of the additive part
  double mean_len = 0.0, se_len = 0.0;  // cycle lengths
  Vec occupation, occupation_se;        // visits per cycle, by state
  double functional_mean = 0.0, functional_se = 0.0;
};

// Regeneration-cycle estimators over a batch of paths started in i.  The
// optional functional g(M_n, X_n) is summed over each cycle.
CycleEstimates cycle_estimators(const std::vector<PathRecord>& paths, int i, int m,
                                const std::function<double(int, double)>& g = {});

// Cellwise occupation estimates of (M_n, S_n) with per-cell standard errors
// across paths.
struct EmpiricalMeasure {
  Grid grid;
  int m = 0;
  int base_state = 0;
  long n_paths = 0;
  std::vector<Vec> mean;  // [state][cell]
  std::vector<Vec> se;
};

EmpiricalMeasure empirical_renewal(const std::vector<PathRecord>& paths, int m,
                                   const Grid& window);

// Strictly ascending ladder data: record-setting epochs of S above 0.
struct LadderData {
  std::vector<long> epochs;
  std::vector<double> heights;
  std::vector<int> states;
};

LadderData ladder_epochs(const PathRecord& path);

// Exponentially tilted kernel Q_lambda = (p_ij phi_ij(lambda)) with its
// Perron data, the tilted transition matrix and the tilted increment laws.
struct TiltedKernel {
  double lambda = 0.0;
  Matrix q_lambda;
  PerronData pd;
  Matrix p_tilted;                     // D^{-1} Q_lambda D / rho
  std::vector<DistSpecPtr> f_tilted;   // m*m tilted laws
};

TiltedKernel tilted_kernel(const Matrix& p, const std::vector<DistSpecPtr>& g, double lambda);

// CSV dump: one row per step (n, M_n, X_n, S_n).
void write_path_csv(const PathRecord& path, const std::vector<std::string>& labels,
                    std::ostream& os);

}  // namespace mrt

#endif  // MRT_SIMULATE_HPP
