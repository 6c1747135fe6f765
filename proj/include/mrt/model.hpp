#ifndef MRT_MODEL_HPP
#define MRT_MODEL_HPP

#include <optional>
#include <string>
#include <vector>

#include "mrt/apps.hpp"
#include "mrt/gridfunction.hpp"
#include "mrt/kernel.hpp"

namespace mrt {

// Scalar function of t built from a small spec language:
//   exptail(r)     e^{-r t} for t >= 0
//   box(a, b)      indicator of [a, b]
//   scale(c, f)    c * f(t)
struct FunctionSpec {
  std::string text;
  std::function<double(double)> f;
  TailTag left, right;
};

FunctionSpec parse_function_spec(const std::string& text);

struct SimulateConfig {
  long paths = 200;
  long steps = 4000;
  int start_state = 0;
  double agg_step = 0.25;  // cell width of the empirical occupation measure
};

struct LindleyConfig {
  Matrix p;
  std::vector<DistSpecPtr> g;
  double bracket_lo = 1e-6, bracket_hi = 64.0;
  Vec t_grid;
  long paths = 100000;
};

struct PerpetuityConfig {
  PerpetuityModel model;
  long samples = 1000000;
};

struct ModelSpec {
  std::vector<std::string> states;
  bool has_kernel = false;
  bool given_stochastic = false;  // config supplied P rather than Q
  Matrix q;
  std::vector<DistSpecPtr> dists;  // m*m, null where the weight vanishes
  double window_a = -10.0, window_b = 60.0, step = 1e-2;
  double tol = 1e-10;
  double eps_trunc = 1e-8;
  double snap_tol = -1.0;
  std::uint64_t seed = 1;
  SimulateConfig simulate;
  std::vector<FunctionSpec> z_specs;  // per state, for the solve command
  std::optional<LindleyConfig> lindley;
  std::optional<BranchingModel> branching;
  std::optional<PerpetuityConfig> perpetuity;
};

// Parses and validates a JSON model file; error messages carry the config
// path of the offending entry.
ModelSpec load_model(const std::string& path);
ModelSpec parse_model(const std::string& json_text, const std::string& origin);

Grid model_grid(const ModelSpec& spec);

// Discretizes the distribution specs on the model window.
SemiMarkovKernel build_kernel(const ModelSpec& spec);

}  // namespace mrt

#endif  // MRT_MODEL_HPP
