#include "mrt/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "mrt/apps.hpp"
#include "mrt/csv.hpp"
#include "mrt/errors.hpp"
#include "mrt/model.hpp"
#include "mrt/mre.hpp"
#include "mrt/renewal.hpp"
#include "mrt/simulate.hpp"

namespace mrt {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct CliOptions {
  std::string config;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::optional<long> paths;
  std::optional<std::string> window;  // "A,B"
  std::optional<double> step;
  std::optional<double> tol;
};

ModelSpec load_with_overrides(const CliOptions& opt) {
  ModelSpec spec = load_model(opt.config);
  if (opt.seed) spec.seed = *opt.seed;
  if (opt.paths) {
    spec.simulate.paths = *opt.paths;
    if (spec.lindley) spec.lindley->paths = *opt.paths;
    if (spec.perpetuity) spec.perpetuity->samples = *opt.paths;
  }
  if (opt.window) {
    const auto comma = opt.window->find(',');
    if (comma == std::string::npos)
      throw ConfigError("--window expects A,B");
    spec.window_a = std::stod(opt.window->substr(0, comma));
    spec.window_b = std::stod(opt.window->substr(comma + 1));
    if (!(spec.window_a < spec.window_b)) throw ConfigError("--window expects A < B");
  }
  if (opt.step) {
    if (!(*opt.step > 0)) throw ConfigError("--step must be positive");
    spec.step = *opt.step;
  }
  if (opt.tol) spec.tol = *opt.tol;
  if (spec.branching) {
    spec.branching->window = model_grid(spec);
    spec.branching->eps_trunc = spec.eps_trunc;
  }
  return spec;
}

std::ofstream open_artifact(const fs::path& dir, const std::string& name) {
  fs::create_directories(dir);
  std::ofstream os(dir / name, std::ios::binary);
  if (!os) throw Error("cannot write artifact " + (dir / name).string());
  return os;
}

void write_summary(const fs::path& dir, const json& summary) {
  auto os = open_artifact(dir, "summary.json");
  os << summary.dump(2) << '\n';
}

json vec_json(const Vec& v) { return json(v); }

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

json lattice_json(const LatticeType& lt) {
  json j;
  j["type"] = lt.arithmetic ? "arithmetic" : "nonarithmetic";
  if (lt.arithmetic) {
    j["span"] = lt.span;
    j["gamma"] = vec_json(lt.gamma);
  } else {
    j["spread_out"] = lt.spread_out;
  }
  return j;
}

struct Analysis {
  SemiMarkovKernel kernel;
  PerronData pd;
  HarmonicTransform ht;
  KernelStats stats;
};

Analysis analyze_model(const ModelSpec& spec) {
  Analysis a{build_kernel(spec), {}, {}, {}};
  a.pd = perron_pair(QSMatrix(a.kernel.weights), std::min(spec.tol, 1e-12));
  a.pd.tol_used = spec.tol;
  a.ht = harmonic_transform(QSMatrix(a.kernel.weights), a.pd, spec.tol);
  a.stats = stationary_drift(a.kernel, a.pd);
  if (spec.snap_tol > 0) a.stats.lattice = lattice_type(a.kernel, a.pd, spec.snap_tol);
  return a;
}

SemiMarkovKernel stochastic_form(const Analysis& a) {
  SemiMarkovKernel p = a.kernel;
  p.weights = a.ht.p;
  return p;
}

int cmd_analyze(const CliOptions& opt) {
  const ModelSpec spec = load_with_overrides(opt);
  const Analysis a = analyze_model(spec);
  json summary;
  summary["rho"] = a.pd.rho;
  summary["u"] = vec_json(a.pd.u);
  summary["v"] = vec_json(a.pd.v);
  summary["pi"] = vec_json(a.pd.pi);
  summary["P"] = matrix_json(a.ht.p);
  summary["mu"] = a.stats.mu;
  summary["mean_matrix"] = matrix_json(a.stats.mean_matrix);
  summary["lattice"] = lattice_json(a.stats.lattice);
  write_summary(opt.out, summary);
  auto os = open_artifact(opt.out, "perron.csv");
  os << "state,u,v,pi\n";
  for (int i = 0; i < a.kernel.m; ++i)
    os << spec.states[i] << ',' << csv_num(a.pd.u[i]) << ',' << csv_num(a.pd.v[i]) << ','
       << csv_num(a.pd.pi[i]) << '\n';
  return 0;
}

int cmd_renewal(const CliOptions& opt) {
  const ModelSpec spec = load_with_overrides(opt);
  const Analysis a = analyze_model(spec);
  const Grid window = model_grid(spec);
  RenewalOptions ropt;
  ropt.eps_trunc = spec.eps_trunc;
  const GridMeasure v = renewal_measure(a.kernel, a.pd, a.stats, window, ropt);
  const GridMeasure u = uv_transform(v, a.pd, UVDirection::VtoU);
  {
    auto os = open_artifact(opt.out, "v_measure.csv");
    write_measure_csv(v, spec.states, os);
  }
  {
    auto os = open_artifact(opt.out, "u_measure.csv");
    write_measure_csv(u, spec.states, os);
  }
  json summary;
  summary["n_terms"] = v.trunc.n_terms;
  summary["residual_bound"] = v.trunc.residual_bound;
  summary["lattice"] = lattice_json(a.stats.lattice);
  const double h = 1.0;
  const double t_eval = window.left() + 0.75 * (window.right() - window.left());
  const BlackwellReport br =
      a.stats.lattice.arithmetic
          ? blackwell_check_arithmetic(v, a.pd, a.stats, t_eval)
          : blackwell_check(v, a.pd, a.stats, h, t_eval);
  {
    auto os = open_artifact(opt.out, "blackwell.csv");
    os << "i,j,edge,increment,limit,abs_error\n";
    for (const auto& e : br.right)
      os << spec.states[e.i] << ',' << spec.states[e.j] << ",right," << csv_num(e.increment)
         << ',' << csv_num(e.limit) << ',' << csv_num(e.abs_error) << '\n';
    for (const auto& e : br.left_edge)
      os << spec.states[e.i] << ',' << spec.states[e.j] << ",left," << csv_num(e.increment)
         << ',' << csv_num(e.limit) << ',' << csv_num(e.abs_error) << '\n';
  }
  double max_err = 0.0;
  for (const auto& e : br.right) max_err = std::max(max_err, e.abs_error);
  summary["blackwell_max_abs_error"] = max_err;
  summary["blackwell_t_eval"] = br.t_eval;
  summary["blackwell_h"] = br.h;
  if (!a.stats.lattice.arithmetic && a.stats.lattice.spread_out) {
    const StoneDiagnostics sd = stone_density(v, a.pd, a.stats);
    auto os = open_artifact(opt.out, "stone.csv");
    os << "i,j,right_edge,left_edge,limit\n";
    json stone = json::array();
    for (int i = 0; i < v.m; ++i)
      for (int j = 0; j < v.m; ++j) {
        const std::size_t e = static_cast<std::size_t>(i) * v.m + j;
        os << spec.states[i] << ',' << spec.states[j] << ',' << csv_num(sd.right_edge[e]) << ','
           << csv_num(sd.left_edge[e]) << ',' << csv_num(sd.limit[e]) << '\n';
        stone.push_back({{"i", i}, {"j", j}, {"right_edge", sd.right_edge[e]},
                         {"limit", sd.limit[e]}});
      }
    summary["stone"] = stone;
  }
  write_summary(opt.out, summary);
  return 0;
}

int cmd_solve(const CliOptions& opt) {
  const ModelSpec spec = load_with_overrides(opt);
  const Analysis a = analyze_model(spec);
  if (spec.z_specs.empty()) throw ConfigError(opt.config + ": solve.z: missing function specs");
  if (static_cast<int>(spec.z_specs.size()) != a.kernel.m)
    throw ConfigError(opt.config + ": solve.z: expected one function per state");
  const Grid window = model_grid(spec);
  GridFunction z = make_grid_function(
      window, a.kernel.m, [&](int i, double t) { return spec.z_specs[i].f(t); });
  z.left_tail = spec.z_specs[0].left;
  z.right_tail = spec.z_specs[0].right;
  const DriReport dri = dri_check(z, a.pd.u, window.step);
  RenewalOptions ropt;
  ropt.eps_trunc = spec.eps_trunc;
  const GridMeasure v = renewal_measure(a.kernel, a.pd, a.stats, window, ropt);
  const MreSolution sol = solve_mre(a.kernel, a.pd, v, z);
  const ResidualReport res = residual(sol.z_star, z, a.kernel);
  const Vec limit = asymptotic_limit(z, a.pd, a.stats);
  {
    auto os = open_artifact(opt.out, "solution.csv");
    os << "state,t,z,z_star\n";
    for (int i = 0; i < a.kernel.m; ++i)
      for (std::int64_t n = 0; n < window.npoints(); ++n)
        os << spec.states[i] << ',' << csv_num(window.point(n)) << ','
           << csv_num(z.values[i][static_cast<std::size_t>(n)]) << ','
           << csv_num(sol.z_star.values[i][static_cast<std::size_t>(n)]) << '\n';
  }
  json summary;
  summary["dri"] = dri.dri;
  summary["dri_sup_sum"] = dri.sup_sum;
  summary["spread_out_ok"] = dri.spread_out_ok;
  summary["residual"] = res.global;
  summary["residual_per_state"] = vec_json(res.per_state);
  summary["limit"] = vec_json(limit);
  summary["left_edge_hat_sup"] = sol.left_edge_hat_sup;
  write_summary(opt.out, summary);
  return 0;
}

int cmd_simulate(const CliOptions& opt) {
  const ModelSpec spec = load_with_overrides(opt);
  const Analysis a = analyze_model(spec);
  const SemiMarkovKernel pker = stochastic_form(a);
  const int i0 = spec.simulate.start_state;
  if (i0 < 0 || i0 >= a.kernel.m) throw ConfigError("simulate.start: state out of range");
  std::vector<PathRecord> paths;
  paths.reserve(spec.simulate.paths);
  for (long r = 0; r < spec.simulate.paths; ++r)
    paths.push_back(sample_path(pker.weights, pker.dists, i0, spec.simulate.steps,
                                splitmix64(spec.seed) ^ splitmix64(r + 1)));
  {
    auto os = open_artifact(opt.out, "paths.csv");
    os << "path,n,state,increment,partial_sum\n";
    for (long r = 0; r < std::min<long>(3, spec.simulate.paths); ++r) {
      const PathRecord& path = paths[r];
      for (std::size_t n = 0; n < path.states.size(); ++n)
        os << r << ',' << n << ',' << spec.states[path.states[n]] << ','
           << (n == 0 ? "" : csv_num(path.increments[n - 1])) << ','
           << csv_num(path.partial_sums[n]) << '\n';
    }
  }
  const CycleEstimates est = cycle_estimators(paths, i0, a.kernel.m);
  {
    auto os = open_artifact(opt.out, "cycles.csv");
    os << "quantity,state,estimate,se\n";
    os << "cycle_sum,," << csv_num(est.mean_s) << ',' << csv_num(est.se_s) << '\n';
    os << "cycle_length,," << csv_num(est.mean_len) << ',' << csv_num(est.se_len) << '\n';
    for (int j = 0; j < a.kernel.m; ++j)
      os << "occupation," << spec.states[j] << ',' << csv_num(est.occupation[j]) << ','
         << csv_num(est.occupation_se[j]) << '\n';
  }
  const Grid agg = Grid::from_window(spec.window_a, spec.window_b,
                                     std::max(spec.simulate.agg_step, spec.step));
  const EmpiricalMeasure em = empirical_renewal(paths, a.kernel.m, agg);
  {
    auto os = open_artifact(opt.out, "empirical.csv");
    os << "state,cell_left,cell_right,mean,se\n";
    for (int jst = 0; jst < em.m; ++jst)
      for (std::int64_t c = 0; c < agg.ncells(); ++c)
        os << spec.states[jst] << ',' << csv_num(agg.cell_left(c)) << ','
           << csv_num(agg.cell_left(c) + agg.step) << ','
           << csv_num(em.mean[jst][static_cast<std::size_t>(c)]) << ','
           << csv_num(em.se[jst][static_cast<std::size_t>(c)]) << '\n';
  }
  // strong-law diagnostic across paths
  Vec ends;
  for (const auto& path : paths)
    ends.push_back(path.partial_sums.back() / static_cast<double>(spec.simulate.steps));
  double mean_rate = 0.0;
  for (double e : ends) mean_rate += e;
  mean_rate /= static_cast<double>(ends.size());
  json summary;
  summary["paths"] = spec.simulate.paths;
  summary["steps"] = spec.simulate.steps;
  summary["cycles"] = est.n_cycles;
  summary["cycle_sum_mean"] = est.mean_s;
  summary["cycle_sum_se"] = est.se_s;
  summary["occupation"] = vec_json(est.occupation);
  summary["mean_rate"] = mean_rate;
  summary["mu"] = a.stats.mu;
  write_summary(opt.out, summary);
  return 0;
}

int cmd_app_lindley(const CliOptions& opt) {
  const ModelSpec spec = load_with_overrides(opt);
  if (!spec.lindley) throw ConfigError(opt.config + ": lindley: section missing");
  const LindleyConfig& lc = *spec.lindley;
  const TiltModel model = make_tilt_model(lc.p, lc.g, lc.bracket_lo, lc.bracket_hi);
  const LindleyReport rep = lindley_tail(model, lc.t_grid, lc.paths, spec.seed);
  const int m = lc.p.rows();
  {
    auto os = open_artifact(opt.out, "tail.csv");
    os << "state,t,tail,se,compensated\n";
    for (int i = 0; i < m; ++i)
      for (std::size_t k = 0; k < rep.t_grid.size(); ++k)
        os << i << ',' << csv_num(rep.t_grid[k]) << ',' << csv_num(rep.tail[i][k]) << ','
           << csv_num(rep.tail_se[i][k]) << ',' << csv_num(rep.compensated[i][k]) << '\n';
  }
  {
    auto os = open_artifact(opt.out, "ladder.csv");
    os << "i,j,q_ladder,se\n";
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        os << i << ',' << j << ',' << csv_num(rep.ladder_q(i, j)) << ','
           << csv_num(rep.ladder_q_se(i, j)) << '\n';
  }
  json summary;
  summary["lambda"] = rep.lambda;
  summary["slope"] = vec_json(rep.slope);
  summary["prefactor"] = vec_json(rep.prefactor);
  summary["row_identity"] = vec_json(rep.row_identity);
  summary["row_identity_se"] = vec_json(rep.row_identity_se);
  summary["ladder_class"] = rep.ladder_class;
  write_summary(opt.out, summary);
  return 0;
}

int cmd_app_branching(const CliOptions& opt) {
  const ModelSpec spec = load_with_overrides(opt);
  if (!spec.branching) throw ConfigError(opt.config + ": branching: section missing");
  const MalthusianReport rep = malthusian(*spec.branching);
  {
    auto os = open_artifact(opt.out, "compensated.csv");
    os << "type,t,z\n";
    for (int i = 0; i < rep.z.m; ++i)
      for (std::int64_t n = 0; n < rep.z.grid.npoints(); ++n)
        os << i << ',' << csv_num(rep.z.grid.point(n)) << ','
           << csv_num(rep.z.values[i][static_cast<std::size_t>(n)]) << '\n';
  }
  json summary;
  summary["alpha"] = rep.alpha;
  summary["primitive"] = rep.primitive;
  summary["rho_check"] = rep.rho_check;
  summary["limit"] = vec_json(rep.limit);
  summary["right_edge"] = vec_json(rep.right_edge);
  write_summary(opt.out, summary);
  return 0;
}

int cmd_app_perpetuity(const CliOptions& opt) {
  const ModelSpec spec = load_with_overrides(opt);
  if (!spec.perpetuity) throw ConfigError(opt.config + ": perpetuity: section missing");
  const PerpetuityReport rep =
      perpetuity(spec.perpetuity->model, spec.perpetuity->samples, spec.seed);
  {
    auto os = open_artifact(opt.out, "tails.csv");
    os << "state,log_t,z_plus,z_minus\n";
    for (std::size_t s = 0; s < rep.z_plus.size(); ++s)
      for (std::size_t k = 0; k < rep.t_grid.size(); ++k)
        os << s << ',' << csv_num(rep.t_grid[k]) << ',' << csv_num(rep.z_plus[s][k]) << ','
           << csv_num(rep.z_minus[s][k]) << '\n';
  }
  json summary;
  summary["alpha"] = rep.alpha;
  summary["rho_check"] = rep.rho_check;
  summary["slope_abs"] = rep.slope_abs;
  summary["slope_pos"] = rep.slope_pos;
  summary["slope_neg"] = rep.slope_neg;
  summary["ks_stat"] = rep.ks_stat;
  summary["ks_p"] = rep.ks_p;
  summary["samples"] = rep.n_samples;
  write_summary(opt.out, summary);
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Markov renewal toolkit"};
  app.require_subcommand(1);

  CliOptions opt;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "model config (JSON)")->required();
    sub->add_option("--out", opt.out, "output directory");
    sub->add_option("--seed", opt.seed, "master seed override");
    sub->add_option("--paths", opt.paths, "path/sample count override");
    sub->add_option("--window", opt.window, "window override A,B");
    sub->add_option("--step", opt.step, "grid step override");
    sub->add_option("--tol", opt.tol, "quasi-stochasticity tolerance override");
  };

  CLI::App* analyze = app.add_subcommand("analyze", "Perron data, transform, drift, lattice");
  CLI::App* renewal = app.add_subcommand("renewal", "renewal measures and diagnostics");
  CLI::App* solve = app.add_subcommand("solve", "renewal equation solve and asymptotics");
  CLI::App* simulate = app.add_subcommand("simulate", "paths, cycles, empirical measures");
  CLI::App* application = app.add_subcommand("app", "worked applications");
  application->require_subcommand(1);
  CLI::App* lindley = application->add_subcommand("lindley", "supremum tail of a drifting walk");
  CLI::App* branching = application->add_subcommand("branching", "multitype growth rate");
  CLI::App* perpetuity_cmd = application->add_subcommand("perpetuity", "tail exponent of Y=AY+B");
  for (CLI::App* sub : {analyze, renewal, solve, simulate, lindley, branching, perpetuity_cmd})
    add_common(sub);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (analyze->parsed()) return cmd_analyze(opt);
    if (renewal->parsed()) return cmd_renewal(opt);
    if (solve->parsed()) return cmd_solve(opt);
    if (simulate->parsed()) return cmd_simulate(opt);
    if (lindley->parsed()) return cmd_app_lindley(opt);
    if (branching->parsed()) return cmd_app_branching(opt);
    if (perpetuity_cmd->parsed()) return cmd_app_perpetuity(opt);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace mrt
