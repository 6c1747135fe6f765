#include "mrt/model.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mrt/errors.hpp"

namespace mrt {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& origin, const std::string& where,
                      const std::string& what) {
  throw ConfigError(origin + ": " + where + ": " + what);
}

Matrix parse_matrix(const json& j, const std::string& origin, const std::string& where) {
  if (!j.is_array() || j.empty()) bad(origin, where, "expected a nonempty array of rows");
  const int m = static_cast<int>(j.size());
  Matrix q(m, m);
  for (int i = 0; i < m; ++i) {
    const json& row = j[i];
    if (!row.is_array() || static_cast<int>(row.size()) != m)
      bad(origin, where + "[" + std::to_string(i) + "]",
          "expected a row of length " + std::to_string(m));
    for (int c = 0; c < m; ++c) {
      if (!row[c].is_number())
        bad(origin, where + "[" + std::to_string(i) + "][" + std::to_string(c) + "]",
            "expected a number");
      q(i, c) = row[c].get<double>();
    }
  }
  return q;
}

std::vector<DistSpecPtr> parse_dist_matrix(const json& j, const Matrix& weights,
                                           const std::string& origin,
                                           const std::string& where) {
  const int m = weights.rows();
  if (!j.is_array() || static_cast<int>(j.size()) != m)
    bad(origin, where, "expected " + std::to_string(m) + " rows");
  std::vector<DistSpecPtr> out(static_cast<std::size_t>(m) * m);
  for (int i = 0; i < m; ++i) {
    const json& row = j[i];
    if (!row.is_array() || static_cast<int>(row.size()) != m)
      bad(origin, where + "[" + std::to_string(i) + "]",
          "expected a row of length " + std::to_string(m));
    for (int c = 0; c < m; ++c) {
      const std::string cell = where + "[" + std::to_string(i) + "][" + std::to_string(c) + "]";
      if (row[c].is_null()) {
        if (weights(i, c) > 0.0)
          bad(origin, cell,
              "missing distribution for positive weight (" + std::to_string(i) + "," +
                  std::to_string(c) + ")");
        continue;
      }
      if (!row[c].is_string()) bad(origin, cell, "expected a distribution spec string or null");
      try {
        out[static_cast<std::size_t>(i) * m + c] = parse_dist_spec(row[c].get<std::string>());
      } catch (const ConfigError& e) {
        bad(origin, cell, e.what());
      }
    }
  }
  return out;
}

Vec parse_vec(const json& j, const std::string& origin, const std::string& where) {
  if (!j.is_array() || j.empty()) bad(origin, where, "expected a nonempty numeric array");
  Vec out;
  for (std::size_t k = 0; k < j.size(); ++k) {
    if (!j[k].is_number()) bad(origin, where + "[" + std::to_string(k) + "]", "expected a number");
    out.push_back(j[k].get<double>());
  }
  return out;
}

void parse_bracket(const json& j, double& lo, double& hi, const std::string& origin,
                   const std::string& where) {
  const Vec v = parse_vec(j, origin, where);
  if (v.size() != 2 || !(v[0] < v[1])) bad(origin, where, "expected [lo, hi] with lo < hi");
  lo = v[0];
  hi = v[1];
}

}  // namespace

FunctionSpec parse_function_spec(const std::string& text) {
  FunctionSpec fs;
  fs.text = text;
  std::size_t open = text.find('(');
  std::size_t close = text.rfind(')');
  if (open == std::string::npos || close == std::string::npos || close < open)
    throw ConfigError("function spec '" + text + "': expected name(args)");
  const std::string name = text.substr(0, open);
  const std::string args = text.substr(open + 1, close - open - 1);
  auto split_args = [&](int expected) {
    std::vector<std::string> parts;
    std::size_t depth = 0, start = 0;
    for (std::size_t k = 0; k < args.size(); ++k) {
      if (args[k] == '(') ++depth;
      if (args[k] == ')') --depth;
      if (args[k] == ',' && depth == 0) {
        parts.push_back(args.substr(start, k - start));
        start = k + 1;
      }
    }
    parts.push_back(args.substr(start));
    if (expected >= 0 && static_cast<int>(parts.size()) != expected)
      throw ConfigError("function spec '" + text + "': wrong argument count");
    return parts;
  };
  if (name == "exptail") {
    const double r = std::stod(args);
    if (!(r > 0)) throw ConfigError("exptail(rate): rate must be positive");
    fs.f = [r](double t) { return t >= 0.0 ? std::exp(-r * t) : 0.0; };
    fs.left = {TailTag::Kind::Zero, 0.0};
    fs.right = {TailTag::Kind::ExpDecay, r};
  } else if (name == "box") {
    auto parts = split_args(2);
    const double a = std::stod(parts[0]);
    const double b = std::stod(parts[1]);
    if (!(a < b)) throw ConfigError("box(a,b): requires a < b");
    fs.f = [a, b](double t) { return (t >= a && t <= b) ? 1.0 : 0.0; };
    fs.left = fs.right = {TailTag::Kind::Zero, 0.0};
  } else if (name == "scale") {
    auto parts = split_args(2);
    const double c = std::stod(parts[0]);
    FunctionSpec inner = parse_function_spec(parts[1].substr(parts[1].find_first_not_of(' ')));
    fs.f = [c, g = inner.f](double t) { return c * g(t); };
    fs.left = inner.left;
    fs.right = inner.right;
  } else {
    throw ConfigError("function spec '" + text + "': unknown name '" + name + "'");
  }
  return fs;
}

ModelSpec parse_model(const std::string& json_text, const std::string& origin) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  ModelSpec spec;

  if (j.contains("Q") && j.contains("P")) bad(origin, "Q/P", "give either Q or P, not both");
  if (j.contains("Q") || j.contains("P")) {
    spec.given_stochastic = j.contains("P");
    const char* key = spec.given_stochastic ? "P" : "Q";
    spec.q = parse_matrix(j.at(key), origin, key);
    spec.has_kernel = true;
    const int m = spec.q.rows();
    if (j.contains("states")) {
      if (!j["states"].is_array() || static_cast<int>(j["states"].size()) != m)
        bad(origin, "states", "expected " + std::to_string(m) + " labels");
      for (const auto& s : j["states"]) spec.states.push_back(s.get<std::string>());
    } else {
      for (int i = 0; i < m; ++i) spec.states.push_back(std::to_string(i + 1));
    }
    if (!j.contains("distributions"))
      bad(origin, "distributions", "required alongside the weight matrix");
    spec.dists = parse_dist_matrix(j["distributions"], spec.q, origin, "distributions");
  }

  if (j.contains("grid")) {
    const json& g = j["grid"];
    if (g.contains("window")) {
      double a, b;
      parse_bracket(g["window"], a, b, origin, "grid.window");
      spec.window_a = a;
      spec.window_b = b;
    }
    if (g.contains("step")) {
      spec.step = g["step"].get<double>();
      if (!(spec.step > 0)) bad(origin, "grid.step", "must be positive");
    }
  }
  if (j.contains("tolerances")) {
    const json& t = j["tolerances"];
    if (t.contains("tol")) spec.tol = t["tol"].get<double>();
    if (t.contains("eps_trunc")) spec.eps_trunc = t["eps_trunc"].get<double>();
    if (t.contains("snap_tol")) spec.snap_tol = t["snap_tol"].get<double>();
  }
  if (j.contains("seed")) spec.seed = j["seed"].get<std::uint64_t>();

  if (j.contains("simulate")) {
    const json& s = j["simulate"];
    if (s.contains("paths")) spec.simulate.paths = s["paths"].get<long>();
    if (s.contains("steps")) spec.simulate.steps = s["steps"].get<long>();
    if (s.contains("start")) spec.simulate.start_state = s["start"].get<int>();
    if (s.contains("agg_step")) spec.simulate.agg_step = s["agg_step"].get<double>();
  }

  if (j.contains("solve")) {
    const json& s = j["solve"];
    if (!s.contains("z") || !s["z"].is_array())
      bad(origin, "solve.z", "expected an array of function specs, one per state");
    for (std::size_t k = 0; k < s["z"].size(); ++k) {
      try {
        spec.z_specs.push_back(parse_function_spec(s["z"][k].get<std::string>()));
      } catch (const ConfigError& e) {
        bad(origin, "solve.z[" + std::to_string(k) + "]", e.what());
      }
    }
  }

  if (j.contains("lindley")) {
    const json& l = j["lindley"];
    LindleyConfig lc;
    lc.p = parse_matrix(l.at("P"), origin, "lindley.P");
    lc.g = parse_dist_matrix(l.at("G"), lc.p, origin, "lindley.G");
    if (l.contains("bracket"))
      parse_bracket(l["bracket"], lc.bracket_lo, lc.bracket_hi, origin, "lindley.bracket");
    if (l.contains("paths")) lc.paths = l["paths"].get<long>();
    if (l.contains("t_grid")) {
      const json& t = l["t_grid"];
      if (t.is_array()) {
        lc.t_grid = parse_vec(t, origin, "lindley.t_grid");
      } else {
        const double lo = t.at("lo").get<double>();
        const double hi = t.at("hi").get<double>();
        const int n = t.at("n").get<int>();
        for (int k = 0; k < n; ++k) lc.t_grid.push_back(lo + (hi - lo) * k / (n - 1));
      }
    } else {
      for (int k = 0; k < 23; ++k) lc.t_grid.push_back(0.5 + 0.25 * k);
    }
    spec.lindley = std::move(lc);
  }

  if (j.contains("branching")) {
    const json& b = j["branching"];
    BranchingModel bm;
    bm.mean_offspring = parse_matrix(b.at("M"), origin, "branching.M");
    if (!b.contains("lifetimes") ||
        static_cast<int>(b["lifetimes"].size()) != bm.mean_offspring.rows())
      bad(origin, "branching.lifetimes", "expected one lifetime law per type");
    for (std::size_t k = 0; k < b["lifetimes"].size(); ++k) {
      try {
        bm.lifetime.push_back(parse_dist_spec(b["lifetimes"][k].get<std::string>()));
      } catch (const ConfigError& e) {
        bad(origin, "branching.lifetimes[" + std::to_string(k) + "]", e.what());
      }
    }
    if (b.contains("bracket"))
      parse_bracket(b["bracket"], bm.bracket_lo, bm.bracket_hi, origin, "branching.bracket");
    if (b.contains("target")) bm.target_type = b["target"].get<int>();
    if (b.contains("total_age")) bm.total_age = b["total_age"].get<bool>();
    bm.window = Grid::from_window(spec.window_a, spec.window_b, spec.step);
    bm.eps_trunc = spec.eps_trunc;
    spec.branching = std::move(bm);
  }

  if (j.contains("perpetuity")) {
    const json& p = j["perpetuity"];
    PerpetuityConfig pc;
    pc.model.values = parse_vec(p.at("values"), origin, "perpetuity.values");
    pc.model.p = parse_matrix(p.at("P"), origin, "perpetuity.P");
    if (pc.model.p.rows() != static_cast<int>(pc.model.values.size()))
      bad(origin, "perpetuity.P", "size must match the number of multiplier values");
    try {
      pc.model.b_law = parse_dist_spec(p.at("B").get<std::string>());
    } catch (const ConfigError& e) {
      bad(origin, "perpetuity.B", e.what());
    }
    if (p.contains("bracket"))
      parse_bracket(p["bracket"], pc.model.bracket_lo, pc.model.bracket_hi, origin,
                    "perpetuity.bracket");
    if (p.contains("samples")) pc.samples = p["samples"].get<long>();
    spec.perpetuity = std::move(pc);
  }

  return spec;
}

ModelSpec load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str(), path);
}

Grid model_grid(const ModelSpec& spec) {
  return Grid::from_window(spec.window_a, spec.window_b, spec.step);
}

SemiMarkovKernel build_kernel(const ModelSpec& spec) {
  if (!spec.has_kernel)
    throw ConfigError("config has no Q/P weight matrix; this command needs one");
  const int m = spec.q.rows();
  const Grid window = model_grid(spec);
  std::vector<Dist> dists(static_cast<std::size_t>(m) * m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      const std::size_t e = static_cast<std::size_t>(i) * m + j;
      if (spec.dists[e]) {
        dists[e] = discretize(*spec.dists[e], window);
      } else {
        dists[e].step = window.step;
      }
    }
  return make_kernel(spec.q, std::move(dists));
}

}  // namespace mrt
