#include "mrt/distspec.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "mrt/errors.hpp"

namespace mrt {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }
double std_normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); }

// (e^x - e^y) computed stably for x ~ y ~ 0.
double expdiff(double x, double y) { return std::expm1(x) - std::expm1(y); }
}  // namespace

DistSpecPtr make_exponential(double rate) {
  if (!(rate > 0)) throw ConfigError("exp(rate): rate must be positive");
  auto s = std::make_shared<DistSpec>();
  s->kind = DistSpec::Kind::Exponential;
  s->a = rate;
  return s;
}

DistSpecPtr make_normal(double mean, double sd) {
  if (!(sd > 0)) throw ConfigError("normal(mu,sd): sd must be positive");
  auto s = std::make_shared<DistSpec>();
  s->kind = DistSpec::Kind::Normal;
  s->a = mean;
  s->b = sd;
  return s;
}

DistSpecPtr make_uniform(double a, double b) {
  if (!(a < b)) throw ConfigError("uniform(a,b): requires a < b");
  auto s = std::make_shared<DistSpec>();
  s->kind = DistSpec::Kind::Uniform;
  s->a = a;
  s->b = b;
  return s;
}

DistSpecPtr make_point(double x) {
  auto s = std::make_shared<DistSpec>();
  s->kind = DistSpec::Kind::Point;
  s->a = x;
  return s;
}

DistSpecPtr make_shift(double offset, DistSpecPtr inner) {
  auto s = std::make_shared<DistSpec>();
  s->kind = DistSpec::Kind::Shift;
  s->a = offset;
  s->parts = {std::move(inner)};
  return s;
}

DistSpecPtr make_negate(DistSpecPtr inner) {
  auto s = std::make_shared<DistSpec>();
  s->kind = DistSpec::Kind::Negate;
  s->parts = {std::move(inner)};
  return s;
}

DistSpecPtr make_mixture(std::vector<double> weights, std::vector<DistSpecPtr> parts) {
  if (weights.size() != parts.size() || parts.empty())
    throw ConfigError("mix: weights and components must match and be nonempty");
  double tot = 0.0;
  for (double w : weights) {
    if (!(w >= 0)) throw ConfigError("mix: weights must be nonnegative");
    tot += w;
  }
  if (!(tot > 0)) throw ConfigError("mix: total weight must be positive");
  for (double& w : weights) w /= tot;
  auto s = std::make_shared<DistSpec>();
  s->kind = DistSpec::Kind::Mixture;
  s->weights = std::move(weights);
  s->parts = std::move(parts);
  return s;
}

DistSpecPtr make_sum(std::vector<DistSpecPtr> parts) {
  if (parts.size() < 2) throw ConfigError("conv: needs at least two components");
  auto s = std::make_shared<DistSpec>();
  s->kind = DistSpec::Kind::Sum;
  s->parts = std::move(parts);
  return s;
}

namespace {
DistSpecPtr make_tilted_uniform(double a, double b, double lam) {
  auto s = std::make_shared<DistSpec>();
  s->kind = DistSpec::Kind::TiltedUniform;
  s->a = a;
  s->b = b;
  s->c = lam;
  return s;
}
}  // namespace

double spec_mean(const DistSpec& s) {
  using K = DistSpec::Kind;
  switch (s.kind) {
    case K::Exponential:
      return 1.0 / s.a;
    case K::Normal:
      return s.a;
    case K::Uniform:
      return 0.5 * (s.a + s.b);
    case K::Point:
      return s.a;
    case K::TiltedUniform: {
      const double l = s.c;
      const double w = s.b - s.a;
      // E X = (b e^{lb} - a e^{la})/(e^{lb} - e^{la}) - 1/l
      const double num = s.b * std::exp(l * w) - s.a;
      const double den = std::expm1(l * w);
      return num / den - 1.0 / l;
    }
    case K::Shift:
      return s.a + spec_mean(*s.parts[0]);
    case K::Negate:
      return -spec_mean(*s.parts[0]);
    case K::Mixture: {
      double m = 0.0;
      for (std::size_t k = 0; k < s.parts.size(); ++k) m += s.weights[k] * spec_mean(*s.parts[k]);
      return m;
    }
    case K::Sum: {
      double m = 0.0;
      for (const auto& p : s.parts) m += spec_mean(*p);
      return m;
    }
  }
  return 0.0;
}

double spec_mgf(const DistSpec& s, double t) {
  using K = DistSpec::Kind;
  switch (s.kind) {
    case K::Exponential:
      if (t >= s.a) throw DivergentMoment("exponential moment diverges at t >= rate");
      return s.a / (s.a - t);
    case K::Normal:
      return std::exp(s.a * t + 0.5 * s.b * s.b * t * t);
    case K::Uniform: {
      if (std::abs(t) < 1e-12) return 1.0 + 0.5 * t * (s.a + s.b);
      return expdiff(t * s.b, t * s.a) / (t * (s.b - s.a));
    }
    case K::Point:
      return std::exp(t * s.a);
    case K::TiltedUniform: {
      // mgf(t) = phi_U(c + t) / phi_U(c) for the base uniform law
      DistSpec u;
      u.kind = K::Uniform;
      u.a = s.a;
      u.b = s.b;
      return spec_mgf(u, s.c + t) / spec_mgf(u, s.c);
    }
    case K::Shift:
      return std::exp(t * s.a) * spec_mgf(*s.parts[0], t);
    case K::Negate:
      return spec_mgf(*s.parts[0], -t);
    case K::Mixture: {
      double m = 0.0;
      for (std::size_t k = 0; k < s.parts.size(); ++k)
        m += s.weights[k] * spec_mgf(*s.parts[k], t);
      return m;
    }
    case K::Sum: {
      double m = 1.0;
      for (const auto& p : s.parts) m *= spec_mgf(*p, t);
      return m;
    }
  }
  return 1.0;
}

double spec_cdf(const DistSpec& s, double x) {
  using K = DistSpec::Kind;
  switch (s.kind) {
    case K::Exponential:
      return x <= 0 ? 0.0 : -std::expm1(-s.a * x);
    case K::Normal:
      return std_normal_cdf((x - s.a) / s.b);
    case K::Uniform:
      if (x <= s.a) return 0.0;
      if (x >= s.b) return 1.0;
      return (x - s.a) / (s.b - s.a);
    case K::Point:
      return x >= s.a ? 1.0 : 0.0;
    case K::TiltedUniform: {
      if (x <= s.a) return 0.0;
      if (x >= s.b) return 1.0;
      const double l = s.c;
      return expdiff(l * (x - s.a), 0.0) / expdiff(l * (s.b - s.a), 0.0);
    }
    case K::Shift:
      return spec_cdf(*s.parts[0], x - s.a);
    case K::Negate:
      // P(-X <= x) = 1 - P(X < -x) = 1 - F(-x) + P(X = -x)
      return 1.0 - spec_cdf(*s.parts[0], -x) + spec_point_mass(*s.parts[0], -x);
    case K::Mixture: {
      double m = 0.0;
      for (std::size_t k = 0; k < s.parts.size(); ++k)
        m += s.weights[k] * spec_cdf(*s.parts[k], x);
      return m;
    }
    case K::Sum:
      throw Error("spec_cdf: no closed form for convolutions; discretize instead");
  }
  return 0.0;
}

double spec_point_mass(const DistSpec& s, double x) {
  using K = DistSpec::Kind;
  switch (s.kind) {
    case K::Point:
      return x == s.a ? 1.0 : 0.0;
    case K::Shift:
      return spec_point_mass(*s.parts[0], x - s.a);
    case K::Negate:
      return spec_point_mass(*s.parts[0], -x);
    case K::Mixture: {
      double m = 0.0;
      for (std::size_t k = 0; k < s.parts.size(); ++k)
        m += s.weights[k] * spec_point_mass(*s.parts[k], x);
      return m;
    }
    case K::Sum: {
      // Atomic only if every component is atomic; not needed beyond points.
      double m = 1.0;
      double loc = 0.0;
      for (const auto& p : s.parts) {
        if (p->kind != K::Point) return 0.0;
        loc += p->a;
        (void)m;
      }
      return loc == x ? 1.0 : 0.0;
    }
    default:
      return 0.0;
  }
}

double spec_partial_mean(const DistSpec& s, double a, double b) {
  using K = DistSpec::Kind;
  if (!(a < b)) return 0.0;
  switch (s.kind) {
    case K::Exponential: {
      const double r = s.a;
      auto anti = [&](double x) {
        // -(x + 1/r) e^{-r x}, valid for x >= 0
        return -(x + 1.0 / r) * std::exp(-r * x);
      };
      const double lo = std::max(a, 0.0);
      if (b <= 0) return 0.0;
      return anti(b) - anti(lo);
    }
    case K::Normal: {
      const double mu = s.a, sd = s.b;
      const double za = (a - mu) / sd, zb = (b - mu) / sd;
      return mu * (std_normal_cdf(zb) - std_normal_cdf(za)) -
             sd * (std_normal_pdf(zb) - std_normal_pdf(za));
    }
    case K::Uniform: {
      const double lo = std::max(a, s.a), hi = std::min(b, s.b);
      if (hi <= lo) return 0.0;
      return 0.5 * (hi * hi - lo * lo) / (s.b - s.a);
    }
    case K::Point:
      return (s.a > a && s.a <= b) ? s.a : 0.0;
    case K::TiltedUniform: {
      const double l = s.c;
      const double lo = std::max(a, s.a), hi = std::min(b, s.b);
      if (hi <= lo) return 0.0;
      const double z = expdiff(l * (s.b - s.a), 0.0) / l;  // normalizing integral
      auto anti = [&](double x) { return std::exp(l * (x - s.a)) * (x / l - 1.0 / (l * l)); };
      return (anti(hi) - anti(lo)) / z;
    }
    case K::Shift: {
      const double inner = spec_partial_mean(*s.parts[0], a - s.a, b - s.a);
      const double mass = spec_cdf(*s.parts[0], b - s.a) - spec_cdf(*s.parts[0], a - s.a);
      return inner + s.a * mass;
    }
    case K::Negate:
      return -spec_partial_mean(*s.parts[0], -b, -a);
    case K::Mixture: {
      double m = 0.0;
      for (std::size_t k = 0; k < s.parts.size(); ++k)
        m += s.weights[k] * spec_partial_mean(*s.parts[k], a, b);
      return m;
    }
    case K::Sum:
      throw Error("spec_partial_mean: no closed form for convolutions");
  }
  return 0.0;
}

bool spec_has_density(const DistSpec& s) {
  using K = DistSpec::Kind;
  switch (s.kind) {
    case K::Exponential:
    case K::Normal:
    case K::Uniform:
    case K::TiltedUniform:
      return true;
    case K::Point:
      return false;
    case K::Shift:
    case K::Negate:
      return spec_has_density(*s.parts[0]);
    case K::Mixture: {
      for (std::size_t k = 0; k < s.parts.size(); ++k)
        if (s.weights[k] > 0 && spec_has_density(*s.parts[k])) return true;
      return false;
    }
    case K::Sum: {
      for (const auto& p : s.parts)
        if (spec_has_density(*p)) return true;
      return false;
    }
  }
  return false;
}

double spec_support_min(const DistSpec& s) {
  using K = DistSpec::Kind;
  switch (s.kind) {
    case K::Exponential:
      return 0.0;
    case K::Normal:
      return -kInf;
    case K::Uniform:
    case K::TiltedUniform:
      return s.a;
    case K::Point:
      return s.a;
    case K::Shift:
      return s.a + spec_support_min(*s.parts[0]);
    case K::Negate:
      return -spec_support_max(*s.parts[0]);
    case K::Mixture: {
      double m = kInf;
      for (std::size_t k = 0; k < s.parts.size(); ++k)
        if (s.weights[k] > 0) m = std::min(m, spec_support_min(*s.parts[k]));
      return m;
    }
    case K::Sum: {
      double m = 0.0;
      for (const auto& p : s.parts) m += spec_support_min(*p);
      return m;
    }
  }
  return -kInf;
}

double spec_support_max(const DistSpec& s) {
  using K = DistSpec::Kind;
  switch (s.kind) {
    case K::Exponential:
      return kInf;
    case K::Normal:
      return kInf;
    case K::Uniform:
    case K::TiltedUniform:
      return s.b;
    case K::Point:
      return s.a;
    case K::Shift:
      return s.a + spec_support_max(*s.parts[0]);
    case K::Negate:
      return -spec_support_min(*s.parts[0]);
    case K::Mixture: {
      double m = -kInf;
      for (std::size_t k = 0; k < s.parts.size(); ++k)
        if (s.weights[k] > 0) m = std::max(m, spec_support_max(*s.parts[k]));
      return m;
    }
    case K::Sum: {
      double m = 0.0;
      for (const auto& p : s.parts) m += spec_support_max(*p);
      return m;
    }
  }
  return kInf;
}

double spec_sample(const DistSpec& s, Rng& rng) {
  using K = DistSpec::Kind;
  switch (s.kind) {
    case K::Exponential:
      return -std::log(rng.uniform()) / s.a;
    case K::Normal: {
      const double u1 = rng.uniform();
      const double u2 = rng.uniform();
      return s.a + s.b * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }
    case K::Uniform:
      return s.a + (s.b - s.a) * rng.uniform_co();
    case K::Point:
      return s.a;
    case K::TiltedUniform: {
      const double l = s.c;
      const double u = rng.uniform_co();
      return s.a + std::log1p(u * std::expm1(l * (s.b - s.a))) / l;
    }
    case K::Shift:
      return s.a + spec_sample(*s.parts[0], rng);
    case K::Negate:
      return -spec_sample(*s.parts[0], rng);
    case K::Mixture: {
      double u = rng.uniform_co();
      for (std::size_t k = 0; k < s.parts.size(); ++k) {
        if (u < s.weights[k] || k + 1 == s.parts.size()) return spec_sample(*s.parts[k], rng);
        u -= s.weights[k];
      }
      return spec_sample(*s.parts.back(), rng);
    }
    case K::Sum: {
      double x = 0.0;
      for (const auto& p : s.parts) x += spec_sample(*p, rng);
      return x;
    }
  }
  return 0.0;
}

DistSpecPtr spec_tilt(const DistSpec& s, double t) {
  using K = DistSpec::Kind;
  if (t == 0.0) return std::make_shared<DistSpec>(s);
  switch (s.kind) {
    case K::Exponential:
      if (t >= s.a) throw DivergentMoment("tilt outside convergence region of exp law");
      return make_exponential(s.a - t);
    case K::Normal:
      return make_normal(s.a + t * s.b * s.b, s.b);
    case K::Uniform:
      return make_tilted_uniform(s.a, s.b, t);
    case K::Point:
      return make_point(s.a);
    case K::TiltedUniform:
      if (s.c + t == 0.0) return make_uniform(s.a, s.b);
      return make_tilted_uniform(s.a, s.b, s.c + t);
    case K::Shift:
      return make_shift(s.a, spec_tilt(*s.parts[0], t));
    case K::Negate:
      return make_negate(spec_tilt(*s.parts[0], -t));
    case K::Mixture: {
      std::vector<double> w(s.weights.size());
      std::vector<DistSpecPtr> parts(s.parts.size());
      for (std::size_t k = 0; k < s.parts.size(); ++k) {
        w[k] = s.weights[k] * spec_mgf(*s.parts[k], t);
        parts[k] = spec_tilt(*s.parts[k], t);
      }
      return make_mixture(std::move(w), std::move(parts));
    }
    case K::Sum: {
      std::vector<DistSpecPtr> parts(s.parts.size());
      for (std::size_t k = 0; k < s.parts.size(); ++k) parts[k] = spec_tilt(*s.parts[k], t);
      return make_sum(std::move(parts));
    }
  }
  throw Error("spec_tilt: unsupported kind");
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

struct Parser {
  const std::string& text;
  std::size_t pos = 0;

  explicit Parser(const std::string& t) : text(t) {}

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }

  [[noreturn]] void fail(const std::string& what) {
    throw ConfigError("distribution spec '" + text + "': " + what + " at position " +
                      std::to_string(pos));
  }

  bool eat(char c) {
    skip_ws();
    if (pos < text.size() && text[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!eat(c)) fail(std::string("expected '") + c + "'");
  }

  std::string ident() {
    skip_ws();
    std::size_t start = pos;
    while (pos < text.size() &&
           (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
      ++pos;
    if (pos == start) fail("expected a name");
    return text.substr(start, pos - start);
  }

  double number() {
    skip_ws();
    std::size_t consumed = 0;
    double v = 0.0;
    try {
      v = std::stod(text.substr(pos), &consumed);
    } catch (const std::exception&) {
      fail("expected a number");
    }
    pos += consumed;
    return v;
  }

  DistSpecPtr dist() {
    const std::string name = ident();
    expect('(');
    DistSpecPtr out;
    if (name == "exp") {
      const double r = number();
      out = make_exponential(r);
    } else if (name == "normal") {
      const double mu = number();
      expect(',');
      const double sd = number();
      out = make_normal(mu, sd);
    } else if (name == "uniform") {
      const double a = number();
      expect(',');
      const double b = number();
      out = make_uniform(a, b);
    } else if (name == "point") {
      out = make_point(number());
    } else if (name == "shift") {
      const double c = number();
      expect(',');
      out = make_shift(c, dist());
    } else if (name == "neg") {
      out = make_negate(dist());
    } else if (name == "conv") {
      std::vector<DistSpecPtr> parts;
      parts.push_back(dist());
      while (eat(',')) parts.push_back(dist());
      out = make_sum(std::move(parts));
    } else if (name == "mix") {
      std::vector<double> w;
      std::vector<DistSpecPtr> parts;
      do {
        w.push_back(number());
        expect(':');
        parts.push_back(dist());
      } while (eat(','));
      out = make_mixture(std::move(w), std::move(parts));
    } else {
      fail("unknown distribution '" + name + "'");
    }
    expect(')');
    return out;
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace

DistSpecPtr parse_dist_spec(const std::string& text) {
  Parser p(text);
  DistSpecPtr d = p.dist();
  p.skip_ws();
  if (p.pos != text.size()) p.fail("trailing characters");
  return d;
}

std::string dist_spec_to_string(const DistSpec& s) {
  using K = DistSpec::Kind;
  switch (s.kind) {
    case K::Exponential:
      return "exp(" + fmt(s.a) + ")";
    case K::Normal:
      return "normal(" + fmt(s.a) + "," + fmt(s.b) + ")";
    case K::Uniform:
      return "uniform(" + fmt(s.a) + "," + fmt(s.b) + ")";
    case K::Point:
      return "point(" + fmt(s.a) + ")";
    case K::TiltedUniform:
      return "tilted_uniform(" + fmt(s.a) + "," + fmt(s.b) + ";" + fmt(s.c) + ")";
    case K::Shift:
      return "shift(" + fmt(s.a) + ", " + dist_spec_to_string(*s.parts[0]) + ")";
    case K::Negate:
      return "neg(" + dist_spec_to_string(*s.parts[0]) + ")";
    case K::Mixture: {
      std::string out = "mix(";
      for (std::size_t k = 0; k < s.parts.size(); ++k) {
        if (k) out += ", ";
        out += fmt(s.weights[k]) + ": " + dist_spec_to_string(*s.parts[k]);
      }
      return out + ")";
    }
    case K::Sum: {
      std::string out = "conv(";
      for (std::size_t k = 0; k < s.parts.size(); ++k) {
        if (k) out += ", ";
        out += dist_spec_to_string(*s.parts[k]);
      }
      return out + ")";
    }
  }
  return "?";
}

}  // namespace mrt
