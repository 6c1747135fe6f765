#ifndef MRT_DISTSPEC_HPP
#define MRT_DISTSPEC_HPP

#include <memory>
#include <string>
#include <vector>

#include "mrt/rng.hpp"

namespace mrt {

// Analytic description of a distribution on the real line.  Composite kinds
// (shift, negate, mixture, sum) close the family under the operations the
// toolkit needs: exponential tilting, moments, sampling and discretization.
struct DistSpec;
using DistSpecPtr = std::shared_ptr<const DistSpec>;

struct DistSpec {
  enum class Kind {
    Exponential,    // rate a, support (0, inf)
    Normal,         // mean a, sd b
    Uniform,        // on (a, b)
    Point,          // unit mass at a
    TiltedUniform,  // density ~ exp(c*x) on (a, b)
    Shift,          // parts[0] shifted by a
    Negate,         // -X for X ~ parts[0]
    Mixture,        // weights[k] * parts[k]
    Sum,            // independent sum of parts
  };

  Kind kind = Kind::Point;
  double a = 0.0, b = 0.0, c = 0.0;
  std::vector<double> weights;
  std::vector<DistSpecPtr> parts;
};

DistSpecPtr make_exponential(double rate);
DistSpecPtr make_normal(double mean, double sd);
DistSpecPtr make_uniform(double a, double b);
DistSpecPtr make_point(double x);
DistSpecPtr make_shift(double offset, DistSpecPtr inner);
DistSpecPtr make_negate(DistSpecPtr inner);
DistSpecPtr make_mixture(std::vector<double> weights, std::vector<DistSpecPtr> parts);
DistSpecPtr make_sum(std::vector<DistSpecPtr> parts);

double spec_mean(const DistSpec& s);
// Exponential moment E exp(t X); throws DivergentMoment outside the
// convergence region.
double spec_mgf(const DistSpec& s, double t);
double spec_cdf(const DistSpec& s, double x);
// Mass of the single point {x} (nonzero only for atomic components).
double spec_point_mass(const DistSpec& s, double x);
// Integral of x over (a, b] of the continuous + atomic parts.
double spec_partial_mean(const DistSpec& s, double a, double b);
bool spec_has_density(const DistSpec& s);
double spec_support_min(const DistSpec& s);
double spec_support_max(const DistSpec& s);
double spec_sample(const DistSpec& s, Rng& rng);
// Law e^{t x} dF(x) / mgf(t).
DistSpecPtr spec_tilt(const DistSpec& s, double t);

// Textual form: exp(r), normal(m,s), uniform(a,b), point(x), shift(x, d),
// neg(d), conv(d1, d2, ...), mix(w1: d1, w2: d2, ...).
DistSpecPtr parse_dist_spec(const std::string& text);
std::string dist_spec_to_string(const DistSpec& s);

}  // namespace mrt

#endif  // MRT_DISTSPEC_HPP
