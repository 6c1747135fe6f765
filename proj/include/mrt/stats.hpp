#ifndef MRT_STATS_HPP
#define MRT_STATS_HPP

#include "mrt/matrix.hpp"

namespace mrt {

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_se(const Vec& xs);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

LineFit fit_line(const Vec& x, const Vec& y);

// Empirical quantile of an already sorted sample.
double quantile_sorted(const Vec& sorted, double q);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value.
KsResult ks_two_sample(Vec a, Vec b);

}  // namespace mrt

#endif  // MRT_STATS_HPP
