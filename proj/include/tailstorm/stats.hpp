#pragma once

#include <functional>
#include <span>
#include <vector>

#include "tailstorm/report.hpp"
#include "tailstorm/rng.hpp"

namespace tailstorm::stats {

/// Standard normal cdf and quantile.
double normal_cdf(double z);
double normal_quantile(double p);

/// Kolmogorov distribution: P(sup|B(t)| > t_stat) for the asymptotic
/// one/two-sample KS null.
double kolmogorov_sf(double t_stat);

/// One-sample Kolmogorov-Smirnov against an analytic cdf (asymptotic p).
/// The cdf is probed for monotonicity on the sample range.
TestReport ks_one_sample(std::span<const double> samples,
                         const std::function<double(double)>& cdf,
                         double p_threshold = 0.01);

/// Two-sample Kolmogorov-Smirnov (asymptotic p, conservative under ties).
TestReport ks_two_sample(std::span<const double> a, std::span<const double> b,
                         double p_threshold = 0.01);

/// Row-major sample matrix: n rows of `dim` doubles.
struct SampleMatrix {
  std::size_t n = 0;
  std::size_t dim = 0;
  std::vector<double> data;

  void push_row(std::span<const double> row);
  std::span<const double> row(std::size_t i) const { return {data.data() + i * dim, dim}; }
};

/// Two-sample energy-distance test with a permutation null.
/// Statistic: (nm/(n+m)) * (2*mean d(a,b) - mean d(a,a') - mean d(b,b'))
/// with Euclidean base distance. p = (1 + #{perm >= obs}) / (B + 1).
TestReport energy_test(const SampleMatrix& a, const SampleMatrix& b, int permutations,
                       Rng& rng, double p_threshold = 0.01);

/// Distance-covariance independence test (x scalar vs y vectors) with a
/// permutation null on the y labels.
TestReport distance_covariance_test(std::span<const double> x, const SampleMatrix& y,
                                    int permutations, Rng& rng, double p_threshold = 0.01);

struct BinomialBand {
  double lo = 0.0;
  double hi = 0.0;
  bool degenerate = false;  // p_hat in {0,1}: zero-width band before clipping
};

/// p_hat +- z * sqrt(p_hat (1-p_hat) / n), clipped to [0,1].
BinomialBand binomial_band(double p_hat, std::size_t n, double z);

/// log1p of the per-entry values; the standard feature transform applied to
/// per-lag norms before Euclidean energy distances (heavy tails would
/// otherwise let single points dominate).
std::vector<double> log1p_transform(std::span<const double> v);

}  // namespace tailstorm::stats
