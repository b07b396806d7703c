#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tailstorm/core.hpp"
#include "tailstorm/models.hpp"
#include "tailstorm/report.hpp"
#include "tailstorm/rng.hpp"

namespace tailstorm::m3 {

/// One atom of the driving Poisson point process.
struct PoissonPoint {
  double u = 0.0;  // Frechet-scale mark; strictly descending in generation order
  int shift = 0;
  SpectralWindow window;
};

struct StopPolicy {
  double epsilon = 1e-3;            // accepted relative sup-norm error at the cap
  std::uint64_t n_max = 500000;     // hard cap on generated marks per path/stream
  std::uint64_t min_points = 0;     // floor on generated marks (testing hook)
};

struct Certificate {
  bool exact = false;        // stopped because no further mark can alter the path
  double sup_error = 0.0;    // bound on the sup-norm error from stopping early
  double tail_alpha_mass = 0.0;  // relative alpha-mass omitted by window truncation
  std::uint64_t points = 0;  // marks generated
};

/// A simulated sample path over a finite window.
struct PathWindow {
  int t_min = 0;
  int t_max = 0;
  int dim = 1;
  std::vector<double> values;  // row-major by time
  std::string tag;             // "m3" | "general"
  Certificate cert;

  double at(int t, int comp) const {
    return values[static_cast<std::size_t>(t - t_min) * dim + comp];
  }
  double& at(int t, int comp) {
    return values[static_cast<std::size_t>(t - t_min) * dim + comp];
  }
  int length() const { return t_max - t_min + 1; }
};

/// Stopping failed to certify the requested accuracy; carries the partial path.
class TruncationError : public std::runtime_error {
 public:
  TruncationError(std::string msg, PathWindow partial)
      : std::runtime_error(std::move(msg)), partial_path(std::move(partial)) {}
  PathWindow partial_path;
};

/// Mixed-moving-maxima construction: componentwise max over Poisson atoms of
///   u_i * Theta^(i)_{t + T_i} / alpha_norm(Theta^(i)).
/// Marks descend as (Gamma_i / |shift range|)^(-1/alpha) with Gamma_i the
/// cumulated unit exponentials; shifts are uniform on the range (thinning of
/// the product intensity). Generation stops exactly once the next mark cannot
/// exceed the current minimum of the path (each atom's contribution is at
/// most its mark because norm(Theta_t) <= alpha_norm(Theta)).
PathWindow simulate_m3(const models::SpectralModel& model, const Alpha& alpha,
                       const NormSpec& spec, int t_min, int t_max, const StopPolicy& stop,
                       Rng& rng);

/// Per-lag, per-component upper thresholds; +infinity drops the constraint.
struct ThresholdGrid {
  int lag_min = 0;
  int lag_max = 0;
  int dim = 1;
  std::vector<double> x;  // row-major by lag

  double at(int lag, int comp) const {
    return x[static_cast<std::size_t>(lag - lag_min) * dim + comp];
  }
  static ThresholdGrid uniform(int lag_min, int lag_max, int dim, double level);
};

struct FddResult {
  double probability = 0.0;
  double std_error = 0.0;   // delta-method through exp(-exponent)
  double exponent = 0.0;
  double exponent_se = 0.0;
  std::size_t n = 0;
};

/// Finite-dimensional distribution function of the construction:
///   exp(-sum_z E[ alpha_norm(Theta)^-alpha (max_{i,n} Theta^i_{n+z} / x^i_n)^alpha ]).
/// The inner expectation is Monte Carlo over model draws; the shift sum runs
/// over every z whose support can overlap the probe lags.
FddResult fdd_cdf(const models::SpectralModel& model, const Alpha& alpha, const NormSpec& spec,
                  const ThresholdGrid& grid, std::size_t mc_budget, Rng& rng);

struct MaxStabilityCell {
  int lag = 0;
  double threshold = 0.0;
  double p_pow_k = 0.0;     // empirical P(Z <= x)^k
  double p_scaled = 0.0;    // empirical P(Z <= k^(-1/alpha) x)
  double combined_se = 0.0;
  bool pass = false;
};

struct MaxStabilityResult {
  int k = 1;
  std::vector<MaxStabilityCell> cells;
  bool pass = false;
  nlohmann::ordered_json to_json() const;
};

using PathSource = std::function<PathWindow(Rng&)>;

/// Empirical check of F^k(x) = F(k^(-1/alpha) x) on a probe grid, with two
/// independent path batches and 3-sigma binomial agreement per cell.
MaxStabilityResult max_stability_check(const PathSource& source, const Alpha& alpha, int k,
                                       std::span<const int> probe_lags,
                                       std::span<const double> thresholds, std::size_t n,
                                       Rng& rng, double z = 3.0);

/// Exceedance region for the limit-measure probe: the intersection of
/// componentwise (comp >= 0) or norm (comp == -1) strict lower bounds.
struct ExceedanceAtom {
  int lag = 0;
  int comp = -1;    // -1: constraint on norm(x_lag)
  double level = 0.0;
};

struct RadialSet {
  std::vector<ExceedanceAtom> atoms;  // conjunction; must be bounded away from 0
};

/// Monte Carlo evaluation of the limit measure of `set`, with the radial
/// integral in closed form per draw: nu_alpha((v,inf]) = v^-alpha.
struct LimitMeasureResult {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
};

LimitMeasureResult limit_measure_probe(const models::SpectralModel& model, const Alpha& alpha,
                                       const NormSpec& spec, const RadialSet& set,
                                       std::size_t mc_budget, Rng& rng);

}  // namespace tailstorm::m3
