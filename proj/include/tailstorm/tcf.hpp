#pragma once

#include <functional>
#include <string>
#include <vector>

#include "tailstorm/core.hpp"
#include "tailstorm/models.hpp"
#include "tailstorm/report.hpp"
#include "tailstorm/rng.hpp"
#include "tailstorm/stats.hpp"

namespace tailstorm::tcf {

/// Argument block for a test function: values at lags [lag_min, lag_max],
/// d components per lag.
class LagBlock {
 public:
  LagBlock(int lag_min, int lag_max, int dim)
      : lag_min_(lag_min), lag_max_(lag_max), dim_(dim),
        values_(static_cast<std::size_t>(lag_max - lag_min + 1) * dim, 0.0) {}

  int lag_min() const { return lag_min_; }
  int lag_max() const { return lag_max_; }
  int dim() const { return dim_; }
  double& at(int lag, int comp) { return values_[static_cast<std::size_t>(lag - lag_min_) * dim_ + comp]; }
  double at(int lag, int comp) const { return values_[static_cast<std::size_t>(lag - lag_min_) * dim_ + comp]; }
  std::span<const double> vec(int lag) const {
    return {values_.data() + static_cast<std::size_t>(lag - lag_min_) * dim_,
            static_cast<std::size_t>(dim_)};
  }
  double norm_at(int lag, const NormSpec& spec) const { return norm(vec(lag), spec); }

 private:
  int lag_min_, lag_max_, dim_;
  std::vector<double> values_;
};

/// Bounded continuous test function vanishing whenever theta_0 = 0.
struct TestFunction {
  std::string id;
  int lag_min = 0;
  int lag_max = 0;
  double bound = 1.0;  // sup |f|
  std::function<double(const LagBlock&)> eval;
};

/// Fixed battery over lags [s, t]: per lag, a clipped norm power, a smoothed
/// half-space indicator and a norm bump, each multiplied by a factor
/// vanishing at theta_0 = 0; plus three window-global members.
/// Size: 3 * (t - s + 1) + 3.
std::vector<TestFunction> default_f_family(int s, int t, int dim, const NormSpec& spec);

/// Probe f on windows with theta_0 = 0; throws unless it returns 0 on all.
void require_vanishing_at_zero(const TestFunction& f, int dim);

/// Monte Carlo check of one time-change identity at shift i:
///   E f(Theta_{s-i..t-i})  vs  E f(Theta_s / |Theta_i|, ...) |Theta_i|^alpha.
/// Both sides use independent samples; deterministic models are evaluated
/// exactly (zero standard error). Pass iff |diff| <= z * SE (diff == 0 when
/// SE == 0).
TestReport tcf_residual(const models::SpectralModel& model, const TestFunction& f, int i,
                        const Alpha& alpha, const NormSpec& spec, std::size_t n, Rng& rng,
                        double z_threshold = 3.0);

struct BatteryResult {
  std::vector<TestReport> reports;
  double z_adjusted = 0.0;  // Bonferroni-adjusted per-test threshold
  bool pass = false;
};

/// Full battery x shift grid with a Bonferroni-adjusted battery verdict.
BatteryResult tcf_battery(const models::SpectralModel& model, int s, int t,
                          std::span<const int> shifts, const Alpha& alpha, const NormSpec& spec,
                          std::size_t n, Rng& rng, double z_threshold = 3.0);

/// One draw of the random-shift kernel: pick K with P(K = k | Theta)
/// proportional to norm(Theta_k)^alpha over the stored window, then return
/// the re-anchored, rescaled window (Theta_{t+K} / norm(Theta_K)).
/// Requires Outside::Zero semantics and a nonzero alpha-mass.
SpectralWindow random_shift(const SpectralWindow& w, const Alpha& alpha, const NormSpec& spec,
                            Rng& rng);

struct RsInvarianceResult {
  std::vector<TestReport> marginal_ks;  // per probe lag, norms of Theta vs shifted
  TestReport joint_energy;
  bool pass = false;
};

/// Two-sample comparison between Theta and its random-shift image on probe
/// lags [s, t]. Per-lag KS plus one joint energy test; the verdict applies a
/// Bonferroni correction across the members.
RsInvarianceResult rs_invariance_test(const models::SpectralModel& model, const Alpha& alpha,
                                      const NormSpec& spec, int s, int t, std::size_t n,
                                      int permutations, double p_threshold, Rng& rng);

struct ScDiagnostic {
  std::vector<double> divergence_thresholds;
  std::vector<double> divergence_fraction;  // P(alpha-sum over [-L, L] > tau)
  double growth_ratio_median = 0.0;         // alpha-sum [-L,L] / alpha-sum [-L/2,L/2]
  double tail_max_median = 0.0;             // max norm over L/2 <= |t| <= L
  double tail_max_q95 = 0.0;
  double interior_anchor_fraction = 0.0;    // |t_star| < L/2
  double decay_tolerance = 0.05;
  double interior_tolerance = 0.95;
  bool sc_consistent = false;
  nlohmann::ordered_json to_json() const;
};

/// Empirical summability diagnostics over horizon L: divergence trend of the
/// alpha-sum, decay of the outer-annulus norms, and anchor localization.
ScDiagnostic sc_diagnostic(const models::SpectralModel& model, const Alpha& alpha,
                           const NormSpec& spec, int horizon, std::size_t n, Rng& rng);

}  // namespace tailstorm::tcf
