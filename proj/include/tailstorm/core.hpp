#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tailstorm {

/// Tail index. Strictly positive and finite by construction.
class Alpha {
 public:
  explicit Alpha(double value);
  double value() const { return value_; }

 private:
  double value_;
};

enum class NormKind { Sup, L1, Lp };

/// The fixed vector norm used throughout a run.
struct NormSpec {
  NormKind kind = NormKind::Sup;
  double p = 2.0;  // only read for Lp; must be >= 1

  static NormSpec sup() { return {NormKind::Sup, 2.0}; }
  static NormSpec l1() { return {NormKind::L1, 2.0}; }
  static NormSpec lp(double p);

  std::string str() const;
};

double norm(std::span<const double> v, const NormSpec& spec);

/// Semantics of values at times outside a stored window.
enum class Outside : std::uint8_t { Zero, Unknown };

/// A finite window of a d-dimensional nonnegative sequence, dense over
/// [t_min, t_max] with 0 inside the window stored explicitly.
class SpectralWindow {
 public:
  SpectralWindow(int t_min, int t_max, int dim, Outside outside);

  int t_min() const { return t_min_; }
  int t_max() const { return t_max_; }
  int dim() const { return dim_; }
  int length() const { return t_max_ - t_min_ + 1; }
  Outside outside() const { return outside_; }

  bool covers(int t) const { return t >= t_min_ && t <= t_max_; }

  double& at(int t, int comp);
  double at(int t, int comp) const;
  std::span<const double> vec(int t) const;
  std::span<double> vec(int t);

  /// Value with outside-window semantics: 0 beyond the window for
  /// Outside::Zero, error for Outside::Unknown.
  double value_at(int t, int comp) const;
  double norm_at(int t, const NormSpec& spec) const;

  bool normalized() const { return normalized_; }
  void set_normalized(bool flag) { normalized_ = flag; }

  /// All components finite and nonnegative; if the normalized flag is set,
  /// | norm(theta_0) - 1 | <= 1e-12 under `spec`.
  void validate(const NormSpec& spec) const;

  bool operator==(const SpectralWindow& other) const;

 private:
  int t_min_;
  int t_max_;
  int dim_;
  Outside outside_;
  bool normalized_ = false;
  std::vector<double> values_;  // row-major by time
};

/// A finite window of a signed d-dimensional sequence (input to the
/// positive/negative-part lift).
struct SignedWindow {
  int t_min = 0;
  int t_max = 0;
  int dim = 1;
  std::vector<double> values;  // row-major by time, length (t_max-t_min+1)*dim

  double at(int t, int comp) const { return values[static_cast<std::size_t>(t - t_min) * dim + comp]; }
  double& at(int t, int comp) { return values[static_cast<std::size_t>(t - t_min) * dim + comp]; }
};

/// Componentwise lift x -> (x_+, x_-) into dimension 2d. Norm-preserving
/// for Sup, L1 and Lp because exactly one of the pair is nonzero.
SpectralWindow signed_to_nonneg(const SignedWindow& w);

struct AlphaNormResult {
  double value = 0.0;      // (sum_t norm(theta_t)^alpha)^(1/alpha) over the window
  bool truncated = false;  // window has Outside::Unknown, so this is a lower bound
};

AlphaNormResult alpha_norm(const SpectralWindow& w, const Alpha& alpha, const NormSpec& spec);

/// Supremum of the norm sequence and the first time attaining it.
/// t_star is empty when the sup is not attained at an integer we can name:
/// the all-zero window (inf over an empty set) or unresolved risk flags.
struct Anchor {
  double theta_star = 0.0;
  std::optional<int> t_star;
  bool not_in_z_risk = false;  // Outside::Unknown window: sup may sit outside
};

Anchor anchor(const SpectralWindow& w, const NormSpec& spec);

/// Same window re-indexed by +shift: output time t holds input time t+shift.
SpectralWindow shift_window(const SpectralWindow& w, int shift);

}  // namespace tailstorm
