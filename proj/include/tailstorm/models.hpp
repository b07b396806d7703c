#pragma once

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "tailstorm/core.hpp"
#include "tailstorm/rng.hpp"

namespace tailstorm::models {

struct ModelFlags {
  bool claims_tcf = false;  // hypothesis: satisfies the time-change formula
  bool claims_sc = false;   // hypothesis: summable alpha-mass
  bool deterministic = false;
};

/// A named sampler of spectral-window realizations. Every emitted window has
/// norm(theta_0) == 1 (within 1e-12) and is clipped to the caller's bounds.
class SpectralModel {
 public:
  virtual ~SpectralModel() = default;

  const std::string& name() const { return name_; }
  int dim() const { return dim_; }
  const ModelFlags& flags() const { return flags_; }

  /// Draw one window on exactly [t_min, t_max]. Deterministic models do not
  /// consume rng state.
  virtual SpectralWindow sample(Rng& rng, int t_min, int t_max) const = 0;

  /// Almost-sure bound on norm(theta_t) over realizations (sup norm scale).
  virtual double norm_envelope(int t) const = 0;

  /// Radius R such that emitted windows carry (certified) all but a
  /// negligible share of the alpha-mass within [-R, R]. Only meaningful for
  /// claims_sc models.
  virtual int support_radius() const = 0;

  /// Declared bound on the alpha-mass fraction lost outside
  /// [-l_back, l_fwd], relative to the full alpha-mass.
  virtual double tail_alpha_mass(int l_back, int l_fwd) const = 0;

  /// True when clipping to [t_min, t_max] can lose support mass.
  bool clipping_loses_mass(int t_min, int t_max) const {
    return tail_alpha_mass(-t_min, t_max) > 0.0;
  }

  virtual nlohmann::ordered_json params() const { return nlohmann::ordered_json::object(); }

 protected:
  SpectralModel(std::string name, int dim, ModelFlags flags)
      : name_(std::move(name)), dim_(dim), flags_(flags) {}

  std::string name_;
  int dim_;
  ModelFlags flags_;
};

using ModelPtr = std::shared_ptr<const SpectralModel>;

/// Deterministic unit atom at time 0 (first coordinate for d > 1).
ModelPtr model_delta(int dim);

/// Deterministic 1 on even lags, 0 on odd lags. Satisfies the time-change
/// formula for every alpha but has infinite alpha-mass.
ModelPtr model_periodic();

/// Tail chain of the max-moving-average process sup_j phi^j Z_{t-j}:
/// backward extent J with P(J = j) = phi^(j alpha) (1 - phi^alpha) truncated
/// at j_max, values phi^t for t >= -J.
ModelPtr model_mma(double phi, const Alpha& alpha);

/// Negative control: theta_0 = 1, theta_1 = 2. Unit norm at 0 but violates
/// the time-change formula.
ModelPtr model_broken();

struct TableEntry {
  double probability = 0.0;
  SpectralWindow window;
};

/// Categorical mixture over user-supplied windows. Probabilities must sum to
/// one within 1e-9 and every window must have norm(theta_0) == 1.
/// `claims_tcf` stays a caller-declared hypothesis.
ModelPtr model_finite_table(std::vector<TableEntry> entries, const NormSpec& spec,
                            bool claims_tcf = false);

/// Build a catalog model from its CLI/config description.
ModelPtr model_from_json(const nlohmann::json& j, const Alpha& alpha, const NormSpec& spec);

/// Geometric truncation radius giving renormalization error below 1e-10.
int mma_j_max(double phi, const Alpha& alpha);

}  // namespace tailstorm::models
