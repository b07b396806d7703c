#include "tailstorm/models.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace tailstorm::models {

namespace {

class DeltaModel final : public SpectralModel {
 public:
  explicit DeltaModel(int dim)
      : SpectralModel("delta", dim, {.claims_tcf = true, .claims_sc = true, .deterministic = true}) {
    if (dim < 1) throw std::invalid_argument("model_delta: dim >= 1");
  }

  SpectralWindow sample(Rng&, int t_min, int t_max) const override {
    SpectralWindow w(t_min, t_max, dim_, Outside::Zero);
    w.at(0, 0) = 1.0;
    w.set_normalized(true);
    return w;
  }

  double norm_envelope(int t) const override { return t == 0 ? 1.0 : 0.0; }
  int support_radius() const override { return 0; }
  double tail_alpha_mass(int, int) const override { return 0.0; }
};

class PeriodicModel final : public SpectralModel {
 public:
  PeriodicModel()
      : SpectralModel("periodic", 1,
                      {.claims_tcf = true, .claims_sc = false, .deterministic = true}) {}

  SpectralWindow sample(Rng&, int t_min, int t_max) const override {
    SpectralWindow w(t_min, t_max, 1, Outside::Unknown);
    for (int t = t_min; t <= t_max; ++t)
      if (((t % 2) + 2) % 2 == 0) w.at(t, 0) = 1.0;
    w.set_normalized(true);
    return w;
  }

  double norm_envelope(int t) const override { return ((t % 2) + 2) % 2 == 0 ? 1.0 : 0.0; }
  int support_radius() const override {
    throw std::domain_error("model_periodic: no finite support radius (not summable)");
  }
  double tail_alpha_mass(int, int) const override {
    return std::numeric_limits<double>::infinity();
  }
};

class MmaModel final : public SpectralModel {
 public:
  MmaModel(double phi, const Alpha& alpha)
      : SpectralModel("mma", 1, {.claims_tcf = true, .claims_sc = true, .deterministic = false}),
        phi_(phi),
        alpha_(alpha.value()),
        q_(std::pow(phi, alpha.value())),
        j_max_(mma_j_max(phi, alpha)) {
    if (!(phi > 0.0 && phi < 1.0)) throw std::invalid_argument("model_mma: phi in (0,1)");
  }

  SpectralWindow sample(Rng& rng, int t_min, int t_max) const override {
    const int j = rng.truncated_geometric(q_, j_max_);
    SpectralWindow w(t_min, t_max, 1, Outside::Zero);
    // phi^t for t >= -J, built multiplicatively outward from t = 0.
    double v = 1.0;
    for (int t = 0; t <= t_max; ++t) {
      w.at(t, 0) = v;
      v *= phi_;
    }
    v = 1.0;
    const int back = std::min(j, -t_min);
    for (int t = -1; t >= -back; --t) {
      v /= phi_;
      w.at(t, 0) = v;
    }
    w.set_normalized(true);
    return w;
  }

  double norm_envelope(int t) const override {
    if (t < -j_max_) return 0.0;
    return std::pow(phi_, t);
  }

  int support_radius() const override { return j_max_; }

  double tail_alpha_mass(int l_back, int l_fwd) const override {
    const double geo = 1.0 - q_;
    double mass = 0.0;
    if (l_back < j_max_) mass += std::pow(q_, static_cast<double>(l_back)) / geo;
    mass += std::pow(q_, static_cast<double>(l_fwd)) / geo;
    return mass;
  }

  nlohmann::ordered_json params() const override {
    return {{"phi", phi_}, {"j_max", j_max_}};
  }

 private:
  double phi_;
  double alpha_;
  double q_;  // phi^alpha
  int j_max_;
};

class BrokenModel final : public SpectralModel {
 public:
  BrokenModel()
      : SpectralModel("broken", 1,
                      {.claims_tcf = false, .claims_sc = true, .deterministic = true}) {}

  SpectralWindow sample(Rng&, int t_min, int t_max) const override {
    SpectralWindow w(t_min, t_max, 1, Outside::Zero);
    w.at(0, 0) = 1.0;
    if (t_max >= 1) w.at(1, 0) = 2.0;
    w.set_normalized(true);
    return w;
  }

  double norm_envelope(int t) const override {
    if (t == 0) return 1.0;
    if (t == 1) return 2.0;
    return 0.0;
  }
  int support_radius() const override { return 1; }
  double tail_alpha_mass(int, int l_fwd) const override { return l_fwd >= 1 ? 0.0 : 1.0; }
};

class FiniteTableModel final : public SpectralModel {
 public:
  FiniteTableModel(std::vector<TableEntry> entries, const NormSpec& spec, bool claims_tcf)
      : SpectralModel("finite_table", entries.empty() ? 1 : entries.front().window.dim(),
                      {.claims_tcf = claims_tcf, .claims_sc = true,
                       .deterministic = entries.size() == 1}),
        entries_(std::move(entries)) {
    if (entries_.empty()) throw std::invalid_argument("model_finite_table: no entries");
    double total = 0.0;
    radius_ = 0;
    for (const auto& e : entries_) {
      if (e.probability < 0.0)
        throw std::invalid_argument("model_finite_table: negative probability");
      total += e.probability;
      if (e.window.dim() != dim_)
        throw std::invalid_argument("model_finite_table: inconsistent dimensions");
      if (e.window.outside() != Outside::Zero)
        throw std::invalid_argument("model_finite_table: windows must have Zero outside semantics");
      if (std::abs(norm(e.window.vec(0), spec) - 1.0) > 1e-12)
        throw std::invalid_argument("model_finite_table: window with norm(theta_0) != 1");
      radius_ = std::max({radius_, -e.window.t_min(), e.window.t_max()});
    }
    if (std::abs(total - 1.0) > 1e-9)
      throw std::invalid_argument("model_finite_table: probabilities must sum to 1");
    cumulative_.reserve(entries_.size());
    double c = 0.0;
    for (const auto& e : entries_) {
      c += e.probability;
      cumulative_.push_back(c);
    }
    cumulative_.back() = 1.0;
    envelope_.assign(2 * radius_ + 1, 0.0);
    for (const auto& e : entries_)
      for (int t = e.window.t_min(); t <= e.window.t_max(); ++t)
        envelope_[t + radius_] = std::max(envelope_[t + radius_], norm(e.window.vec(t), spec));
  }

  SpectralWindow sample(Rng& rng, int t_min, int t_max) const override {
    std::size_t k = 0;
    if (entries_.size() > 1) {
      const double u = rng.uniform01();
      while (k + 1 < entries_.size() && u >= cumulative_[k]) ++k;
    }
    const SpectralWindow& src = entries_[k].window;
    SpectralWindow w(t_min, t_max, dim_, Outside::Zero);
    for (int t = std::max(t_min, src.t_min()); t <= std::min(t_max, src.t_max()); ++t)
      for (int c = 0; c < dim_; ++c) w.at(t, c) = src.at(t, c);
    w.set_normalized(true);
    return w;
  }

  double norm_envelope(int t) const override {
    if (t < -radius_ || t > radius_) return 0.0;
    return envelope_[t + radius_];
  }
  int support_radius() const override { return radius_; }
  double tail_alpha_mass(int l_back, int l_fwd) const override {
    return (l_back >= radius_ && l_fwd >= radius_) ? 0.0 : 1.0;
  }

 private:
  std::vector<TableEntry> entries_;
  std::vector<double> cumulative_;
  std::vector<double> envelope_;
  int radius_ = 0;
};

}  // namespace

ModelPtr model_delta(int dim) { return std::make_shared<DeltaModel>(dim); }
ModelPtr model_periodic() { return std::make_shared<PeriodicModel>(); }
ModelPtr model_mma(double phi, const Alpha& alpha) {
  return std::make_shared<MmaModel>(phi, alpha);
}
ModelPtr model_broken() { return std::make_shared<BrokenModel>(); }
ModelPtr model_finite_table(std::vector<TableEntry> entries, const NormSpec& spec,
                            bool claims_tcf) {
  return std::make_shared<FiniteTableModel>(std::move(entries), spec, claims_tcf);
}

int mma_j_max(double phi, const Alpha& alpha) {
  // ceil(-10 ln 10 / (alpha ln phi)): renormalization error below 1e-10.
  return static_cast<int>(std::ceil(-10.0 * std::log(10.0) / (alpha.value() * std::log(phi))));
}

ModelPtr model_from_json(const nlohmann::json& j, const Alpha& alpha, const NormSpec& spec) {
  const std::string name = j.at("name").get<std::string>();
  if (name == "delta") return model_delta(j.value("dim", 1));
  if (name == "periodic") return model_periodic();
  if (name == "mma") return model_mma(j.at("phi").get<double>(), alpha);
  if (name == "broken") return model_broken();
  if (name == "finite_table") {
    std::vector<TableEntry> entries;
    for (const auto& e : j.at("entries")) {
      const int t_min = e.at("t_min").get<int>();
      const auto rows = e.at("values");
      const int t_max = t_min + static_cast<int>(rows.size()) - 1;
      const int dim = static_cast<int>(rows.front().size());
      SpectralWindow w(t_min, t_max, dim, Outside::Zero);
      for (int t = t_min; t <= t_max; ++t)
        for (int c = 0; c < dim; ++c) w.at(t, c) = rows[t - t_min][c].get<double>();
      entries.push_back({e.at("prob").get<double>(), std::move(w)});
    }
    return model_finite_table(std::move(entries), spec, j.value("claims_tcf", false));
  }
  throw std::invalid_argument("unknown model: " + name);
}

}  // namespace tailstorm::models
