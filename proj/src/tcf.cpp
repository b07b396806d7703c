#include "tailstorm/tcf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace tailstorm::tcf {

namespace {

double clip01(double x) { return std::min(x, 1.0); }

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Running mean/variance accumulator.
struct MeanVar {
  double mean = 0.0, m2 = 0.0;
  std::size_t n = 0;
  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }
  double se() const { return n > 1 ? std::sqrt(m2 / (static_cast<double>(n) * (n - 1))) : 0.0; }
};

}  // namespace

std::vector<TestFunction> default_f_family(int s, int t, int dim, const NormSpec& spec) {
  if (s > 0 || t < 0) throw std::invalid_argument("default_f_family: need s <= 0 <= t");
  (void)dim;
  std::vector<TestFunction> fs;
  auto g0 = [spec](const LagBlock& b) { return clip01(b.norm_at(0, spec)); };
  for (int l = s; l <= t; ++l) {
    fs.push_back({"clip_norm@" + std::to_string(l), s, t, 1.0,
                  [l, spec, g0](const LagBlock& b) { return g0(b) * clip01(b.norm_at(l, spec)); }});
    fs.push_back({"halfspace@" + std::to_string(l), s, t, 1.0,
                  [l, spec, g0](const LagBlock& b) {
                    return g0(b) * logistic(4.0 * (b.norm_at(l, spec) - 0.5));
                  }});
    fs.push_back({"bump@" + std::to_string(l), s, t, 1.0, [l, spec, g0](const LagBlock& b) {
                    const double d = b.norm_at(l, spec) - 1.0;
                    return g0(b) * std::exp(-d * d / 0.08);
                  }});
  }
  fs.push_back({"vanish_factor", s, t, 1.0, [g0](const LagBlock& b) { return g0(b); }});
  fs.push_back({"exp_sum", s, t, 1.0, [s, t, spec, g0](const LagBlock& b) {
                  double sum = 0.0;
                  for (int l = s; l <= t; ++l) sum += b.norm_at(l, spec);
                  return g0(b) * std::exp(-sum);
                }});
  fs.push_back({"clip_window_max", s, t, 1.0, [s, t, spec, g0](const LagBlock& b) {
                  double m = 0.0;
                  for (int l = s; l <= t; ++l) m = std::max(m, b.norm_at(l, spec));
                  return g0(b) * std::min(m, 2.0) / 2.0;
                }});
  return fs;
}

void require_vanishing_at_zero(const TestFunction& f, int dim) {
  Rng probe_rng(0x7a11f0c5u);
  for (int rep = 0; rep < 16; ++rep) {
    LagBlock b(f.lag_min, f.lag_max, dim);
    for (int l = f.lag_min; l <= f.lag_max; ++l) {
      if (l == 0) continue;
      for (int c = 0; c < dim; ++c) b.at(l, c) = 4.0 * probe_rng.uniform01();
    }
    if (std::abs(f.eval(b)) > 1e-12)
      throw std::invalid_argument("test function '" + f.id + "' does not vanish at theta_0 = 0");
  }
}

TestReport tcf_residual(const models::SpectralModel& model, const TestFunction& f, int i,
                        const Alpha& alpha, const NormSpec& spec, std::size_t n, Rng& rng,
                        double z_threshold) {
  if (n < 100) throw std::invalid_argument("tcf_residual: need n >= 100");
  require_vanishing_at_zero(f, model.dim());
  const int s = f.lag_min, t = f.lag_max;
  const int lo = std::min({s - i, s, i, 0});
  const int hi = std::max({t - i, t, i, 0});
  const std::size_t n_eff = model.flags().deterministic ? 1 : n;
  const int dim = model.dim();

  // Left side: f evaluated on the window shifted by i.
  MeanVar lhs;
  for (std::size_t r = 0; r < n_eff; ++r) {
    SpectralWindow w = model.sample(rng, lo, hi);
    LagBlock b(s, t, dim);
    for (int l = s; l <= t; ++l)
      for (int c = 0; c < dim; ++c) b.at(l, c) = w.value_at(l - i, c);
    lhs.add(f.eval(b));
  }
  // Right side: rescaled window, weighted by norm(Theta_i)^alpha.
  MeanVar rhs;
  double max_weight = 0.0;
  for (std::size_t r = 0; r < n_eff; ++r) {
    SpectralWindow w = model.sample(rng, lo, hi);
    const double wi = w.norm_at(i, spec);
    double val = 0.0;
    if (wi > 0.0) {
      LagBlock b(s, t, dim);
      for (int l = s; l <= t; ++l)
        for (int c = 0; c < dim; ++c) b.at(l, c) = w.value_at(l, c) / wi;
      const double weight = std::pow(wi, alpha.value());
      val = f.eval(b) * weight;
      max_weight = std::max(max_weight, weight);
    }
    rhs.add(val);
  }

  const double diff = lhs.mean - rhs.mean;
  const double se = std::sqrt(lhs.se() * lhs.se() + rhs.se() * rhs.se());

  TestReport rep;
  rep.id = "tcf_residual:" + f.id + "@i=" + std::to_string(i);
  rep.statistic = diff;
  rep.reference = "paired MC normal-z";
  rep.z_score = se > 0.0 ? diff / se : (diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
  rep.threshold = z_threshold;
  rep.pass = std::abs(diff) <= z_threshold * se;
  rep.n_used["n_lhs"] = static_cast<double>(n_eff);
  rep.n_used["n_rhs"] = static_cast<double>(n_eff);
  rep.n_used["max_weight"] = max_weight;
  if (rhs.mean != 0.0 && rhs.se() > 0.25 * std::abs(rhs.mean))
    rep.notes.push_back("heavy weight tail: relative SE of weighted side = " +
                        std::to_string(rhs.se() / std::abs(rhs.mean)));
  return rep;
}

BatteryResult tcf_battery(const models::SpectralModel& model, int s, int t,
                          std::span<const int> shifts, const Alpha& alpha, const NormSpec& spec,
                          std::size_t n, Rng& rng, double z_threshold) {
  const auto family = default_f_family(s, t, model.dim(), spec);
  const std::size_t m = family.size() * shifts.size();
  // Battery verdict keeps the per-test two-sided level of z_threshold but
  // splits it across the m members.
  const double per_test_tail = (1.0 - stats::normal_cdf(z_threshold)) / static_cast<double>(m);
  const double z_adj = stats::normal_quantile(1.0 - per_test_tail);

  BatteryResult out;
  out.z_adjusted = z_adj;
  out.pass = true;
  for (int i : shifts)
    for (const auto& f : family) {
      TestReport r = tcf_residual(model, f, i, alpha, spec, n, rng, z_adj);
      out.pass = out.pass && r.pass;
      out.reports.push_back(std::move(r));
    }
  return out;
}

SpectralWindow random_shift(const SpectralWindow& w, const Alpha& alpha, const NormSpec& spec,
                            Rng& rng) {
  if (w.outside() == Outside::Unknown)
    throw std::invalid_argument("random_shift: shift weights need Outside::Zero semantics");
  std::vector<double> weights(w.length());
  double total = 0.0;
  for (int t = w.t_min(); t <= w.t_max(); ++t) {
    const double nt = norm(w.vec(t), spec);
    total += std::pow(nt, alpha.value());
    weights[t - w.t_min()] = total;
  }
  if (!(total > 0.0)) throw std::invalid_argument("random_shift: window has zero alpha-mass");
  const double u = rng.uniform01() * total;
  int k = w.t_min();
  while (k < w.t_max() && weights[k - w.t_min()] <= u) ++k;

  const double nk = norm(w.vec(k), spec);
  SpectralWindow out(w.t_min() - k, w.t_max() - k, w.dim(), Outside::Zero);
  for (int t = out.t_min(); t <= out.t_max(); ++t)
    for (int c = 0; c < w.dim(); ++c) out.at(t, c) = w.at(t + k, c) / nk;
  out.set_normalized(true);
  return out;
}

RsInvarianceResult rs_invariance_test(const models::SpectralModel& model, const Alpha& alpha,
                                      const NormSpec& spec, int s, int t, std::size_t n,
                                      int permutations, double p_threshold, Rng& rng) {
  if (!model.flags().claims_sc)
    throw std::invalid_argument("rs_invariance_test: model does not claim summability");
  const int radius = model.support_radius();
  const int lo = s - radius, hi = t + radius;
  const int lags = t - s + 1;

  stats::SampleMatrix base_feat, shifted_feat;
  std::vector<std::vector<double>> base_norms(lags), shifted_norms(lags);
  std::vector<double> feat(lags);

  for (std::size_t r = 0; r < n; ++r) {
    SpectralWindow w = model.sample(rng, lo, hi);
    for (int l = s; l <= t; ++l) {
      const double nl = w.norm_at(l, spec);
      base_norms[l - s].push_back(nl);
      feat[l - s] = std::log1p(nl);
    }
    base_feat.push_row(feat);
  }
  for (std::size_t r = 0; r < n; ++r) {
    SpectralWindow w = random_shift(model.sample(rng, lo, hi), alpha, spec, rng);
    for (int l = s; l <= t; ++l) {
      const double nl = w.norm_at(l, spec);
      shifted_norms[l - s].push_back(nl);
      feat[l - s] = std::log1p(nl);
    }
    shifted_feat.push_row(feat);
  }

  RsInvarianceResult out;
  const double adj = p_threshold / static_cast<double>(lags + 1);
  out.pass = true;
  for (int l = 0; l < lags; ++l) {
    TestReport r = stats::ks_two_sample(base_norms[l], shifted_norms[l], adj);
    r.id = "rs_marginal_ks@" + std::to_string(s + l);
    r.notes.push_back("bonferroni-adjusted threshold over " + std::to_string(lags + 1) + " tests");
    out.pass = out.pass && r.pass;
    out.marginal_ks.push_back(std::move(r));
  }
  out.joint_energy = stats::energy_test(base_feat, shifted_feat, permutations, rng, adj);
  out.joint_energy.id = "rs_joint_energy";
  out.pass = out.pass && out.joint_energy.pass;
  return out;
}

nlohmann::ordered_json ScDiagnostic::to_json() const {
  nlohmann::ordered_json j;
  j["divergence_thresholds"] = divergence_thresholds;
  j["divergence_fraction"] = divergence_fraction;
  j["growth_ratio_median"] = growth_ratio_median;
  j["tail_max_median"] = tail_max_median;
  j["tail_max_q95"] = tail_max_q95;
  j["interior_anchor_fraction"] = interior_anchor_fraction;
  j["decay_tolerance"] = decay_tolerance;
  j["interior_tolerance"] = interior_tolerance;
  j["verdict"] = sc_consistent ? "sc-consistent" : "sc-inconsistent";
  return j;
}

ScDiagnostic sc_diagnostic(const models::SpectralModel& model, const Alpha& alpha,
                           const NormSpec& spec, int horizon, std::size_t n, Rng& rng) {
  if (horizon < 4) throw std::invalid_argument("sc_diagnostic: horizon >= 4");
  const int half = horizon / 2;
  const std::size_t n_eff = model.flags().deterministic ? 1 : n;

  ScDiagnostic d;
  d.divergence_thresholds = {1.0, 2.0, 4.0, 8.0, 16.0};
  std::vector<std::size_t> exceed(d.divergence_thresholds.size(), 0);
  std::vector<double> ratios, tail_maxes;
  std::size_t interior = 0;

  for (std::size_t r = 0; r < n_eff; ++r) {
    SpectralWindow w = model.sample(rng, -horizon, horizon);
    double full = 0.0, inner = 0.0, tail_max = 0.0;
    for (int t = -horizon; t <= horizon; ++t) {
      const double nt = norm(w.vec(t), spec);
      const double pw = std::pow(nt, alpha.value());
      full += pw;
      if (std::abs(t) <= half) inner += pw;
      if (std::abs(t) >= half) tail_max = std::max(tail_max, nt);
    }
    for (std::size_t i = 0; i < d.divergence_thresholds.size(); ++i)
      if (full > d.divergence_thresholds[i]) ++exceed[i];
    ratios.push_back(inner > 0.0 ? full / inner : std::numeric_limits<double>::infinity());
    tail_maxes.push_back(tail_max);
    const Anchor a = anchor(w, spec);
    if (a.t_star && std::abs(*a.t_star) < half) ++interior;
  }

  auto quantile = [](std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    const std::size_t k = std::min(v.size() - 1, static_cast<std::size_t>(q * v.size()));
    return v[k];
  };
  for (std::size_t i = 0; i < exceed.size(); ++i)
    d.divergence_fraction.push_back(static_cast<double>(exceed[i]) / n_eff);
  d.growth_ratio_median = quantile(ratios, 0.5);
  d.tail_max_median = quantile(tail_maxes, 0.5);
  d.tail_max_q95 = quantile(tail_maxes, 0.95);
  d.interior_anchor_fraction = static_cast<double>(interior) / n_eff;
  d.sc_consistent =
      d.tail_max_q95 <= d.decay_tolerance && d.interior_anchor_fraction >= d.interior_tolerance;
  return d;
}

}  // namespace tailstorm::tcf
