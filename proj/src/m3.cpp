#include "tailstorm/m3.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tailstorm/stats.hpp"

namespace tailstorm::m3 {

namespace {

double min_cell(const PathWindow& z) {
  double m = std::numeric_limits<double>::infinity();
  for (double v : z.values) m = std::min(m, v);
  return m;
}

}  // namespace

PathWindow simulate_m3(const models::SpectralModel& model, const Alpha& alpha,
                       const NormSpec& spec, int t_min, int t_max, const StopPolicy& stop,
                       Rng& rng) {
  if (!model.flags().claims_sc)
    throw std::invalid_argument(
        "simulate_m3: model '" + model.name() +
        "' does not claim the summability condition required by the construction");
  if (t_min > t_max) throw std::invalid_argument("simulate_m3: empty window");
  const int radius = model.support_radius();
  const int span = t_max - t_min;
  // Shift z can matter only when the pattern support [-R, R] overlaps the
  // path window, i.e. z in [-R - t_max, R - t_min].
  const int z_lo = -radius - t_max;
  const int z_hi = radius - t_min;
  const double n_shifts = static_cast<double>(z_hi - z_lo + 1);
  const int pat_radius = radius + span;  // pattern coordinates that can be read
  const double inv_alpha = 1.0 / alpha.value();

  PathWindow z;
  z.t_min = t_min;
  z.t_max = t_max;
  z.dim = model.dim();
  z.values.assign(static_cast<std::size_t>(z.length()) * z.dim, 0.0);
  z.tag = "m3";
  z.cert.tail_alpha_mass = model.tail_alpha_mass(pat_radius, pat_radius);

  double gamma = 0.0;
  double m = 0.0;  // current minimum over cells
  std::uint64_t i = 0;
  while (true) {
    gamma += rng.exponential();
    const double u = std::pow(gamma / n_shifts, -inv_alpha);
    if (i >= stop.min_points) {
      if (u <= m) {  // no later mark can alter any cell
        z.cert.exact = true;
        z.cert.sup_error = 0.0;
        break;
      }
      if (m > 0.0 && u <= stop.epsilon * m) {
        z.cert.exact = false;
        z.cert.sup_error = u;
        break;
      }
      if (i >= stop.n_max) {
        z.cert.exact = false;
        z.cert.sup_error = u;
        if (m > 0.0 && u > stop.epsilon * m) {
          z.cert.points = i;
          throw TruncationError("simulate_m3: mark " + std::to_string(u) +
                                    " above requested tolerance at n_max",
                                std::move(z));
        }
        break;  // untouched cells: cap applies, certificate carries the bound
      }
    }
    ++i;
    const int shift = static_cast<int>(rng.uniform_int(z_lo, z_hi));
    SpectralWindow w = model.sample(rng, -pat_radius, pat_radius);
    const double an = alpha_norm(w, alpha, spec).value;
    if (!(an > 0.0)) continue;
    const double scale = u / an;
    bool touched_min = false;
    for (int t = t_min; t <= t_max; ++t) {
      const int c = t + shift;
      if (!w.covers(c)) continue;
      for (int comp = 0; comp < z.dim; ++comp) {
        const double v = scale * w.at(c, comp);
        double& cell = z.at(t, comp);
        if (v > cell) {
          if (cell <= m) touched_min = true;
          cell = v;
        }
      }
    }
    if (touched_min) m = min_cell(z);
  }
  z.cert.points = i;
  return z;
}

ThresholdGrid ThresholdGrid::uniform(int lag_min, int lag_max, int dim, double level) {
  ThresholdGrid g;
  g.lag_min = lag_min;
  g.lag_max = lag_max;
  g.dim = dim;
  g.x.assign(static_cast<std::size_t>(lag_max - lag_min + 1) * dim, level);
  return g;
}

FddResult fdd_cdf(const models::SpectralModel& model, const Alpha& alpha, const NormSpec& spec,
                  const ThresholdGrid& grid, std::size_t mc_budget, Rng& rng) {
  if (!model.flags().claims_sc)
    throw std::invalid_argument("fdd_cdf: model does not claim the summability condition");
  if (grid.dim != model.dim()) throw std::invalid_argument("fdd_cdf: dimension mismatch");
  bool any_finite = false;
  for (double v : grid.x) {
    if (v < 0.0) throw std::invalid_argument("fdd_cdf: thresholds must be >= 0");
    if (std::isfinite(v)) any_finite = true;
  }
  FddResult out;
  out.n = mc_budget;
  if (!any_finite) {  // maxima over an empty constraint set
    out.probability = 1.0;
    return out;
  }

  const int radius = model.support_radius();
  const int z_lo = -radius - grid.lag_max;
  const int z_hi = radius - grid.lag_min;
  const double a = alpha.value();

  double mean = 0.0, m2 = 0.0;
  std::size_t n_used = 0;
  bool hit_infinity = false;
  for (std::size_t r = 0; r < mc_budget; ++r) {
    SpectralWindow w = model.sample(rng, -radius, radius);
    const double an_pow = std::pow(alpha_norm(w, alpha, spec).value, a);
    double g = 0.0;
    for (int zshift = z_lo; zshift <= z_hi; ++zshift) {
      double ratio = 0.0;
      for (int lag = grid.lag_min; lag <= grid.lag_max; ++lag) {
        for (int comp = 0; comp < grid.dim; ++comp) {
          const double x = grid.at(lag, comp);
          if (!std::isfinite(x)) continue;
          const double th = w.value_at(lag + zshift, comp);
          if (th == 0.0) continue;
          if (x == 0.0) {
            hit_infinity = true;
            break;
          }
          ratio = std::max(ratio, th / x);
        }
        if (hit_infinity) break;
      }
      if (hit_infinity) break;
      if (ratio > 0.0) g += std::pow(ratio, a) / an_pow;
    }
    if (hit_infinity) break;
    ++n_used;
    const double d = g - mean;
    mean += d / static_cast<double>(n_used);
    m2 += d * (g - mean);
    if (model.flags().deterministic) break;  // inner expectation is exact
  }

  if (hit_infinity) {  // zero threshold where the model puts positive mass
    out.probability = 0.0;
    out.exponent = std::numeric_limits<double>::infinity();
    return out;
  }
  out.exponent = mean;
  out.exponent_se = n_used > 1 ? std::sqrt(m2 / (static_cast<double>(n_used) * (n_used - 1))) : 0.0;
  out.probability = std::exp(-mean);
  out.std_error = out.probability * out.exponent_se;
  out.n = n_used;
  return out;
}

nlohmann::ordered_json MaxStabilityResult::to_json() const {
  nlohmann::ordered_json j;
  j["k"] = k;
  j["verdict"] = pass ? "pass" : "fail";
  auto arr = nlohmann::ordered_json::array();
  for (const auto& c : cells) {
    arr.push_back({{"lag", c.lag},
                   {"threshold", c.threshold},
                   {"p_pow_k", c.p_pow_k},
                   {"p_scaled", c.p_scaled},
                   {"combined_se", c.combined_se},
                   {"pass", c.pass}});
  }
  j["cells"] = arr;
  return j;
}

MaxStabilityResult max_stability_check(const PathSource& source, const Alpha& alpha, int k,
                                       std::span<const int> probe_lags,
                                       std::span<const double> thresholds, std::size_t n,
                                       Rng& rng, double z) {
  if (k < 1) throw std::invalid_argument("max_stability_check: k >= 1");
  const double scale = std::pow(static_cast<double>(k), -1.0 / alpha.value());

  struct Counter {
    std::size_t base = 0;
    std::size_t scaled = 0;
  };
  std::vector<Counter> counts(probe_lags.size() * thresholds.size());

  auto tally = [&](bool scaled_batch) {
    for (std::size_t r = 0; r < n; ++r) {
      PathWindow path = source(rng);
      std::size_t cell = 0;
      for (int lag : probe_lags)
        for (double x : thresholds) {
          const double level = scaled_batch ? scale * x : x;
          bool below = true;
          for (int comp = 0; comp < path.dim && below; ++comp)
            below = path.at(lag, comp) <= level;
          if (below) scaled_batch ? ++counts[cell].scaled : ++counts[cell].base;
          ++cell;
        }
    }
  };
  tally(false);
  tally(true);

  MaxStabilityResult out;
  out.k = k;
  out.pass = true;
  std::size_t cell = 0;
  const double nn = static_cast<double>(n);
  for (int lag : probe_lags)
    for (double x : thresholds) {
      const double p1 = static_cast<double>(counts[cell].base) / nn;
      const double p2 = static_cast<double>(counts[cell].scaled) / nn;
      MaxStabilityCell c;
      c.lag = lag;
      c.threshold = x;
      c.p_pow_k = std::pow(p1, k);
      c.p_scaled = p2;
      const double se1 = std::sqrt(p1 * (1.0 - p1) / nn);
      const double se2 = std::sqrt(p2 * (1.0 - p2) / nn);
      const double se_pow = k * std::pow(p1, k - 1) * se1;  // delta method
      c.combined_se = std::sqrt(se_pow * se_pow + se2 * se2);
      c.pass = std::abs(c.p_pow_k - c.p_scaled) <= z * c.combined_se;
      out.pass = out.pass && c.pass;
      out.cells.push_back(c);
      ++cell;
    }
  return out;
}

LimitMeasureResult limit_measure_probe(const models::SpectralModel& model, const Alpha& alpha,
                                       const NormSpec& spec, const RadialSet& set,
                                       std::size_t mc_budget, Rng& rng) {
  if (!model.flags().claims_sc)
    throw std::invalid_argument("limit_measure_probe: model does not claim summability");
  if (set.atoms.empty())
    throw std::invalid_argument("limit_measure_probe: set not bounded away from 0");
  bool bounded_away = false;
  int lag_lo = 0, lag_hi = 0;
  for (const auto& atom : set.atoms) {
    if (atom.level > 0.0) bounded_away = true;
    lag_lo = std::min(lag_lo, atom.lag);
    lag_hi = std::max(lag_hi, atom.lag);
    if (atom.comp >= model.dim())
      throw std::invalid_argument("limit_measure_probe: component out of range");
  }
  if (!bounded_away)
    throw std::invalid_argument("limit_measure_probe: set not bounded away from 0");

  const int radius = model.support_radius();
  const int z_lo = -radius - lag_hi;
  const int z_hi = radius - lag_lo;
  const double a = alpha.value();

  double mean = 0.0, m2 = 0.0;
  std::size_t n_used = 0;
  for (std::size_t r = 0; r < mc_budget; ++r) {
    SpectralWindow w = model.sample(rng, -radius, radius);
    const double an = alpha_norm(w, alpha, spec).value;
    double g = 0.0;
    for (int zshift = z_lo; zshift <= z_hi; ++zshift) {
      // Radial measure of { v : v * Theta_{.+z} / alpha_norm  in set }.
      double v_lo = 0.0;
      bool feasible = true;
      for (const auto& atom : set.atoms) {
        const int c = atom.lag + zshift;
        const double th = atom.comp < 0 ? w.norm_at(c, spec) / an
                                        : w.value_at(c, atom.comp) / an;
        if (th <= 0.0) {
          feasible = atom.level < 0.0;
          if (!feasible) break;
          continue;
        }
        v_lo = std::max(v_lo, atom.level / th);
      }
      if (!feasible) continue;
      g += v_lo > 0.0 ? std::pow(v_lo, -a) : std::numeric_limits<double>::infinity();
    }
    ++n_used;
    const double d = g - mean;
    mean += d / static_cast<double>(n_used);
    m2 += d * (g - mean);
    if (model.flags().deterministic) break;
  }

  LimitMeasureResult out;
  out.value = mean;
  out.std_error = n_used > 1 ? std::sqrt(m2 / (static_cast<double>(n_used) * (n_used - 1))) : 0.0;
  out.n = n_used;
  return out;
}

}  // namespace tailstorm::m3
