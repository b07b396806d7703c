#include "tailstorm/general.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace tailstorm::general {

void q_coverage(int j, int& lo, int& hi) {
  if (j >= 0) {
    lo = 0;
    hi = 2 * j;
  } else {
    lo = 2 * j + 1;
    hi = 0;
  }
}

namespace {

bool vec_is_zero(const SpectralWindow& w, int t, double tol) {
  for (int c = 0; c < w.dim(); ++c)
    if (std::abs(w.at(t, c)) > tol) return false;
  return true;
}

}  // namespace

bool q_membership(const SpectralWindow& w, int j, double zero_tol) {
  int lo, hi;
  q_coverage(j, lo, hi);
  if (!w.covers(lo) || !w.covers(hi))
    throw std::invalid_argument("q_membership: window does not cover Q_" + std::to_string(j) +
                                " (needs [" + std::to_string(lo) + "," + std::to_string(hi) + "])");
  if (vec_is_zero(w, 0, zero_tol)) return false;
  if (j > 0) {
    for (int t = 1; t <= 2 * j; ++t)
      if (!vec_is_zero(w, t, zero_tol)) return false;
  } else if (j < 0) {
    for (int t = 2 * j + 1; t <= -1; ++t)
      if (!vec_is_zero(w, t, zero_tol)) return false;
  }
  return true;
}

std::vector<QjMass> estimate_qj_mass(const models::SpectralModel& model, int j_abs_max,
                                     std::size_t n, Rng& rng) {
  const int lo = -2 * j_abs_max + 1;
  const int hi = 2 * j_abs_max;
  const std::size_t n_eff = model.flags().deterministic ? 1 : n;
  std::vector<std::size_t> hits(2 * j_abs_max + 1, 0);
  for (std::size_t r = 0; r < n_eff; ++r) {
    SpectralWindow w = model.sample(rng, std::min(lo, 0), std::max(hi, 0));
    for (int j = -j_abs_max; j <= j_abs_max; ++j)
      if (q_membership(w, j)) ++hits[j + j_abs_max];
  }
  std::vector<QjMass> out;
  for (int j = -j_abs_max; j <= j_abs_max; ++j) {
    QjMass q;
    q.j = j;
    q.p_hat = static_cast<double>(hits[j + j_abs_max]) / static_cast<double>(n_eff);
    q.se = model.flags().deterministic
               ? 0.0
               : std::sqrt(q.p_hat * (1.0 - q.p_hat) / static_cast<double>(n_eff));
    q.zero_observed = hits[j + j_abs_max] == 0;
    out.push_back(q);
  }
  return out;
}

namespace {

// Almost-sure bound on a member pattern's norm at coordinate t: the model
// envelope with the Q_j-forced zeros applied.
double member_envelope(const models::SpectralModel& model, int j, int t) {
  if (j > 0 && t >= 1 && t <= 2 * j) return 0.0;
  if (j < 0 && t >= 2 * j + 1 && t <= -1) return 0.0;
  return model.norm_envelope(t);
}

}  // namespace

m3::PathWindow simulate_general(const models::SpectralModel& model, const Alpha& alpha,
                                const NormSpec& spec, int t_min, int t_max, int j_cap,
                                const m3::StopPolicy& stop, Rng& rng) {
  if (t_min > t_max) throw std::invalid_argument("simulate_general: empty window");

  m3::PathWindow z;
  z.t_min = t_min;
  z.t_max = t_max;
  z.dim = model.dim();
  z.values.assign(static_cast<std::size_t>(z.length()) * z.dim, 0.0);
  z.tag = "general";

  // Stream j reads pattern coordinates [t_min + j, t_max + j]; it can
  // contribute only if the member envelope is positive somewhere there.
  // Streams with |j| >= max(|t_min|, t_max) + 1 have every readable
  // coordinate forced to zero by Q_j, so the scan below is exhaustive.
  struct Stream {
    int j = 0;
    double h = 0.0;  // a.s. bound on member contributions to the path
    int cov_lo = 0, cov_hi = 0;
  };
  std::vector<Stream> streams;
  std::vector<std::pair<int, double>> omitted_streams;  // (j, envelope bound)
  const int j_reach = std::max(std::abs(t_min), std::abs(t_max)) + 1;
  for (int j = -j_reach; j <= j_reach; ++j) {
    double h = 0.0;
    for (int t = t_min; t <= t_max; ++t) h = std::max(h, member_envelope(model, j, t + j));
    if (h <= 0.0) continue;
    if (std::abs(j) > j_cap) {
      omitted_streams.emplace_back(j, h);
      continue;
    }
    Stream s;
    s.j = j;
    s.h = h;
    q_coverage(j, s.cov_lo, s.cov_hi);
    streams.push_back(s);
  }

  // Omitted streams are certified by their exponent-measure contribution:
  // P(Q_j) times the envelope bound to the power alpha.
  if (!omitted_streams.empty()) {
    int j_abs = 0;
    for (const auto& [j, h] : omitted_streams) j_abs = std::max(j_abs, std::abs(j));
    const auto mass_table = estimate_qj_mass(model, j_abs, 2000, rng);
    double omitted = 0.0;
    for (const auto& [j, h] : omitted_streams)
      omitted += mass_table[j + j_abs].p_hat * std::pow(h, alpha.value());
    z.cert.tail_alpha_mass = omitted;
  }

  // Deterministic models: membership is a property of the single pattern,
  // so streams that can never accept are dropped up front.
  if (model.flags().deterministic) {
    std::vector<Stream> kept;
    for (const auto& s : streams) {
      const int lo = std::min({s.cov_lo, t_min + s.j, 0});
      const int hi = std::max({s.cov_hi, t_max + s.j, 0});
      SpectralWindow w = model.sample(rng, lo, hi);
      if (q_membership(w, s.j)) kept.push_back(s);
    }
    streams = std::move(kept);
  }

  const double inv_alpha = 1.0 / alpha.value();
  double m = 0.0;  // current minimum over path cells
  std::uint64_t total_points = 0;
  bool all_exact = true;

  for (const auto& s : streams) {
    const int lo = std::min({s.cov_lo, t_min + s.j, 0});
    const int hi = std::max({s.cov_hi, t_max + s.j, 0});
    double gamma = 0.0;
    std::uint64_t i = 0;
    while (true) {
      gamma += rng.exponential();
      const double u = std::pow(gamma, -inv_alpha);
      if (i >= stop.min_points) {
        if (u * s.h <= m) break;  // exact: no member atom can alter the path
        if (i >= stop.n_max) {
          all_exact = false;
          z.cert.sup_error = std::max(z.cert.sup_error, u * s.h);
          if (m > 0.0 && u * s.h > stop.epsilon * m) {
            z.cert.points = total_points + i;
            z.cert.exact = false;
            throw m3::TruncationError("simulate_general: stream " + std::to_string(s.j) +
                                          " above requested tolerance at n_max",
                                      std::move(z));
          }
          break;
        }
      }
      ++i;
      SpectralWindow w = model.sample(rng, lo, hi);
      if (!q_membership(w, s.j)) continue;  // mark consumed, atom discarded
      bool touched_min = false;
      for (int t = t_min; t <= t_max; ++t) {
        const int c = t + s.j;
        if (!w.covers(c)) continue;
        for (int comp = 0; comp < z.dim; ++comp) {
          const double v = u * w.at(c, comp);
          double& cell = z.at(t, comp);
          if (v > cell) {
            if (cell <= m) touched_min = true;
            cell = v;
          }
        }
      }
      if (touched_min) {
        m = std::numeric_limits<double>::infinity();
        for (double v : z.values) m = std::min(m, v);
      }
    }
    total_points += i;
  }
  z.cert.points = total_points;
  z.cert.exact = all_exact && omitted == 0.0;
  return z;
}

}  // namespace tailstorm::general
