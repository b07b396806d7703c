#pragma once

#include <vector>

#include "tailstorm/m3.hpp"
#include "tailstorm/models.hpp"

namespace tailstorm::general {

/// Exact-zero pattern sets indexed by the stream shift:
///   Q_0     = { theta_0 != 0 }
///   Q_k     = { theta_0 != 0, theta_1 = ... = theta_2k = 0 },  k > 0
///   Q_{-k}  = { theta_{-2k+1} = ... = theta_{-1} = 0, theta_0 != 0 }.
/// Zero tests compare against `zero_tol` (exact zeros by default; catalog
/// models emit exact zeros).
bool q_membership(const SpectralWindow& w, int j, double zero_tol = 0.0);

/// Window coverage the predicate needs: [0, 2j] for j > 0, [-2|j|+1, 0] for
/// j < 0, {0} for j = 0.
void q_coverage(int j, int& lo, int& hi);

struct QjMass {
  int j = 0;
  double p_hat = 0.0;
  double se = 0.0;
  bool zero_observed = false;
};

/// Empirical P(Theta in Q_j) for |j| <= j_abs_max.
std::vector<QjMass> estimate_qj_mass(const models::SpectralModel& model, int j_abs_max,
                                     std::size_t n, Rng& rng);

/// Construction for processes that satisfy the time-change formula without
/// summability: independent descending-mark Poisson streams per shift j, each
/// atom thinned by Q_j membership, contributing u * Theta_{t+j}.
/// Marks advance on every draw whether or not the atom is accepted, so the
/// retained atoms realize exactly the Q_j-restricted intensity. Streams stop
/// once their next mark times an almost-sure envelope of member patterns
/// cannot alter the path.
m3::PathWindow simulate_general(const models::SpectralModel& model, const Alpha& alpha,
                                const NormSpec& spec, int t_min, int t_max, int j_cap,
                                const m3::StopPolicy& stop, Rng& rng);

}  // namespace tailstorm::general
