#include "tailstorm/core.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tailstorm {

Alpha::Alpha(double value) : value_(value) {
  if (!(std::isfinite(value) && value > 0.0))
    throw std::invalid_argument("Alpha: tail index must be finite and > 0");
}

NormSpec NormSpec::lp(double p) {
  if (!(std::isfinite(p) && p >= 1.0))
    throw std::invalid_argument("NormSpec: Lp requires p >= 1");
  return {NormKind::Lp, p};
}

std::string NormSpec::str() const {
  switch (kind) {
    case NormKind::Sup: return "sup";
    case NormKind::L1: return "l1";
    case NormKind::Lp: return "lp(" + std::to_string(p) + ")";
  }
  return "?";
}

double norm(std::span<const double> v, const NormSpec& spec) {
  switch (spec.kind) {
    case NormKind::Sup: {
      double m = 0.0;
      for (double x : v) m = std::max(m, std::abs(x));
      return m;
    }
    case NormKind::L1: {
      double s = 0.0;
      for (double x : v) s += std::abs(x);
      return s;
    }
    case NormKind::Lp: {
      double s = 0.0;
      for (double x : v) s += std::pow(std::abs(x), spec.p);
      return std::pow(s, 1.0 / spec.p);
    }
  }
  return 0.0;
}

SpectralWindow::SpectralWindow(int t_min, int t_max, int dim, Outside outside)
    : t_min_(t_min), t_max_(t_max), dim_(dim), outside_(outside) {
  if (t_min > 0 || t_max < 0)
    throw std::invalid_argument("SpectralWindow: window must contain time 0");
  if (dim < 1) throw std::invalid_argument("SpectralWindow: dim >= 1");
  values_.assign(static_cast<std::size_t>(length()) * dim, 0.0);
}

double& SpectralWindow::at(int t, int comp) {
  return values_[static_cast<std::size_t>(t - t_min_) * dim_ + comp];
}

double SpectralWindow::at(int t, int comp) const {
  return values_[static_cast<std::size_t>(t - t_min_) * dim_ + comp];
}

std::span<const double> SpectralWindow::vec(int t) const {
  return {values_.data() + static_cast<std::size_t>(t - t_min_) * dim_,
          static_cast<std::size_t>(dim_)};
}

std::span<double> SpectralWindow::vec(int t) {
  return {values_.data() + static_cast<std::size_t>(t - t_min_) * dim_,
          static_cast<std::size_t>(dim_)};
}

double SpectralWindow::value_at(int t, int comp) const {
  if (covers(t)) return at(t, comp);
  if (outside_ == Outside::Zero) return 0.0;
  throw std::domain_error("SpectralWindow: value outside window with Unknown semantics");
}

double SpectralWindow::norm_at(int t, const NormSpec& spec) const {
  if (covers(t)) return norm(vec(t), spec);
  if (outside_ == Outside::Zero) return 0.0;
  throw std::domain_error("SpectralWindow: norm outside window with Unknown semantics");
}

void SpectralWindow::validate(const NormSpec& spec) const {
  for (double x : values_) {
    if (!std::isfinite(x) || x < 0.0)
      throw std::invalid_argument("SpectralWindow: components must be finite and >= 0");
  }
  if (normalized_) {
    const double n0 = norm(vec(0), spec);
    if (std::abs(n0 - 1.0) > 1e-12)
      throw std::invalid_argument("SpectralWindow: normalized flag but norm at 0 != 1");
  }
}

bool SpectralWindow::operator==(const SpectralWindow& other) const {
  return t_min_ == other.t_min_ && t_max_ == other.t_max_ && dim_ == other.dim_ &&
         outside_ == other.outside_ && values_ == other.values_;
}

SpectralWindow signed_to_nonneg(const SignedWindow& w) {
  for (double x : w.values) {
    if (!std::isfinite(x)) throw std::invalid_argument("signed_to_nonneg: non-finite value");
  }
  SpectralWindow out(w.t_min, w.t_max, 2 * w.dim, Outside::Zero);
  for (int t = w.t_min; t <= w.t_max; ++t) {
    for (int c = 0; c < w.dim; ++c) {
      const double x = w.at(t, c);
      out.at(t, 2 * c) = x > 0.0 ? x : 0.0;
      out.at(t, 2 * c + 1) = x < 0.0 ? -x : 0.0;
    }
  }
  return out;
}

AlphaNormResult alpha_norm(const SpectralWindow& w, const Alpha& alpha, const NormSpec& spec) {
  std::vector<double> norms;
  norms.reserve(w.length());
  for (int t = w.t_min(); t <= w.t_max(); ++t) {
    const double n = norm(w.vec(t), spec);
    if (!std::isfinite(n)) throw std::invalid_argument("alpha_norm: non-finite component");
    if (n > 0.0) norms.push_back(n);
  }
  // Magnitudes span many decades; accumulate in descending order.
  std::sort(norms.begin(), norms.end(), std::greater<double>());
  double s = 0.0;
  for (double n : norms) s += std::pow(n, alpha.value());
  AlphaNormResult r;
  r.value = s > 0.0 ? std::pow(s, 1.0 / alpha.value()) : 0.0;
  r.truncated = w.outside() == Outside::Unknown;
  return r;
}

Anchor anchor(const SpectralWindow& w, const NormSpec& spec) {
  Anchor a;
  for (int t = w.t_min(); t <= w.t_max(); ++t) {
    const double n = norm(w.vec(t), spec);
    if (n > a.theta_star) {
      a.theta_star = n;
      a.t_star = t;  // strict > keeps the first attainment
    }
  }
  a.not_in_z_risk = w.outside() == Outside::Unknown;
  if (a.theta_star == 0.0) a.t_star.reset();  // all-zero window: inf of empty set
  return a;
}

SpectralWindow shift_window(const SpectralWindow& w, int shift) {
  SpectralWindow out(w.t_min() - shift, w.t_max() - shift, w.dim(), w.outside());
  for (int t = out.t_min(); t <= out.t_max(); ++t)
    for (int c = 0; c < w.dim(); ++c) out.at(t, c) = w.at(t + shift, c);
  return out;
}

}  // namespace tailstorm
