#include "tailstorm/stats.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace tailstorm::stats {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Acklam's rational approximation, |relative error| < 1.15e-9.
double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("normal_quantile: p in (0,1)");
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double q, r;
  if (p < plow) {
    q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - plow) {
    q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  q = p - 0.5;
  r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

double kolmogorov_sf(double t_stat) {
  if (t_stat <= 0.0) return 1.0;
  if (t_stat < 1.0) {
    // Jacobi theta form, fast for small arguments.
    const double f = std::sqrt(2.0 * M_PI) / t_stat;
    double cdf = 0.0;
    for (int k = 1; k <= 20; ++k) {
      const double e = (2 * k - 1) * M_PI / t_stat;
      cdf += std::exp(-e * e / 8.0);
    }
    cdf *= f;
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  double sf = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * t_stat * t_stat);
    sf += (k % 2 == 1) ? 2.0 * term : -2.0 * term;
    if (term < 1e-18) break;
  }
  return std::clamp(sf, 0.0, 1.0);
}

TestReport ks_one_sample(std::span<const double> samples,
                         const std::function<double(double)>& cdf, double p_threshold) {
  if (samples.size() < 20) throw std::invalid_argument("ks_one_sample: need n >= 20");
  std::vector<double> xs(samples.begin(), samples.end());
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  double d = 0.0;
  double prev_f = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = cdf(xs[i]);
    if (f < prev_f - 1e-12 || f < -1e-12 || f > 1.0 + 1e-12)
      throw std::invalid_argument("ks_one_sample: cdf not monotone on sample range");
    prev_f = f;
    d = std::max(d, f - static_cast<double>(i) / n);
    d = std::max(d, static_cast<double>(i + 1) / n - f);
  }
  TestReport r;
  r.id = "ks_one_sample";
  r.statistic = d;
  r.reference = "analytic cdf, asymptotic Kolmogorov";
  r.p_value = kolmogorov_sf(std::sqrt(static_cast<double>(n)) * d);
  r.threshold = p_threshold;
  r.pass = *r.p_value > p_threshold;
  r.n_used["n"] = static_cast<double>(n);
  return r;
}

TestReport ks_two_sample(std::span<const double> a, std::span<const double> b,
                         double p_threshold) {
  if (a.size() < 20 || b.size() < 20)
    throw std::invalid_argument("ks_two_sample: need min(n_a, n_b) >= 20");
  std::vector<double> xa(a.begin(), a.end()), xb(b.begin(), b.end());
  std::sort(xa.begin(), xa.end());
  std::sort(xb.begin(), xb.end());
  const std::size_t na = xa.size(), nb = xb.size();
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < na && j < nb) {
    const double v = std::min(xa[i], xb[j]);
    while (i < na && xa[i] == v) ++i;
    while (j < nb && xb[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  TestReport r;
  r.id = "ks_two_sample";
  r.statistic = d;
  r.reference = "two-sample, asymptotic Kolmogorov";
  const double ne = static_cast<double>(na) * nb / (na + nb);
  r.p_value = kolmogorov_sf(std::sqrt(ne) * d);
  r.threshold = p_threshold;
  r.pass = *r.p_value > p_threshold;
  r.n_used["n_a"] = static_cast<double>(na);
  r.n_used["n_b"] = static_cast<double>(nb);
  return r;
}

void SampleMatrix::push_row(std::span<const double> row) {
  if (dim == 0) dim = row.size();
  if (row.size() != dim) throw std::invalid_argument("SampleMatrix: inconsistent row size");
  data.insert(data.end(), row.begin(), row.end());
  ++n;
}

namespace {

using MatF = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic>;

// Quadratic forms s^T D s and 1^T D s for every label column, where D is the
// pooled Euclidean distance matrix. D is never materialized; row blocks are
// rebuilt from the points and folded into a blocked matrix product. Column 0
// of S is all-ones, so its "quadratic form" is the total sum of D.
void distance_quadratic_forms(const MatF& points, const MatF& labels,
                              std::vector<double>& q_out, std::vector<double>& r_out) {
  const Eigen::Index n = points.rows();
  const Eigen::Index cols = labels.cols();
  Eigen::VectorXf sq = points.rowwise().squaredNorm();
  q_out.assign(cols, 0.0);
  r_out.assign(cols, 0.0);

  const Eigen::Index block = 256;
  const Eigen::Index nblocks = (n + block - 1) / block;
  std::vector<std::vector<double>> qp(nblocks), rp(nblocks);

#pragma omp parallel for schedule(dynamic)
  for (Eigen::Index bi = 0; bi < nblocks; ++bi) {
    const Eigen::Index r0 = bi * block;
    const Eigen::Index rb = std::min(block, n - r0);
    MatF g = points.middleRows(r0, rb) * points.transpose();
    for (Eigen::Index i = 0; i < rb; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        g(i, j) = std::sqrt(std::max(0.0f, sq(r0 + i) + sq(j) - 2.0f * g(i, j)));
    MatF w = g * labels;  // rb x cols
    qp[bi].assign(cols, 0.0);
    rp[bi].assign(cols, 0.0);
    for (Eigen::Index p = 0; p < cols; ++p) {
      double q = 0.0, r = 0.0;
      for (Eigen::Index i = 0; i < rb; ++i) {
        r += w(i, p);
        q += static_cast<double>(labels(r0 + i, p)) * w(i, p);
      }
      qp[bi][p] = q;
      rp[bi][p] = r;
    }
  }
  // Fixed-order reduction keeps results independent of the thread count.
  for (Eigen::Index bi = 0; bi < nblocks; ++bi)
    for (Eigen::Index p = 0; p < cols; ++p) {
      q_out[p] += qp[bi][p];
      r_out[p] += rp[bi][p];
    }
}

}  // namespace

TestReport energy_test(const SampleMatrix& a, const SampleMatrix& b, int permutations,
                       Rng& rng, double p_threshold) {
  if (a.dim != b.dim) throw std::invalid_argument("energy_test: dimension mismatch");
  if (permutations < 199) throw std::invalid_argument("energy_test: need >= 199 permutations");
  const std::size_t n = a.n, m = b.n, total = n + m;
  if (n == 0 || m == 0) throw std::invalid_argument("energy_test: empty sample");

  MatF points(total, a.dim);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < a.dim; ++c) points(i, c) = static_cast<float>(a.data[i * a.dim + c]);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t c = 0; c < b.dim; ++c)
      points(n + i, c) = static_cast<float>(b.data[i * b.dim + c]);

  const int cols = permutations + 2;  // ones | observed | permutations
  MatF labels = MatF::Zero(total, cols);
  labels.col(0).setOnes();
  for (std::size_t i = 0; i < n; ++i) labels(i, 1) = 1.0f;
  std::vector<std::uint32_t> idx(total);
  std::iota(idx.begin(), idx.end(), 0);
  for (int p = 0; p < permutations; ++p) {
    for (std::size_t i = total - 1; i > 0; --i)
      std::swap(idx[i], idx[rng.uniform_int(0, static_cast<std::int64_t>(i))]);
    for (std::size_t i = 0; i < n; ++i) labels(idx[i], p + 2) = 1.0f;
  }

  std::vector<double> q, r;
  distance_quadratic_forms(points, labels, q, r);
  const double t2 = r[0];  // 1^T D 1

  const double nn = static_cast<double>(n), mm = static_cast<double>(m);
  auto stat_for = [&](int col) {
    const double s_aa = q[col];
    const double s_ab = r[col] - q[col];
    const double s_bb = t2 - 2.0 * r[col] + q[col];
    const double e = 2.0 * s_ab / (nn * mm) - s_aa / (nn * nn) - s_bb / (mm * mm);
    return nn * mm / (nn + mm) * e;
  };

  const double obs = stat_for(1);
  int ge = 0;
  for (int p = 0; p < permutations; ++p)
    if (stat_for(p + 2) >= obs) ++ge;

  TestReport rep;
  rep.id = "energy_two_sample";
  rep.statistic = obs;
  rep.reference = "permutation(" + std::to_string(permutations) + ")";
  rep.p_value = (1.0 + ge) / (permutations + 1.0);
  rep.threshold = p_threshold;
  rep.pass = *rep.p_value > p_threshold;
  rep.n_used["n_a"] = nn;
  rep.n_used["n_b"] = mm;
  return rep;
}

TestReport distance_covariance_test(std::span<const double> x, const SampleMatrix& y,
                                    int permutations, Rng& rng, double p_threshold) {
  if (x.size() != y.n) throw std::invalid_argument("distance_covariance_test: size mismatch");
  if (permutations < 199)
    throw std::invalid_argument("distance_covariance_test: need >= 199 permutations");
  const std::size_t cap = 2000;  // quadratic cost; larger inputs are thinned
  std::size_t n = x.size();
  bool thinned = false;
  std::size_t stride = 1;
  if (n > cap) {
    stride = (n + cap - 1) / cap;
    n = (x.size() + stride - 1) / stride;
    thinned = true;
  }

  auto xi = [&](std::size_t i) { return x[i * stride]; };
  auto yrow = [&](std::size_t i) { return y.row(i * stride); };

  // Doubly centered distance matrices (V-statistic convention).
  auto center = [n](std::vector<float>& d) {
    std::vector<double> rowm(n, 0.0);
    double tot = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += d[i * n + j];
      rowm[i] = s / n;
      tot += s;
    }
    tot /= static_cast<double>(n) * n;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        d[i * n + j] = static_cast<float>(d[i * n + j] - rowm[i] - rowm[j] + tot);
  };

  std::vector<float> da(n * n), db(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) da[i * n + j] = static_cast<float>(std::abs(xi(i) - xi(j)));
  for (std::size_t i = 0; i < n; ++i) {
    auto ri = yrow(i);
    for (std::size_t j = 0; j < n; ++j) {
      auto rj = yrow(j);
      double s = 0.0;
      for (std::size_t c = 0; c < y.dim; ++c) {
        const double diff = ri[c] - rj[c];
        s += diff * diff;
      }
      db[i * n + j] = static_cast<float>(std::sqrt(s));
    }
  }
  center(da);
  center(db);

  auto dcov = [&](const std::vector<std::uint32_t>& pi) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const float* arow = da.data() + i * n;
      const float* brow = db.data() + static_cast<std::size_t>(pi[i]) * n;
      for (std::size_t j = 0; j < n; ++j) s += static_cast<double>(arow[j]) * brow[pi[j]];
    }
    return s / (static_cast<double>(n) * n);
  };

  std::vector<std::uint32_t> pi(n);
  std::iota(pi.begin(), pi.end(), 0);
  const double obs = dcov(pi);

  std::vector<std::vector<std::uint32_t>> perms(permutations, pi);
  for (auto& perm : perms)
    for (std::size_t i = n - 1; i > 0; --i)
      std::swap(perm[i], perm[rng.uniform_int(0, static_cast<std::int64_t>(i))]);

  std::vector<int> ge_flags(permutations, 0);
#pragma omp parallel for schedule(static)
  for (int p = 0; p < permutations; ++p) ge_flags[p] = dcov(perms[p]) >= obs ? 1 : 0;
  const int ge = std::accumulate(ge_flags.begin(), ge_flags.end(), 0);

  TestReport rep;
  rep.id = "distance_covariance";
  rep.statistic = obs;
  rep.reference = "permutation(" + std::to_string(permutations) + ")";
  rep.p_value = (1.0 + ge) / (permutations + 1.0);
  rep.threshold = p_threshold;
  rep.pass = *rep.p_value > p_threshold;
  rep.n_used["n"] = static_cast<double>(n);
  if (thinned) rep.notes.push_back("input thinned to every " + std::to_string(stride) + "th sample");
  return rep;
}

BinomialBand binomial_band(double p_hat, std::size_t n, double z) {
  if (!(p_hat >= 0.0 && p_hat <= 1.0)) throw std::invalid_argument("binomial_band: p_hat in [0,1]");
  if (n < 1) throw std::invalid_argument("binomial_band: n >= 1");
  const double se = std::sqrt(p_hat * (1.0 - p_hat) / static_cast<double>(n));
  BinomialBand b;
  b.lo = std::max(0.0, p_hat - z * se);
  b.hi = std::min(1.0, p_hat + z * se);
  b.degenerate = se == 0.0;
  return b;
}

std::vector<double> log1p_transform(std::span<const double> v) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::log1p(v[i]);
  return out;
}

}  // namespace tailstorm::stats
