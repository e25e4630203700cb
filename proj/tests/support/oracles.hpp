#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include "dtrans/rng.hpp"
#include "dtrans/simplex.hpp"

namespace oracle {

/// Central-difference Jacobian of f: R^m -> R^k.
inline Eigen::MatrixXd jacobian(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                                const Eigen::VectorXd& x, double h = 1e-6) {
  const Eigen::VectorXd f0 = f(x);
  Eigen::MatrixXd jac(f0.size(), x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    Eigen::VectorXd xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    jac.col(j) = (f(xp) - f(xm)) / (2 * h);
  }
  return jac;
}

inline Eigen::VectorXd gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                const Eigen::VectorXd& x, double h = 1e-6) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    Eigen::VectorXd xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    g[j] = (f(xp) - f(xm)) / (2 * h);
  }
  return g;
}

inline Eigen::MatrixXd hessian(const std::function<double(const Eigen::VectorXd&)>& f,
                               const Eigen::VectorXd& x, double h = 1e-4) {
  const auto n = x.size();
  Eigen::MatrixXd H(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      Eigen::VectorXd a = x, b = x, c = x, d = x;
      a[i] += h; a[j] += h;
      b[i] += h; b[j] -= h;
      c[i] -= h; c[j] += h;
      d[i] -= h; d[j] -= h;
      H(i, j) = (f(a) - f(b) - f(c) + f(d)) / (4 * h * h);
    }
  }
  return H;
}

/// First n-1 coordinates of a simplex point.
inline Eigen::VectorXd chart(const dtrans::SimplexPoint& p) { return p.coords().head(p.dim() - 1); }

/// Completes chart coordinates with 1 - sum.
inline dtrans::SimplexPoint unchart(const Eigen::VectorXd& x) {
  Eigen::VectorXd full(x.size() + 1);
  full.head(x.size()) = x;
  full[x.size()] = 1.0 - x.sum();
  return dtrans::SimplexPoint(full);
}

/// Naive definition of the cost, straight from the ratio form.
inline double naive_cost(const dtrans::SimplexPoint& p, const dtrans::SimplexPoint& q) {
  const double n = static_cast<double>(p.dim());
  double mean_ratio = 0.0, mean_log = 0.0;
  for (std::size_t i = 0; i < p.dim(); ++i) {
    mean_ratio += q[i] / p[i] / n;
    mean_log += std::log(q[i] / p[i]) / n;
  }
  return std::log(mean_ratio) - mean_log;
}

/// Minimum over every permutation of sum_j cost(j, sigma(j)).
inline double brute_force_assignment(const Eigen::MatrixXd& cost, std::vector<std::size_t>* best = nullptr) {
  std::vector<std::size_t> perm(static_cast<std::size_t>(cost.rows()));
  std::iota(perm.begin(), perm.end(), 0);
  double out = INFINITY;
  do {
    double v = 0.0;
    for (std::size_t j = 0; j < perm.size(); ++j) v += cost(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(perm[j]));
    if (v < out) {
      out = v;
      if (best) *best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

/// Permanent straight from the definition.
inline double brute_force_permanent(const Eigen::MatrixXd& b) {
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(b.rows()));
  std::iota(perm.begin(), perm.end(), 0);
  double out = 0.0;
  do {
    double v = 1.0;
    for (std::size_t j = 0; j < perm.size(); ++j) v *= b(static_cast<Eigen::Index>(j), perm[j]);
    out += v;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

/// Composite Simpson rule on [a, b] with `panels` (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int panels = 20000) {
  const double h = (b - a) / panels;
  double s = f(a) + f(b);
  for (int k = 1; k < panels; ++k) s += f(a + k * h) * (k % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

/// Pearson chi-square statistic of counts against expected cell probabilities.
inline double chi_square(const std::vector<double>& counts, const std::vector<double>& probs) {
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  double s = 0.0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    const double e = total * probs[k];
    s += (counts[k] - e) * (counts[k] - e) / e;
  }
  return s;
}

/// Kolmogorov-Smirnov distance between a sample and a continuous CDF.
inline double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  const double m = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t k = 0; k < sample.size(); ++k) {
    const double f = cdf(sample[k]);
    d = std::max({d, (static_cast<double>(k) + 1.0) / m - f, f - static_cast<double>(k) / m});
  }
  return d;
}

/// Asymptotic p-value of the KS distance d for m draws (Stephens' correction).
inline double ks_pvalue(double d, std::size_t m) {
  const double rm = std::sqrt(static_cast<double>(m));
  const double x = (rm + 0.12 + 0.11 / rm) * d;
  if (x < 0.2) return 1.0;
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    s += (k % 2 ? 2.0 : -2.0) * std::exp(-2.0 * k * k * x * x);
  }
  return std::clamp(s, 0.0, 1.0);
}

inline dtrans::SimplexPoint random_point(dtrans::RandomStream& rng, std::size_t n, double eps = 0.0) {
  return dtrans::TruncatedUniformSampler(n, eps)(rng);
}

inline Eigen::VectorXd random_tangent(dtrans::RandomStream& rng, std::size_t n) {
  Eigen::VectorXd v(n);
  for (std::size_t i = 0; i < n; ++i) v[static_cast<Eigen::Index>(i)] = rng.normal();
  v.array() -= v.mean();
  return v / v.norm();
}

}  // namespace oracle
