#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>

#include "dtrans/errors.hpp"

namespace dtrans {

class RandomStream;

/// A point of the open unit simplex: strictly positive coordinates summing
/// to one. Construction renormalizes and rejects coordinates <= 1e-300.
class SimplexPoint {
 public:
  static constexpr double kMinCoordinate = 1e-300;

  explicit SimplexPoint(Eigen::VectorXd coords);
  SimplexPoint(std::initializer_list<double> coords);

  /// Builds normalize(exp(logits)) with a single max-shift.
  static SimplexPoint from_logits(const Eigen::VectorXd& logits);
  static SimplexPoint barycenter(std::size_t n);

  std::size_t dim() const { return static_cast<std::size_t>(coords_.size()); }
  double operator[](std::size_t i) const { return coords_[static_cast<Eigen::Index>(i)]; }
  const Eigen::VectorXd& coords() const { return coords_; }
  std::span<const double> span() const { return {coords_.data(), dim()}; }
  Eigen::VectorXd log() const { return coords_.array().log().matrix(); }

 private:
  Eigen::VectorXd coords_;
};

/// Perturbation p ⊙ q: coordinatewise product, renormalized.
SimplexPoint odot(const SimplexPoint& p, const SimplexPoint& q);

/// Group inverse: normalized reciprocals.
SimplexPoint invert(const SimplexPoint& p);

/// Powering: normalized p_i^lambda, evaluated in log space.
SimplexPoint power(double lambda, const SimplexPoint& p);

/// Dirichlet transport cost in nats,
///   c(p, q) = log((1/n) sum q_i/p_i) - (1/n) sum log(q_i/p_i),
/// evaluated in exponential coordinates with a log-sum-exp.
double cost(const SimplexPoint& p, const SimplexPoint& q);

/// Same cost from exponential coordinates theta = -log p, phi = -log q.
double cost_exp_coords(const Eigen::VectorXd& theta, const Eigen::VectorXd& phi);

/// H(p | q) = sum p_i log(p_i / q_i).
double relative_entropy(const SimplexPoint& p, const SimplexPoint& q);

/// Log-density of the reference measure mu0 (all-zero Dirichlet) against
/// Lebesgue measure on the (n-1)-coordinate chart: -sum log p_i.
double mu0_log_density(const SimplexPoint& p);

/// theta_i = -log p_i.
Eigen::VectorXd exp_coords(const SimplexPoint& p);
/// Inverse of exp_coords; any additive constant in theta is gauged away.
SimplexPoint from_exp_coords(const Eigen::VectorXd& theta);

/// Additive log-ratio chart y_i = log(p_i / p_n); mu0 is Lebesgue measure here.
Eigen::VectorXd alr(const SimplexPoint& p);
SimplexPoint alr_inverse(const Eigen::VectorXd& y);

/// Samples mu0 restricted (and normalized) to {p : p_i >= eps for all i}.
/// mu0 itself is only sigma-finite, so the truncation is mandatory.
class TruncatedMu0Sampler {
 public:
  TruncatedMu0Sampler(std::size_t n, double eps);
  SimplexPoint operator()(RandomStream& rng) const;
  std::size_t dim() const { return n_; }
  double eps() const { return eps_; }

 private:
  std::size_t n_;
  double eps_;
  double half_width_;
};

/// Uniform (flat Dirichlet) law restricted to {p_i >= eps}; eps = 0 gives the
/// full simplex.
class TruncatedUniformSampler {
 public:
  TruncatedUniformSampler(std::size_t n, double eps);
  SimplexPoint operator()(RandomStream& rng) const;
  std::size_t dim() const { return n_; }
  double eps() const { return eps_; }

 private:
  std::size_t n_;
  double eps_;
};

}  // namespace dtrans
