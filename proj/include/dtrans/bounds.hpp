#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dtrans/simplex.hpp"

namespace dtrans {

class RandomStream;

/// Law on [0, 1] with a continuous density bounded away from zero.
class GapModel {
 public:
  static GapModel uniform();
  /// f(x) = 0.5 + x.
  static GapModel linear();
  /// f(x) proportional to exp(-rate x) on [0, 1].
  static GapModel truncated_exponential(double rate);
  /// Parses "uniform", "linear", "exponential:<rate>".
  static GapModel parse(const std::string& spec);

  /// Model without a closed-form quantile; quantile() bisects cdf().
  GapModel(std::string name, std::function<double(double)> cdf, std::function<double(double)> pdf);

  const std::string& name() const { return name_; }
  double cdf(double x) const { return cdf_(x); }
  double pdf(double x) const { return pdf_(x); }
  double quantile(double u) const;
  double quantile_bisect(double u) const;
  /// int_0^1 f log f by adaptive Gauss-Kronrod quadrature.
  double entropy_bound() const;

 private:
  GapModel(std::string name, std::function<double(double)> cdf, std::function<double(double)> pdf,
           std::function<double(double)> quantile);

  std::string name_;
  std::function<double(double)> cdf_;
  std::function<double(double)> pdf_;
  std::function<double(double)> quantile_;
};

/// Successive gaps of the sorted points together with 0 and 1. Coincident
/// points are separated by 1e-12 and reported through `perturbed`.
SimplexPoint gaps_from_points(std::vector<double> u, bool* perturbed = nullptr);

struct CoupledCost {
  double cost = 0.0;
  double term1 = 0.0;  // log((1/n) sum dG/dU)
  double term2 = 0.0;  // -(1/n) sum log(dG/dU)
};

/// Gap vectors of U_1..U_{n-1} and F^{-1}(U_1)..F^{-1}(U_{n-1}) and their cost.
CoupledCost coupled_cost_sample(const GapModel& model, std::size_t n, RandomStream& rng);

struct Theorem6Row {
  std::size_t n = 0;
  std::size_t replicas = 0;
  double mean_cost = 0.0;
  double cost_standard_error = 0.0;
  double mean_term1 = 0.0;
  double median_term1 = 0.0;
  double median_abs_term1 = 0.0;
  double mean_term2 = 0.0;
  double quadrature_bound = 0.0;
};

std::vector<Theorem6Row> theorem6_experiment(const GapModel& model, const std::vector<std::size_t>& ns,
                                             std::size_t replicas, std::uint64_t seed);

}  // namespace dtrans
