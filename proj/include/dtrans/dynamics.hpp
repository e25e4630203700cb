#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "dtrans/simplex.hpp"

namespace dtrans {

class RandomStream;

/// Coordinates f_1..f_n sampled at t_g = g / G, g = 0..G; row g holds f(t_g).
struct MonotonePath {
  Eigen::MatrixXd values;

  std::size_t grid() const { return static_cast<std::size_t>(values.rows()) - 1; }
  std::size_t dim() const { return static_cast<std::size_t>(values.cols()); }
  /// f(t) = t pi on the grid.
  static MonotonePath linear(const SimplexPoint& pi, std::size_t grid);
};

struct Projection {
  Eigen::VectorXd weights;
  bool boundary = false;  // some cell carries no mass
};

/// (mu(E_i))_i for a distribution function sampled on a uniform grid of [0, 1];
/// F is interpolated linearly between grid points.
Projection project_measure(const Eigen::VectorXd& distribution, std::size_t n);

/// H(Leb | mu_f) = -log n - (1/n) sum_i int log f_i'(s) ds with forward
/// difference slopes; +infinity when some increment is not positive.
double lagrangian_action(const MonotonePath& f);

struct BridgePath {
  std::size_t particle = 0;
  double lambda = 0.0;           // 0 for deterministic paths
  SimplexPoint endpoint;         // pi = q (.) p^{-1}
  MonotonePath fraction;         // f(t); f(1) = pi
  Eigen::MatrixXd portfolio;     // pi(t) proportional to (1 - t)/n + f(t)
  Eigen::MatrixXd path;          // q(t) = p (.) pi(t)
};

/// The action-minimizing interpolation: f(t) = t pi.
BridgePath optimal_path(const SimplexPoint& p, const SimplexPoint& q, std::size_t grid);

/// gamma(t_g * lambda_total) for t_g = g / G with independent Gamma(lambda_total / G) increments.
Eigen::VectorXd sample_gamma_subordinator(double lambda_total, std::size_t grid, RandomStream& rng);

/// D(t_g) = gamma(t_g lambda) / gamma(lambda); normalized in log space.
Eigen::VectorXd sample_dirichlet_process(double lambda, std::size_t grid, RandomStream& rng);

/// f_i(t) = (gamma_i(t lambda) / gamma_i(lambda)) pi_i with independent subordinators.
BridgePath sample_conditional_bridge(const SimplexPoint& p, const SimplexPoint& q, double lambda,
                                     std::size_t grid, RandomStream& rng);

/// Bridge with every increment replaced by its mean (the large-lambda limit).
BridgePath mean_field_bridge(const SimplexPoint& p, const SimplexPoint& q, std::size_t grid);

struct RestrictionReport {
  double discrete_entropy = 0.0;      // H(e | pi)
  std::vector<double> values;         // H(Leb | mu) per candidate
  double min_gap = 0.0;               // min(values) - discrete_entropy
  bool holds = false;                 // every value >= discrete_entropy - 1e-12
};

/// Candidates are cell masses of piecewise-uniform measures on G equal cells
/// of (0, 1] (G divisible by n), each satisfying mu(E_i) = pi_i.
RestrictionReport entropy_restriction_check(const SimplexPoint& pi,
                                            const std::vector<Eigen::VectorXd>& candidates);

struct Theorem3Config {
  std::size_t n = 2;
  std::string generator = "power:0.5";
  std::vector<double> lambdas{1e2, 1e3, 1e4};
  std::size_t particles = 50;
  std::size_t grid = 256;
  std::size_t seeds = 20;
  std::uint64_t master_seed = 7;
  double eps = 0.02;
};

struct Theorem3Record {
  double lambda = 0.0;
  std::size_t seed = 0;
  double statistic = 0.0;      // mean over particles of sup_t,i |f_i(t)/pi_i - t|
  double path_distance = 0.0;  // mean over particles of sup_t |q_sim(t) - q_opt(t)|
};

struct Theorem3Summary {
  double lambda = 0.0;
  double median_statistic = 0.0;
  double mean_path_distance = 0.0;
};

struct Theorem3Result {
  std::vector<Theorem3Record> records;  // ordered by (lambda, seed)
  std::vector<Theorem3Summary> summary;
};

Theorem3Result theorem3_experiment(const Theorem3Config& config);

}  // namespace dtrans
