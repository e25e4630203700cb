#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "dtrans/simplex.hpp"

namespace dtrans {

struct DiscreteMeasure {
  std::vector<SimplexPoint> atoms;
  Eigen::VectorXd weights;

  DiscreteMeasure(std::vector<SimplexPoint> atoms, Eigen::VectorXd weights);
  /// Equal weights 1/N.
  static DiscreteMeasure uniform(std::vector<SimplexPoint> atoms);
  std::size_t size() const { return atoms.size(); }
};

enum class CostKind { dirichlet, sq_euclidean };

Eigen::MatrixXd cost_matrix(const DiscreteMeasure& source, const DiscreteMeasure& target,
                            CostKind kind);
Eigen::MatrixXd cost_matrix(const std::vector<SimplexPoint>& source,
                            const std::vector<SimplexPoint>& target, CostKind kind);

/// Squared Euclidean distances between the rows of two point clouds.
Eigen::MatrixXd sq_distance_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

struct Assignment {
  std::vector<std::size_t> perm;  // row j is matched to column perm[j]
  double value = 0.0;
};

/// Exact min-cost perfect matching; among optimal permutations returns the
/// lexicographically smallest.
Assignment solve_assignment(const Eigen::MatrixXd& cost);

struct TransportPlan {
  Eigen::MatrixXd mass;
  double value = 0.0;
  std::size_t pivots = 0;
};

/// Exact transportation LP by the network simplex method. Throws
/// NumericalError when the final complementary slackness check fails.
TransportPlan solve_transport(const Eigen::MatrixXd& cost, const Eigen::VectorXd& supply,
                              const Eigen::VectorXd& demand);

struct Coupling {
  Eigen::MatrixXd mass;
  DiscreteMeasure source;
  DiscreteMeasure target;
  double value = 0.0;
};

Coupling solve_kantorovich(const DiscreteMeasure& source, const DiscreteMeasure& target,
                           CostKind kind);

double w2_distance(const DiscreteMeasure& a, const DiscreteMeasure& b);

/// Squared L2 matching distance (1/N) min_sigma sum_j |x_j - y_sigma(j)|^2
/// between equally weighted clouds stored row-wise.
double l2_matching_distance(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y);

struct MonotonicityReport {
  double min_cycle_gap = 0.0;  // min over cycles of sum_s c(x_{s+1}, y_s) - c(x_s, y_s)
  std::size_t cycles = 0;
  std::size_t support = 0;
  bool certified = false;  // min_cycle_gap >= -1e-9
};

/// Samples cycles through the support (mass > 1e-12) of a plan: every 2-cycle
/// when the support is small enough, plus `budget` random cycles of length 3..6.
MonotonicityReport certify_c_monotone(const Eigen::MatrixXd& cost, const Eigen::MatrixXd& mass,
                                      std::size_t budget, std::uint64_t seed);
MonotonicityReport certify_c_monotone(const Coupling& coupling, std::size_t budget,
                                      std::uint64_t seed);

}  // namespace dtrans
