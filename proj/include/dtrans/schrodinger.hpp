#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dtrans/portfolio.hpp"
#include "dtrans/simplex.hpp"

namespace dtrans {

class RandomStream;

/// Law of Q = p (.) D with D ~ Dirichlet(alpha).
struct GammaKernel {
  Eigen::VectorXd alpha;

  explicit GammaKernel(Eigen::VectorXd alpha);
  /// Symmetric kernel alpha_i = lambda / n.
  static GammaKernel symmetric(double lambda, std::size_t n);
  SimplexPoint sample(const SimplexPoint& p, RandomStream& rng) const;
};

/// log f(q | p) against Lebesgue measure on the first n - 1 coordinates.
double log_density_general(const GammaKernel& kernel, const SimplexPoint& p,
                           const SimplexPoint& q);
double log_density_symmetric(double lambda, const SimplexPoint& p, const SimplexPoint& q);

struct LdpRow {
  double lambda = 0.0;
  double value = 0.0;      // -(1/lambda) log f_lambda(q | p)
  double deviation = 0.0;  // |value - c(p, q)|
};

std::vector<LdpRow> ldp_limit_check(const std::vector<double>& lambdas, const SimplexPoint& p,
                                    const SimplexPoint& q);
/// Log-log regression slope of deviation against lambda.
double ldp_decay_slope(const std::vector<LdpRow>& table);

/// A[j][k] = -lambda log sum_i q_i(k) / p_i(j).
Eigen::MatrixXd reduced_log_weights(const std::vector<SimplexPoint>& source,
                                    const std::vector<SimplexPoint>& target, double lambda);

/// Permanent by Ryser's formula (Gray-code order).
double permanent(const Eigen::MatrixXd& b);

enum class MixtureMode { exact, marginal };

struct MixtureCoupling {
  MixtureMode mode = MixtureMode::exact;
  double lambda = 0.0;
  std::size_t n_atoms = 0;
  /// Normalized log nu over permutations in lexicographic order (exact mode).
  std::vector<double> log_weights;
  /// Pair marginal m[i][j]; rows and columns sum to 1/N.
  Eigen::MatrixXd pair_marginal;
  bool ties_perturbed = false;
};

inline constexpr std::size_t kExactModeMax = 10;
inline constexpr std::size_t kMarginalModeMax = 16;

MixtureCoupling build_mixture_exact(std::vector<SimplexPoint> source,
                                    std::vector<SimplexPoint> target, double lambda);
MixtureCoupling build_mixture_marginal(std::vector<SimplexPoint> source,
                                       std::vector<SimplexPoint> target, double lambda);

/// Diagnostic entropic coupling: Sinkhorn scaling of exp(A) to (1/N) doubly
/// stochastic form.
Eigen::MatrixXd sinkhorn_coupling(const Eigen::MatrixXd& log_kernel, std::size_t max_iter = 5000,
                                  double tol = 1e-13);

/// Replaces exact duplicate atoms by 1e-12 perturbations; true if any changed.
bool perturb_ties(std::vector<SimplexPoint>& atoms);

struct Theorem2Config {
  std::size_t n = 2;
  std::string generator = "power:0.5";
  std::vector<std::size_t> sizes{4, 6, 8, 10, 12, 14};
  std::size_t seeds = 20;
  std::uint64_t master_seed = 7;
  double eps = 0.02;                    // truncation of the uniform source law
  std::optional<double> lambda;         // empty means (4 / alpha) N^(2/n)
  std::size_t regularity_pairs = 20000;
  std::size_t cross_check_max = 6;      // exact vs marginal comparison up to this N
};

struct Theorem2Record {
  std::size_t size = 0;
  std::size_t seed = 0;
  double lambda = 0.0;
  MixtureMode mode = MixtureMode::exact;
  double w2_sq = 0.0;
  double w2_sq_baseline = 0.0;
  double w2_sq_sinkhorn = 0.0;
  double matching = 0.0;  // squared L2 matching distance W_N
  double optimal_pair_mass = 0.0;
  double mode_gap = 0.0;  // max |exact - marginal| when cross-checked, else 0
  bool ties_perturbed = false;
};

struct Theorem2Summary {
  std::size_t size = 0;
  double lambda = 0.0;
  double median_w2_sq = 0.0;
  double median_baseline = 0.0;
  double median_sinkhorn = 0.0;
  double median_matching = 0.0;
};

struct Theorem2Result {
  RegularityEstimate regularity;
  std::vector<Theorem2Record> records;  // ordered by (size, seed)
  std::vector<Theorem2Summary> summary;
  double spearman = 0.0;                // median w2_sq against N
  double max_mode_gap = 0.0;
};

double theorem2_lambda(double alpha, std::size_t size, std::size_t n);
Theorem2Result theorem2_experiment(const Theorem2Config& config);

std::string to_string(MixtureMode mode);

}  // namespace dtrans
