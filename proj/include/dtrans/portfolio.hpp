#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "dtrans/simplex.hpp"

namespace dtrans {

/// Exponentially concave function on the positive orthant with analytic
/// first and second derivatives.
class Generator {
 public:
  virtual ~Generator() = default;
  virtual std::string name() const = 0;
  virtual double value(const Eigen::VectorXd& r) const = 0;
  virtual Eigen::VectorXd gradient(const Eigen::VectorXd& r) const = 0;
  virtual Eigen::MatrixXd hessian(const Eigen::VectorXd& r) const = 0;
};

using GeneratorPtr = std::shared_ptr<const Generator>;

/// (1/n) sum log r_i
GeneratorPtr make_phi0();
/// (lambda/n) sum log r_i, lambda in (0, 1]
GeneratorPtr make_power(double lambda);
/// log(b . r), b > 0
GeneratorPtr make_affine(Eigen::VectorXd b);
/// (1 - t) a + t b, t in [0, 1]
GeneratorPtr make_mixture(double t, GeneratorPtr a, GeneratorPtr b);

/// Parses "phi0", "power:0.5", "affine:1,2,3", "mix:t,<gen>,<gen>" (nesting allowed).
GeneratorPtr parse_generator(const std::string& spec);

/// Names of the built-in catalog for dimension n.
std::vector<std::string> builtin_generators(std::size_t n);

/// pi_i = r_i (1 + grad phi . (e_i - r)); weights within -1e-12 of zero are clamped.
Eigen::VectorXd portfolio_map(const Generator& g, const SimplexPoint& r);

/// T(p) = p (.) pi(p^{-1}).
SimplexPoint transport_map(const Generator& g, const SimplexPoint& p);
/// Same map through the weight ratios q_i proportional to pi_i(r) / r_i.
SimplexPoint transport_map_ratio(const Generator& g, const SimplexPoint& p);

/// D[r : r'] = log(1 + grad phi(r') . (r - r')) - (phi(r) - phi(r')).
double l_divergence(const Generator& g, const SimplexPoint& r, const SimplexPoint& r_prime);
/// D[r : r'] = log(sum_i pi_i(r') r_i / r'_i) - (phi(r) - phi(r')).
double l_divergence_portfolio(const Generator& g, const SimplexPoint& r,
                              const SimplexPoint& r_prime);

/// L(r) = -hess phi(r) - grad phi(r) grad phi(r)^T.
Eigen::MatrixXd l_matrix(const Generator& g, const SimplexPoint& r);

/// n x (n-1) chart Jacobian for the chart that drops coordinate `drop`.
Eigen::MatrixXd chart_basis(std::size_t n, std::size_t drop);
/// L restricted to the (n-1)-coordinate chart dropping `drop` (default: last).
Eigen::MatrixXd l_matrix_chart(const Generator& g, const SimplexPoint& r, std::size_t drop);
Eigen::MatrixXd l_matrix_chart(const Generator& g, const SimplexPoint& r);

/// Log of the cyclic product prod_s sum_i pi_i(r(s)) r_i(s+1) / r_i(s); the
/// cycle closes on itself.
double mcm_check(const Generator& g, const std::vector<SimplexPoint>& cycle);

struct RegularityEstimate {
  double alpha = 0.0;
  double alpha_prime = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
  double m = 0.0;
  double alpha_lemma8 = 0.0;
  std::size_t pairs = 0;
  bool degenerate = false;
};

/// Estimates alpha <= D[q':q] / |q' - q|^2 <= alpha' over seeded pairs in
/// {q_i >= eps} with log-uniformly stratified distances, plus the closed-form
/// lower bound C2 / (M + C3).
RegularityEstimate estimate_regularity(const Generator& g, std::size_t n, double eps,
                                       std::size_t pairs, std::uint64_t seed);

}  // namespace dtrans
