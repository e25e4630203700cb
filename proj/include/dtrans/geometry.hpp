#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dtrans/portfolio.hpp"
#include "dtrans/simplex.hpp"

namespace dtrans {

class RandomStream;

/// Source law P0 given by its log-density against mu0 and a sampler.
struct DensityModel {
  std::string name;
  std::size_t n = 0;
  std::function<double(const SimplexPoint&)> log_density;
  std::function<SimplexPoint(RandomStream&)> sample;

  /// Flat Dirichlet law on the simplex.
  static DensityModel uniform(std::size_t n);
  static DensityModel dirichlet(Eigen::VectorXd alpha);
};

/// Chart coordinates of the weight ratios: u_i = w_i / w_drop with w = pi / r,
/// over i != drop.
Eigen::VectorXd u_map(const Generator& g, const SimplexPoint& r, std::size_t drop);
Eigen::VectorXd u_map(const Generator& g, const SimplexPoint& r);
/// q_i = u_i / (1 + sum u) for i != drop, q_drop = 1 / (1 + sum u).
SimplexPoint q_of_u(const Eigen::VectorXd& u, std::size_t drop);
SimplexPoint q_of_u(const Eigen::VectorXd& u);

/// |det du/dr~| = (r_k / pi_k)^n det L~(r) in the chart dropping k. Throws
/// NumericalError when L~ is singular.
double jacobian_det_u(const Generator& g, const SimplexPoint& r, std::size_t drop);
double jacobian_det_u(const Generator& g, const SimplexPoint& r);

/// |d r~ / d p~| = prod r / prod p for r = p^{-1}.
double inversion_jacobian(const SimplexPoint& p);

struct MongeAmpere {
  SimplexPoint q;
  double log_density;
};

/// q = T_t(p) and log rho_t(q) = log rho_0(p) + sum log pi - log det L~_t(r) - 2 sum log r.
MongeAmpere monge_ampere_density(const DensityModel& model, const GeneratorPtr& phi1, double t,
                                 const SimplexPoint& p, std::size_t drop);
MongeAmpere monge_ampere_density(const DensityModel& model, const GeneratorPtr& phi1, double t,
                                 const SimplexPoint& p);

struct EntropyEstimate {
  double value = 0.0;
  double standard_error = 0.0;
};

/// Monte Carlo estimate of Ent_mu0(P_t) = E_P0[log rho_t(T_t(p))].
EntropyEstimate entropy_of_pushforward(const DensityModel& model, const GeneratorPtr& phi1,
                                       double t, std::size_t samples, std::uint64_t seed);

struct Theorem4Report {
  std::vector<double> times;
  std::vector<double> curve_a;  // Ent(P_t) + n E[H(e | pi_t)]
  std::vector<double> curve_b;  // -(1/M) sum log det L~_t(r_m)
  std::vector<double> second_differences;     // of curve_b
  double min_sample_second_difference = 0.0;  // over every sample path
  double difference_range = 0.0;             // range of curve_a - curve_b
  double standard_error = 0.0;               // largest MC standard error of curve_a
  bool convex = false;
  bool constant_difference = false;
};

/// Runs both curves on common random numbers. Throws NumericalError when
/// some L~_t is singular.
Theorem4Report theorem4_experiment(const DensityModel& model, const GeneratorPtr& phi1,
                                   const std::vector<double>& times, std::size_t samples,
                                   std::uint64_t seed);

struct LownerResidual {
  Eigen::MatrixXd residual;   // L~_t - [(1 - a) L~_t1 + a L~_t2]
  Eigen::MatrixXd predicted;  // a (1 - a) (grad~_t1 - grad~_t2)(grad~_t1 - grad~_t2)^T
  double max_abs_error = 0.0;
  double min_eigenvalue = 0.0;
};

LownerResidual lowner_concavity_identity(const GeneratorPtr& phi1, const SimplexPoint& r, double t1,
                                         double t2, double alpha);

}  // namespace dtrans
