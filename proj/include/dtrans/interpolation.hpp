#pragma once

#include <Eigen/Dense>

#include <vector>

#include "dtrans/ot.hpp"
#include "dtrans/portfolio.hpp"

namespace dtrans {

struct InterpolationSchedule {
  GeneratorPtr phi1;
  std::vector<double> times;

  /// Uniform grid of `points` times covering [0, 1].
  InterpolationSchedule(GeneratorPtr phi1, std::size_t points = 33);
  InterpolationSchedule(GeneratorPtr phi1, std::vector<double> times);
};

/// phi_t = (1 - t) phi0 + t phi1.
GeneratorPtr generator_at(const GeneratorPtr& phi1, double t);

/// pi_t(r) = (1 - t) e + t pi_1(r).
Eigen::VectorXd portfolio_at(const Generator& phi1, double t, const SimplexPoint& r);

/// T_t(p) = p (.) pi_t(p^{-1}).
SimplexPoint transport_at(const Generator& phi1, double t, const SimplexPoint& p);

DiscreteMeasure interpolate_measure(const Generator& phi1, const DiscreteMeasure& p0, double t);

struct CostCurve {
  std::vector<double> times;
  std::vector<double> costs;
  std::vector<double> second_differences;
  bool monotone = false;  // nondecreasing within 1e-12
  bool convex = false;    // second differences >= -1e-10
};

/// C(P0, P_t) = sum_j w_j H(e | pi_t(p_j^{-1})) along the schedule.
CostCurve cost_curve(const InterpolationSchedule& schedule, const DiscreteMeasure& p0);

}  // namespace dtrans
