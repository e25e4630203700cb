#include "dtrans/interpolation.hpp"

#include <algorithm>
#include <cmath>

namespace dtrans {

InterpolationSchedule::InterpolationSchedule(GeneratorPtr g, std::size_t points) : phi1(std::move(g)) {
  if (points < 2) throw ValidationError("time grid needs both endpoints");
  for (std::size_t k = 0; k < points; ++k) {
    times.push_back(static_cast<double>(k) / static_cast<double>(points - 1));
  }
}

InterpolationSchedule::InterpolationSchedule(GeneratorPtr g, std::vector<double> t)
    : phi1(std::move(g)), times(std::move(t)) {
  if (!phi1) throw ValidationError("schedule needs a generator");
  if (times.size() < 2 || times.front() != 0.0 || times.back() != 1.0 ||
      !std::is_sorted(times.begin(), times.end())) {
    throw ValidationError("time grid must be sorted and include 0 and 1");
  }
}

GeneratorPtr generator_at(const GeneratorPtr& phi1, double t) {
  return make_mixture(t, make_phi0(), phi1);
}

Eigen::VectorXd portfolio_at(const Generator& phi1, double t, const SimplexPoint& r) {
  if (!(t >= 0.0 && t <= 1.0)) throw ValidationError("t must lie in [0, 1]");
  const double n = static_cast<double>(r.dim());
  return ((1.0 - t) / n + t * portfolio_map(phi1, r).array()).matrix();
}

SimplexPoint transport_at(const Generator& phi1, double t, const SimplexPoint& p) {
  const Eigen::VectorXd pi = portfolio_at(phi1, t, invert(p));
  if (pi.minCoeff() <= 0.0) throw NumericalError("portfolio weight on the boundary");
  return odot(p, SimplexPoint(pi));
}

DiscreteMeasure interpolate_measure(const Generator& phi1, const DiscreteMeasure& p0, double t) {
  std::vector<SimplexPoint> atoms;
  atoms.reserve(p0.size());
  for (const auto& p : p0.atoms) atoms.push_back(transport_at(phi1, t, p));
  return DiscreteMeasure(std::move(atoms), p0.weights);
}

CostCurve cost_curve(const InterpolationSchedule& schedule, const DiscreteMeasure& p0) {
  CostCurve curve;
  curve.times = schedule.times;
  const std::size_t n = p0.atoms.front().dim();
  const SimplexPoint bary = SimplexPoint::barycenter(n);
  std::vector<Eigen::VectorXd> pi1;
  for (const auto& p : p0.atoms) pi1.push_back(portfolio_map(*schedule.phi1, invert(p)));
  for (double t : schedule.times) {
    double c = 0.0;
    for (std::size_t j = 0; j < p0.size(); ++j) {
      const Eigen::VectorXd pi = ((1.0 - t) / static_cast<double>(n) + t * pi1[j].array()).matrix();
      c += p0.weights[static_cast<Eigen::Index>(j)] * relative_entropy(bary, SimplexPoint(pi));
    }
    curve.costs.push_back(c);
  }
  curve.monotone = true;
  for (std::size_t k = 1; k < curve.costs.size(); ++k) {
    if (curve.costs[k] < curve.costs[k - 1] - 1e-12) curve.monotone = false;
  }
  curve.convex = true;
  for (std::size_t k = 1; k + 1 < curve.costs.size(); ++k) {
    // Divided second difference rescaled to the local step, exact for uniform grids.
    const double h0 = curve.times[k] - curve.times[k - 1];
    const double h1 = curve.times[k + 1] - curve.times[k];
    const double d = 2.0 * ((curve.costs[k + 1] - curve.costs[k]) / h1 -
                            (curve.costs[k] - curve.costs[k - 1]) / h0) /
                     (h0 + h1) * h0 * h1;
    curve.second_differences.push_back(d);
    if (d < -1e-10) curve.convex = false;
  }
  return curve;
}

}  // namespace dtrans
