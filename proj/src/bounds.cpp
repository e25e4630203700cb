#include "dtrans/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include "dtrans/parallel.hpp"
#include "dtrans/rng.hpp"
#include "dtrans/stats.hpp"

namespace dtrans {

GapModel::GapModel(std::string name, std::function<double(double)> cdf,
                   std::function<double(double)> pdf, std::function<double(double)> quantile)
    : name_(std::move(name)), cdf_(std::move(cdf)), pdf_(std::move(pdf)), quantile_(std::move(quantile)) {}

GapModel::GapModel(std::string name, std::function<double(double)> cdf,
                   std::function<double(double)> pdf)
    : GapModel(std::move(name), std::move(cdf), std::move(pdf), nullptr) {}

GapModel GapModel::uniform() {
  return GapModel("uniform", [](double x) { return x; }, [](double) { return 1.0; },
                  [](double u) { return u; });
}

GapModel GapModel::linear() {
  return GapModel(
      "linear", [](double x) { return 0.5 * x * x + 0.5 * x; }, [](double x) { return 0.5 + x; },
      [](double u) { return 2.0 * u / (0.5 + std::sqrt(0.25 + 2.0 * u)); });
}

GapModel GapModel::truncated_exponential(double rate) {
  if (!(rate > 0.0) || !std::isfinite(rate)) throw ValidationError("exponential rate must be positive");
  const double z = -std::expm1(-rate);
  return GapModel(
      "exponential:" + std::to_string(rate), [rate, z](double x) { return -std::expm1(-rate * x) / z; },
      [rate, z](double x) { return rate * std::exp(-rate * x) / z; },
      [rate, z](double u) { return -std::log1p(-u * z) / rate; });
}

GapModel GapModel::parse(const std::string& spec) {
  if (spec == "uniform") return uniform();
  if (spec == "linear") return linear();
  if (spec.rfind("exponential:", 0) == 0) {
    char* end = nullptr;
    const std::string arg = spec.substr(12);
    const double rate = std::strtod(arg.c_str(), &end);
    if (arg.empty() || end != arg.c_str() + arg.size()) throw ValidationError("bad rate in '" + spec + "'");
    return truncated_exponential(rate);
  }
  throw ValidationError("unknown gap model '" + spec + "'");
}

double GapModel::quantile(double u) const {
  if (!(u >= 0.0 && u <= 1.0)) throw ValidationError("quantile level outside [0, 1]");
  return quantile_ ? quantile_(u) : quantile_bisect(u);
}

double GapModel::quantile_bisect(double u) const {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  auto f = [&](double x) { return cdf_(x) - u; };
  auto tol = [](double a, double b) { return std::abs(b - a) <= 1e-12; };
  const auto r = boost::math::tools::bisect(f, 0.0, 1.0, tol);
  return 0.5 * (r.first + r.second);
}

double GapModel::entropy_bound() const {
  auto integrand = [&](double x) {
    const double f = pdf_(x);
    return f * std::log(f);
  };
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, 0.0, 1.0, 15, 1e-14);
}

SimplexPoint gaps_from_points(std::vector<double> u, bool* perturbed) {
  if (u.empty()) throw ValidationError("need at least one interior point");
  for (double x : u) {
    if (!(x > 0.0 && x < 1.0)) throw ValidationError("points must lie in (0, 1)");
  }
  std::sort(u.begin(), u.end());
  bool moved = false;
  for (std::size_t i = 1; i < u.size(); ++i) {
    if (u[i] <= u[i - 1]) {
      u[i] = u[i - 1] + 1e-12;
      moved = true;
    }
  }
  if (u.back() >= 1.0) throw ValidationError("points too close to 1 to separate");
  if (perturbed) *perturbed = moved;
  Eigen::VectorXd g(static_cast<Eigen::Index>(u.size() + 1));
  double prev = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    g[static_cast<Eigen::Index>(i)] = u[i] - prev;
    prev = u[i];
  }
  g[static_cast<Eigen::Index>(u.size())] = 1.0 - prev;
  return SimplexPoint(g);
}

CoupledCost coupled_cost_sample(const GapModel& model, std::size_t n, RandomStream& rng) {
  if (n < 2) throw ValidationError("n must be at least 2");
  std::vector<double> u(n - 1);
  for (double& x : u) x = rng.uniform();
  std::sort(u.begin(), u.end());
  // Sum of log ratios and ratios over the n matched gaps.
  double prev_u = 0.0, prev_g = 0.0, sum_ratio = 0.0, sum_log = 0.0;
  for (std::size_t i = 0; i <= u.size(); ++i) {
    const double cu = i < u.size() ? u[i] : 1.0;
    const double cg = i < u.size() ? model.quantile(cu) : 1.0;
    const double du = cu - prev_u, dg = cg - prev_g;
    if (!(du > 0.0) || !(dg > 0.0)) throw NumericalError("degenerate gap");
    const double ratio = dg / du;
    sum_ratio += ratio;
    sum_log += std::log(ratio);
    prev_u = cu;
    prev_g = cg;
  }
  const double nn = static_cast<double>(n);
  CoupledCost out;
  out.term1 = std::log(sum_ratio / nn);
  out.term2 = -sum_log / nn;
  out.cost = out.term1 + out.term2;
  return out;
}

std::vector<Theorem6Row> theorem6_experiment(const GapModel& model, const std::vector<std::size_t>& ns,
                                             std::size_t replicas, std::uint64_t seed) {
  if (ns.empty() || replicas == 0) throw ValidationError("empty experiment grid");
  const std::size_t jobs = ns.size() * replicas;
  std::vector<CoupledCost> draws(jobs);
  parallel_for(jobs, [&](std::size_t job) {
    const std::size_t n = ns[job / replicas];
    RandomStream rng(seed, "theorem6/n=" + std::to_string(n), job % replicas);
    draws[job] = coupled_cost_sample(model, n, rng);
  });
  const double bound = model.entropy_bound();
  std::vector<Theorem6Row> rows;
  for (std::size_t k = 0; k < ns.size(); ++k) {
    std::vector<double> c, t1, t1_abs, t2;
    for (std::size_t r = 0; r < replicas; ++r) {
      const auto& d = draws[k * replicas + r];
      c.push_back(d.cost);
      t1.push_back(d.term1);
      t1_abs.push_back(std::abs(d.term1));
      t2.push_back(d.term2);
    }
    Theorem6Row row;
    row.n = ns[k];
    row.replicas = replicas;
    row.mean_cost = stats::mean(c);
    row.cost_standard_error = stats::standard_error(c);
    row.mean_term1 = stats::mean(t1);
    row.median_term1 = stats::median(t1);
    row.median_abs_term1 = stats::median(t1_abs);
    row.mean_term2 = stats::mean(t2);
    row.quadrature_bound = bound;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace dtrans
