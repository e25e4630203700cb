#include "dtrans/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/special_functions/gamma.hpp>

#include "dtrans/interpolation.hpp"
#include "dtrans/rng.hpp"
#include "dtrans/stats.hpp"

namespace dtrans {

DensityModel DensityModel::uniform(std::size_t n) {
  if (n < 2) throw ValidationError("n must be at least 2");
  return dirichlet(Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n)));
}

DensityModel DensityModel::dirichlet(Eigen::VectorXd alpha) {
  if (alpha.size() < 2 || alpha.minCoeff() <= 0.0) throw ValidationError("bad Dirichlet parameters");
  double log_norm = boost::math::lgamma(alpha.sum());
  for (Eigen::Index i = 0; i < alpha.size(); ++i) log_norm -= boost::math::lgamma(alpha[i]);
  DensityModel m;
  m.n = static_cast<std::size_t>(alpha.size());
  m.name = alpha.isApproxToConstant(1.0) ? "uniform" : "dirichlet";
  // Lebesgue density prod p^(a-1) times the mu0 factor prod p.
  m.log_density = [alpha, log_norm](const SimplexPoint& p) {
    if (static_cast<Eigen::Index>(p.dim()) != alpha.size()) {
      throw DimensionMismatch(p.dim(), static_cast<std::size_t>(alpha.size()));
    }
    return log_norm + alpha.dot(p.log());
  };
  m.sample = [alpha](RandomStream& rng) { return rng.dirichlet(alpha); };
  return m;
}

namespace {

Eigen::VectorXd weight_ratios(const Generator& g, const SimplexPoint& r) {
  const Eigen::VectorXd pi = portfolio_map(g, r);
  return pi.cwiseQuotient(r.coords());
}

double log_det_spd(const Eigen::MatrixXd& m) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) throw NumericalError("chart matrix L~ is not positive definite");
  const Eigen::VectorXd d = llt.matrixL().toDenseMatrix().diagonal();
  const double out = 2.0 * d.array().log().sum();
  if (!std::isfinite(out)) throw NumericalError("chart matrix L~ is singular");
  return out;
}

}  // namespace

Eigen::VectorXd u_map(const Generator& g, const SimplexPoint& r, std::size_t drop) {
  if (drop >= r.dim()) throw ValidationError("chart index out of range");
  const Eigen::VectorXd w = weight_ratios(g, r);
  if (!(w[static_cast<Eigen::Index>(drop)] > 0.0)) throw NumericalError("u-map denominator is not positive");
  Eigen::VectorXd u(static_cast<Eigen::Index>(r.dim() - 1));
  Eigen::Index k = 0;
  for (std::size_t i = 0; i < r.dim(); ++i) {
    if (i != drop) u[k++] = w[static_cast<Eigen::Index>(i)] / w[static_cast<Eigen::Index>(drop)];
  }
  return u;
}

Eigen::VectorXd u_map(const Generator& g, const SimplexPoint& r) { return u_map(g, r, r.dim() - 1); }

SimplexPoint q_of_u(const Eigen::VectorXd& u, std::size_t drop) {
  const auto n = static_cast<std::size_t>(u.size()) + 1;
  if (drop >= n) throw ValidationError("chart index out of range");
  Eigen::VectorXd q(static_cast<Eigen::Index>(n));
  const double z = 1.0 + u.sum();
  Eigen::Index k = 0;
  for (std::size_t i = 0; i < n; ++i) q[static_cast<Eigen::Index>(i)] = (i == drop) ? 1.0 / z : u[k++] / z;
  return SimplexPoint(q);
}

SimplexPoint q_of_u(const Eigen::VectorXd& u) {
  return q_of_u(u, static_cast<std::size_t>(u.size()));
}

double jacobian_det_u(const Generator& g, const SimplexPoint& r, std::size_t drop) {
  const Eigen::VectorXd pi = portfolio_map(g, r);
  const double n = static_cast<double>(r.dim());
  const auto k = static_cast<Eigen::Index>(drop);
  const double log_det = log_det_spd(l_matrix_chart(g, r, drop));
  return std::exp(n * (std::log(r[drop]) - std::log(pi[k])) + log_det);
}

double jacobian_det_u(const Generator& g, const SimplexPoint& r) {
  return jacobian_det_u(g, r, r.dim() - 1);
}

double inversion_jacobian(const SimplexPoint& p) {
  const SimplexPoint r = invert(p);
  return std::exp(r.log().sum() - p.log().sum());
}

MongeAmpere monge_ampere_density(const DensityModel& model, const GeneratorPtr& phi1, double t,
                                 const SimplexPoint& p, std::size_t drop) {
  const GeneratorPtr gt = generator_at(phi1, t);
  const SimplexPoint r = invert(p);
  const Eigen::VectorXd pi = portfolio_map(*gt, r);
  if (pi.minCoeff() <= 0.0) throw NumericalError("portfolio weight on the boundary");
  const double log_det = log_det_spd(l_matrix_chart(*gt, r, drop));
  const double value =
      model.log_density(p) + pi.array().log().sum() - log_det - 2.0 * r.log().sum();
  return {odot(p, SimplexPoint(pi)), value};
}

MongeAmpere monge_ampere_density(const DensityModel& model, const GeneratorPtr& phi1, double t,
                                 const SimplexPoint& p) {
  return monge_ampere_density(model, phi1, t, p, p.dim() - 1);
}

EntropyEstimate entropy_of_pushforward(const DensityModel& model, const GeneratorPtr& phi1,
                                       double t, std::size_t samples, std::uint64_t seed) {
  if (samples < 2) throw ValidationError("entropy estimate needs at least two samples");
  RandomStream rng(seed, "entropy");
  std::vector<double> v;
  v.reserve(samples);
  for (std::size_t m = 0; m < samples; ++m) {
    v.push_back(monge_ampere_density(model, phi1, t, model.sample(rng)).log_density);
  }
  return {stats::mean(v), stats::standard_error(v)};
}

Theorem4Report theorem4_experiment(const DensityModel& model, const GeneratorPtr& phi1,
                                   const std::vector<double>& times, std::size_t samples,
                                   std::uint64_t seed) {
  if (times.size() < 3) throw ValidationError("need at least three times");
  if (samples < 2) throw ValidationError("need at least two samples");
  RandomStream rng(seed, "theorem4");
  std::vector<SimplexPoint> ps;
  ps.reserve(samples);
  for (std::size_t m = 0; m < samples; ++m) ps.push_back(model.sample(rng));

  const std::size_t T = times.size();
  const double n = static_cast<double>(model.n);
  Theorem4Report rep;
  rep.times = times;
  // log det per (time, sample) drives both the aggregate and per-sample checks.
  std::vector<std::vector<double>> neg_log_det(T, std::vector<double>(samples));
  for (std::size_t k = 0; k < T; ++k) {
    const GeneratorPtr gt = generator_at(phi1, times[k]);
    std::vector<double> ent(samples);
    double hsum = 0.0, bsum = 0.0;
    for (std::size_t m = 0; m < samples; ++m) {
      const SimplexPoint& p = ps[m];
      const SimplexPoint r = invert(p);
      const Eigen::VectorXd pi = portfolio_map(*gt, r);
      if (pi.minCoeff() <= 0.0) throw NumericalError("portfolio weight on the boundary");
      const double log_det = log_det_spd(l_matrix_chart(*gt, r));
      neg_log_det[k][m] = -log_det;
      ent[m] = model.log_density(p) + pi.array().log().sum() - log_det - 2.0 * r.log().sum();
      hsum += relative_entropy(SimplexPoint::barycenter(model.n), SimplexPoint(pi));
      bsum -= log_det;
    }
    rep.curve_a.push_back(stats::mean(ent) + n * hsum / static_cast<double>(samples));
    rep.curve_b.push_back(bsum / static_cast<double>(samples));
    rep.standard_error = std::max(rep.standard_error, stats::standard_error(ent));
  }
  rep.min_sample_second_difference = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k + 1 < T; ++k) {
    const double h0 = times[k] - times[k - 1], h1 = times[k + 1] - times[k];
    auto d2 = [&](double a, double b, double c) {
      return 2.0 * ((c - b) / h1 - (b - a) / h0) / (h0 + h1) * h0 * h1;
    };
    rep.second_differences.push_back(d2(rep.curve_b[k - 1], rep.curve_b[k], rep.curve_b[k + 1]));
    for (std::size_t m = 0; m < samples; ++m) {
      rep.min_sample_second_difference =
          std::min(rep.min_sample_second_difference,
                   d2(neg_log_det[k - 1][m], neg_log_det[k][m], neg_log_det[k + 1][m]));
    }
  }
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t k = 0; k < T; ++k) {
    const double d = rep.curve_a[k] - rep.curve_b[k];
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  rep.difference_range = hi - lo;
  rep.convex = rep.min_sample_second_difference >= -1e-10 &&
               *std::min_element(rep.second_differences.begin(), rep.second_differences.end()) >= -1e-10;
  rep.constant_difference = rep.difference_range <= 5.0 * rep.standard_error;
  return rep;
}

LownerResidual lowner_concavity_identity(const GeneratorPtr& phi1, const SimplexPoint& r, double t1,
                                         double t2, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ValidationError("alpha must lie in [0, 1]");
  const double t = (1.0 - alpha) * t1 + alpha * t2;
  const GeneratorPtr g1 = generator_at(phi1, t1), g2 = generator_at(phi1, t2), gt = generator_at(phi1, t);
  const Eigen::MatrixXd j = chart_basis(r.dim(), r.dim() - 1);
  const Eigen::VectorXd d = j.transpose() * (g1->gradient(r.coords()) - g2->gradient(r.coords()));
  LownerResidual out;
  out.residual = l_matrix_chart(*gt, r) -
                 ((1.0 - alpha) * l_matrix_chart(*g1, r) + alpha * l_matrix_chart(*g2, r));
  out.predicted = alpha * (1.0 - alpha) * d * d.transpose();
  out.max_abs_error = (out.residual - out.predicted).cwiseAbs().maxCoeff();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (out.residual + out.residual.transpose()),
                                                    Eigen::EigenvaluesOnly);
  out.min_eigenvalue = es.eigenvalues().minCoeff();
  return out;
}

}  // namespace dtrans
