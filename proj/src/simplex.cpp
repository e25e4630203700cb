#include "dtrans/simplex.hpp"

#include <cmath>
#include <string>

#include "dtrans/rng.hpp"

namespace dtrans {

namespace {

void check_same_dim(const SimplexPoint& p, const SimplexPoint& q) {
  if (p.dim() != q.dim()) throw DimensionMismatch(p.dim(), q.dim());
}

double log_sum_exp(const Eigen::VectorXd& x) {
  const double m = x.maxCoeff();
  return m + std::log((x.array() - m).exp().sum());
}

}  // namespace

SimplexPoint::SimplexPoint(Eigen::VectorXd coords) : coords_(std::move(coords)) {
  if (coords_.size() < 2) throw ValidationError("simplex point needs n >= 2");
  for (Eigen::Index i = 0; i < coords_.size(); ++i) {
    if (!(coords_[i] > kMinCoordinate) || !std::isfinite(coords_[i])) {
      throw ValidationError("simplex coordinate " + std::to_string(i) +
                            " is not a finite positive number");
    }
  }
  coords_ /= coords_.sum();
}

SimplexPoint::SimplexPoint(std::initializer_list<double> coords)
    : SimplexPoint(Eigen::Map<const Eigen::VectorXd>(coords.begin(),
                                                    static_cast<Eigen::Index>(coords.size()))) {}

SimplexPoint SimplexPoint::from_logits(const Eigen::VectorXd& logits) {
  if (logits.size() < 2) throw ValidationError("simplex point needs n >= 2");
  Eigen::VectorXd w = (logits.array() - logits.maxCoeff()).exp().matrix();
  return SimplexPoint(w);
}

SimplexPoint SimplexPoint::barycenter(std::size_t n) {
  return SimplexPoint(Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), 1.0));
}

SimplexPoint odot(const SimplexPoint& p, const SimplexPoint& q) {
  check_same_dim(p, q);
  return SimplexPoint::from_logits(p.log() + q.log());
}

SimplexPoint invert(const SimplexPoint& p) { return SimplexPoint::from_logits(-p.log()); }

SimplexPoint power(double lambda, const SimplexPoint& p) {
  if (!std::isfinite(lambda)) throw ValidationError("power exponent must be finite");
  return SimplexPoint::from_logits(lambda * p.log());
}

double cost_exp_coords(const Eigen::VectorXd& theta, const Eigen::VectorXd& phi) {
  if (theta.size() != phi.size()) {
    throw DimensionMismatch(static_cast<std::size_t>(theta.size()),
                            static_cast<std::size_t>(phi.size()));
  }
  const Eigen::VectorXd d = theta - phi;  // log(q_i / p_i)
  const double n = static_cast<double>(d.size());
  const double c = log_sum_exp(d) - std::log(n) - d.mean();
  return c < 0.0 ? 0.0 : c;
}

double cost(const SimplexPoint& p, const SimplexPoint& q) {
  check_same_dim(p, q);
  return cost_exp_coords(exp_coords(p), exp_coords(q));
}

double relative_entropy(const SimplexPoint& p, const SimplexPoint& q) {
  check_same_dim(p, q);
  double h = 0.0;
  for (std::size_t i = 0; i < p.dim(); ++i) h += p[i] * (std::log(p[i]) - std::log(q[i]));
  return h < 0.0 ? 0.0 : h;
}

double mu0_log_density(const SimplexPoint& p) { return -p.log().sum(); }

Eigen::VectorXd exp_coords(const SimplexPoint& p) { return -p.log(); }

SimplexPoint from_exp_coords(const Eigen::VectorXd& theta) {
  return SimplexPoint::from_logits(-theta);
}

Eigen::VectorXd alr(const SimplexPoint& p) {
  const Eigen::VectorXd lp = p.log();
  const Eigen::Index m = lp.size() - 1;
  return (lp.head(m).array() - lp[m]).matrix();
}

SimplexPoint alr_inverse(const Eigen::VectorXd& y) {
  Eigen::VectorXd logits(y.size() + 1);
  logits.head(y.size()) = y;
  logits[y.size()] = 0.0;
  return SimplexPoint::from_logits(logits);
}

TruncatedMu0Sampler::TruncatedMu0Sampler(std::size_t n, double eps) : n_(n), eps_(eps) {
  if (n < 2) throw ValidationError("n must be at least 2");
  const double top = 1.0 - static_cast<double>(n - 1) * eps;
  if (!(eps > 0.0) || !(top > eps)) throw ValidationError("truncation eps out of range");
  half_width_ = std::log(top / eps);
}

SimplexPoint TruncatedMu0Sampler::operator()(RandomStream& rng) const {
  Eigen::VectorXd y(static_cast<Eigen::Index>(n_ - 1));
  for (;;) {
    for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = half_width_ * (2.0 * rng.uniform() - 1.0);
    SimplexPoint p = alr_inverse(y);
    if (p.coords().minCoeff() >= eps_) return p;
  }
}

TruncatedUniformSampler::TruncatedUniformSampler(std::size_t n, double eps) : n_(n), eps_(eps) {
  if (n < 2) throw ValidationError("n must be at least 2");
  if (!(eps >= 0.0) || !(static_cast<double>(n) * eps < 1.0)) {
    throw ValidationError("truncation eps out of range");
  }
}

SimplexPoint TruncatedUniformSampler::operator()(RandomStream& rng) const {
  // {p_i >= eps} is a scaled copy of the simplex, so the uniform law maps over.
  Eigen::VectorXd e(static_cast<Eigen::Index>(n_));
  for (Eigen::Index i = 0; i < e.size(); ++i) e[i] = rng.exponential();
  e /= e.sum();
  const double scale = 1.0 - static_cast<double>(n_) * eps_;
  return SimplexPoint((eps_ + scale * e.array()).matrix());
}

}  // namespace dtrans
