#include "dtrans/portfolio.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>

#include "dtrans/rng.hpp"

namespace dtrans {

namespace {

class LogMean final : public Generator {
 public:
  explicit LogMean(double lambda) : lambda_(lambda) {}
  std::string name() const override {
    if (lambda_ == 1.0) return "phi0";
    std::ostringstream os;
    os << "power:" << lambda_;
    return os.str();
  }
  double value(const Eigen::VectorXd& r) const override {
    return lambda_ * r.array().log().mean();
  }
  Eigen::VectorXd gradient(const Eigen::VectorXd& r) const override {
    return (lambda_ / static_cast<double>(r.size())) * r.cwiseInverse();
  }
  Eigen::MatrixXd hessian(const Eigen::VectorXd& r) const override {
    const double s = -lambda_ / static_cast<double>(r.size());
    return (s * r.array().square().inverse()).matrix().asDiagonal();
  }

 private:
  double lambda_;
};

class Affine final : public Generator {
 public:
  explicit Affine(Eigen::VectorXd b) : b_(std::move(b)) {}
  std::string name() const override {
    std::ostringstream os;
    os << "affine:";
    for (Eigen::Index i = 0; i < b_.size(); ++i) os << (i ? "," : "") << b_[i];
    return os.str();
  }
  double value(const Eigen::VectorXd& r) const override { return std::log(check(r).dot(b_)); }
  Eigen::VectorXd gradient(const Eigen::VectorXd& r) const override {
    return b_ / check(r).dot(b_);
  }
  Eigen::MatrixXd hessian(const Eigen::VectorXd& r) const override {
    const Eigen::VectorXd g = gradient(r);
    return -g * g.transpose();
  }

 private:
  const Eigen::VectorXd& check(const Eigen::VectorXd& r) const {
    if (r.size() != b_.size()) {
      throw DimensionMismatch(static_cast<std::size_t>(r.size()),
                              static_cast<std::size_t>(b_.size()));
    }
    return r;
  }
  Eigen::VectorXd b_;
};

class Mixture final : public Generator {
 public:
  Mixture(double t, GeneratorPtr a, GeneratorPtr b) : t_(t), a_(std::move(a)), b_(std::move(b)) {}
  std::string name() const override {
    std::ostringstream os;
    os << "mix:" << t_ << "," << a_->name() << "," << b_->name();
    return os.str();
  }
  double value(const Eigen::VectorXd& r) const override {
    return (1.0 - t_) * a_->value(r) + t_ * b_->value(r);
  }
  Eigen::VectorXd gradient(const Eigen::VectorXd& r) const override {
    return (1.0 - t_) * a_->gradient(r) + t_ * b_->gradient(r);
  }
  Eigen::MatrixXd hessian(const Eigen::VectorXd& r) const override {
    return (1.0 - t_) * a_->hessian(r) + t_ * b_->hessian(r);
  }

 private:
  double t_;
  GeneratorPtr a_;
  GeneratorPtr b_;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

bool parse_number(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && std::isfinite(out);
}

double require_number(const std::string& s, const std::string& spec) {
  double v;
  if (!parse_number(s, v)) throw ValidationError("bad number '" + s + "' in generator '" + spec + "'");
  return v;
}

GeneratorPtr parse_tokens(const std::vector<std::string>& tok, std::size_t& pos,
                          const std::string& spec) {
  if (pos >= tok.size()) throw ValidationError("truncated generator spec '" + spec + "'");
  const std::string& head = tok[pos++];
  if (head == "phi0") return make_phi0();
  if (head.rfind("power:", 0) == 0) return make_power(require_number(head.substr(6), spec));
  if (head.rfind("affine:", 0) == 0) {
    std::vector<double> b{require_number(head.substr(7), spec)};
    double v;
    while (pos < tok.size() && parse_number(tok[pos], v)) {
      b.push_back(v);
      ++pos;
    }
    return make_affine(Eigen::Map<Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size())));
  }
  if (head.rfind("mix:", 0) == 0) {
    const double t = require_number(head.substr(4), spec);
    GeneratorPtr a = parse_tokens(tok, pos, spec);
    GeneratorPtr b = parse_tokens(tok, pos, spec);
    return make_mixture(t, std::move(a), std::move(b));
  }
  throw ValidationError("unknown generator '" + head + "'");
}

Eigen::MatrixXd tangent_basis(std::size_t n) {
  // Orthonormal basis of the hyperplane sum v_i = 0.
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n),
                                                static_cast<Eigen::Index>(n));
  a.col(0).setConstant(1.0);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ();
  return q.rightCols(static_cast<Eigen::Index>(n - 1));
}

}  // namespace

GeneratorPtr make_phi0() { return std::make_shared<LogMean>(1.0); }

GeneratorPtr make_power(double lambda) {
  if (!(lambda > 0.0 && lambda <= 1.0)) throw ValidationError("power parameter must lie in (0, 1]");
  return std::make_shared<LogMean>(lambda);
}

GeneratorPtr make_affine(Eigen::VectorXd b) {
  if (b.size() < 2) throw ValidationError("affine generator needs at least two weights");
  for (Eigen::Index i = 0; i < b.size(); ++i) {
    if (!(b[i] > 0.0)) throw ValidationError("affine weights must be positive");
  }
  return std::make_shared<Affine>(std::move(b));
}

GeneratorPtr make_mixture(double t, GeneratorPtr a, GeneratorPtr b) {
  if (!(t >= 0.0 && t <= 1.0)) throw ValidationError("mixture weight must lie in [0, 1]");
  if (!a || !b) throw ValidationError("mixture needs two generators");
  return std::make_shared<Mixture>(t, std::move(a), std::move(b));
}

GeneratorPtr parse_generator(const std::string& spec) {
  const std::vector<std::string> tok = split(spec, ',');
  std::size_t pos = 0;
  GeneratorPtr g = parse_tokens(tok, pos, spec);
  if (pos != tok.size()) throw ValidationError("trailing tokens in generator '" + spec + "'");
  return g;
}

std::vector<std::string> builtin_generators(std::size_t n) {
  std::string affine = "affine:";
  for (std::size_t i = 0; i < n; ++i) affine += (i ? "," : "") + std::to_string(i + 1);
  return {"phi0",
          "power:0.5",
          "power:0.25",
          affine,
          "mix:0.5,phi0,power:0.5",
          "mix:0.5,power:0.5," + affine};
}

Eigen::VectorXd portfolio_map(const Generator& g, const SimplexPoint& r) {
  const Eigen::VectorXd& x = r.coords();
  const Eigen::VectorXd grad = g.gradient(x);
  if (grad.size() != x.size()) {
    throw DimensionMismatch(static_cast<std::size_t>(grad.size()), r.dim());
  }
  Eigen::VectorXd pi = (x.array() * (1.0 + grad.array() - grad.dot(x))).matrix();
  for (Eigen::Index i = 0; i < pi.size(); ++i) {
    if (pi[i] < 0.0) {
      if (pi[i] < -1e-12) throw NumericalError("portfolio weight is negative");
      pi[i] = 0.0;
    }
  }
  return pi / pi.sum();
}

SimplexPoint transport_map(const Generator& g, const SimplexPoint& p) {
  const Eigen::VectorXd pi = portfolio_map(g, invert(p));
  if (pi.minCoeff() <= 0.0) throw NumericalError("portfolio weight on the boundary");
  return odot(p, SimplexPoint(pi));
}

SimplexPoint transport_map_ratio(const Generator& g, const SimplexPoint& p) {
  const SimplexPoint r = invert(p);
  const Eigen::VectorXd pi = portfolio_map(g, r);
  if (pi.minCoeff() <= 0.0) throw NumericalError("portfolio weight on the boundary");
  return SimplexPoint(pi.cwiseQuotient(r.coords()));
}

double l_divergence(const Generator& g, const SimplexPoint& r, const SimplexPoint& r_prime) {
  if (r.dim() != r_prime.dim()) throw DimensionMismatch(r.dim(), r_prime.dim());
  const double arg = 1.0 + g.gradient(r_prime.coords()).dot(r.coords() - r_prime.coords());
  if (!(arg > 0.0)) throw NumericalError("L-divergence log argument is not positive");
  return std::log(arg) - (g.value(r.coords()) - g.value(r_prime.coords()));
}

double l_divergence_portfolio(const Generator& g, const SimplexPoint& r,
                              const SimplexPoint& r_prime) {
  if (r.dim() != r_prime.dim()) throw DimensionMismatch(r.dim(), r_prime.dim());
  const Eigen::VectorXd pi = portfolio_map(g, r_prime);
  const double arg = pi.dot(r.coords().cwiseQuotient(r_prime.coords()));
  if (!(arg > 0.0)) throw NumericalError("L-divergence log argument is not positive");
  return std::log(arg) - (g.value(r.coords()) - g.value(r_prime.coords()));
}

Eigen::MatrixXd l_matrix(const Generator& g, const SimplexPoint& r) {
  const Eigen::VectorXd grad = g.gradient(r.coords());
  Eigen::MatrixXd l = -g.hessian(r.coords()) - grad * grad.transpose();
  return 0.5 * (l + l.transpose());
}

Eigen::MatrixXd chart_basis(std::size_t n, std::size_t drop) {
  if (drop >= n) throw ValidationError("chart index out of range");
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                            static_cast<Eigen::Index>(n - 1));
  Eigen::Index col = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i == drop) continue;
    j(static_cast<Eigen::Index>(i), col) = 1.0;
    j(static_cast<Eigen::Index>(drop), col) = -1.0;
    ++col;
  }
  return j;
}

Eigen::MatrixXd l_matrix_chart(const Generator& g, const SimplexPoint& r, std::size_t drop) {
  const Eigen::MatrixXd j = chart_basis(r.dim(), drop);
  return j.transpose() * l_matrix(g, r) * j;
}

Eigen::MatrixXd l_matrix_chart(const Generator& g, const SimplexPoint& r) {
  return l_matrix_chart(g, r, r.dim() - 1);
}

double mcm_check(const Generator& g, const std::vector<SimplexPoint>& cycle) {
  if (cycle.empty()) throw ValidationError("empty cycle");
  double total = 0.0;
  for (std::size_t s = 0; s < cycle.size(); ++s) {
    const SimplexPoint& cur = cycle[s];
    const SimplexPoint& nxt = cycle[(s + 1) % cycle.size()];
    const Eigen::VectorXd pi = portfolio_map(g, cur);
    total += std::log(pi.dot(nxt.coords().cwiseQuotient(cur.coords())));
  }
  return total;
}

RegularityEstimate estimate_regularity(const Generator& g, std::size_t n, double eps,
                                       std::size_t pairs, std::uint64_t seed) {
  if (pairs == 0) throw ValidationError("regularity estimate needs at least one pair");
  const TruncatedUniformSampler sampler(n, eps);
  RandomStream rng(seed, "regularity");
  const Eigen::MatrixXd basis = tangent_basis(n);
  const double d_min = 1e-3;
  const double d_max = std::sqrt(2.0) * (1.0 - static_cast<double>(n) * eps);

  RegularityEstimate est;
  est.alpha = std::numeric_limits<double>::infinity();
  est.c2 = std::numeric_limits<double>::infinity();

  auto absorb_point = [&](const SimplexPoint& q) {
    const Eigen::VectorXd& x = q.coords();
    const double e_phi = std::exp(g.value(x));
    const Eigen::VectorXd grad = g.gradient(x);
    const Eigen::MatrixXd neg_hess = basis.transpose() * (-g.hessian(x)) * basis;
    const Eigen::MatrixXd exp_l_tangent = basis.transpose() * (e_phi * l_matrix(g, q)) * basis;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es1(neg_hess, Eigen::EigenvaluesOnly);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es2(exp_l_tangent, Eigen::EigenvaluesOnly);
    est.c1 = std::max(est.c1, es1.eigenvalues().maxCoeff());
    est.c2 = std::min(est.c2, es2.eigenvalues().minCoeff());
    est.c3 = std::max(est.c3, e_phi * (basis.transpose() * grad).norm());
    est.m = std::max(est.m, e_phi);
  };

  for (std::size_t k = 0; k < pairs; ++k) {
    // Strata cycle through equal slices of log-distance.
    const double lo = std::log(d_min);
    const double span = std::log(d_max) - lo;
    const double u = (static_cast<double>(k % 64) + rng.uniform()) / 64.0;
    double dist = std::exp(lo + span * u);
    const SimplexPoint q = sampler(rng);
    Eigen::VectorXd v(static_cast<Eigen::Index>(n - 1));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.normal();
    const Eigen::VectorXd dir = basis * v.normalized();
    // Shrink toward q until the partner stays inside the truncated domain.
    Eigen::VectorXd x2 = q.coords() + dist * dir;
    while (x2.minCoeff() < eps && dist > d_min * 1e-3) {
      dist *= 0.5;
      x2 = q.coords() + dist * dir;
    }
    if (x2.minCoeff() < eps) continue;
    const SimplexPoint q2(x2);
    const double ratio = l_divergence(g, q2, q) / (q2.coords() - q.coords()).squaredNorm();
    est.alpha = std::min(est.alpha, ratio);
    est.alpha_prime = std::max(est.alpha_prime, ratio);
    absorb_point(q);
    absorb_point(q2);
    ++est.pairs;
  }
  if (est.pairs == 0) throw NumericalError("no admissible regularity pairs");
  est.alpha = std::max(est.alpha, 0.0);
  est.alpha_lemma8 = est.c2 / (est.m + est.c3);
  est.degenerate = !(est.alpha > 1e-10);
  return est;
}

}  // namespace dtrans
