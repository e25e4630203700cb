#include "dtrans/rng.hpp"

#include <cmath>

#include "dtrans/errors.hpp"
#include "dtrans/simplex.hpp"

namespace dtrans {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::string_view name, std::uint64_t index) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a over the name
  for (unsigned char c : name) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return splitmix64(splitmix64(master ^ splitmix64(h)) + index);
}

std::size_t RandomStream::below(std::size_t n) {
  if (n == 0) throw ValidationError("below(0)");
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return static_cast<std::size_t>(x % n);
}

double RandomStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double m = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * m;
  has_spare_ = true;
  return u * m;
}

double RandomStream::log_gamma(double shape) {
  if (!(shape > 0.0)) throw ValidationError("gamma shape must be positive");
  // Marsaglia-Tsang; shapes below one are boosted: G(a) = G(a+1) U^(1/a).
  double boost = 0.0;
  double a = shape;
  if (a < 1.0) {
    boost = std::log(uniform()) / a;
    a += 1.0;
  }
  const double d = a - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x ||
        std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
      return std::log(d * v) + boost;
    }
  }
}

double RandomStream::gamma(double shape) { return std::exp(log_gamma(shape)); }

SimplexPoint RandomStream::dirichlet(const Eigen::VectorXd& alpha) {
  Eigen::VectorXd logits(alpha.size());
  for (Eigen::Index i = 0; i < alpha.size(); ++i) logits[i] = log_gamma(alpha[i]);
  return SimplexPoint::from_logits(logits);
}

}  // namespace dtrans
