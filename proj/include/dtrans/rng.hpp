#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace dtrans {

class SimplexPoint;

/// Mixes (master seed, stream name, index) into an independent 64-bit seed.
std::uint64_t derive_seed(std::uint64_t master, std::string_view name, std::uint64_t index = 0);

/// Seeded random stream with hand-rolled variate generators, so the same
/// seed produces the same numbers on every standard library.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}
  RandomStream(std::uint64_t master, std::string_view name, std::uint64_t index = 0)
      : engine_(derive_seed(master, name, index)) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on the open interval (0, 1).
  double uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

  /// Uniform integer in [0, n).
  std::size_t below(std::size_t n);

  double normal();

  /// Log of a Gamma(shape, 1) variate; stays finite for very small shapes.
  double log_gamma(double shape);
  double gamma(double shape);
  double exponential() { return -std::log(uniform()); }

  /// Dirichlet(alpha) draw assembled from log-gamma variates.
  SimplexPoint dirichlet(const Eigen::VectorXd& alpha);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace dtrans
