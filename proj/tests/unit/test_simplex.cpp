#include <doctest.h>

#include <cmath>
#include <vector>

#include "dtrans/rng.hpp"
#include "dtrans/simplex.hpp"
#include "dtrans/stats.hpp"
#include "support/oracles.hpp"

using namespace dtrans;

namespace {

void check_point(const SimplexPoint& p, std::initializer_list<double> expected, double tol = 1e-14) {
  REQUIRE(p.dim() == expected.size());
  std::size_t i = 0;
  for (double e : expected) CHECK(p[i++] == doctest::Approx(e).epsilon(tol));
}

}  // namespace

TEST_CASE("construction normalizes and rejects the boundary") {
  const SimplexPoint p{1.0, 3.0};
  check_point(p, {0.25, 0.75});
  CHECK_THROWS_AS(SimplexPoint({0.0, 1.0}), ValidationError);
  CHECK_THROWS_AS(SimplexPoint({-0.1, 1.1}), ValidationError);
  CHECK_THROWS_AS(SimplexPoint({1.0}), ValidationError);
  CHECK_THROWS_AS(SimplexPoint({NAN, 1.0}), ValidationError);
}

TEST_CASE("odot") {
  check_point(odot({0.5, 0.5}, {0.25, 0.75}), {0.25, 0.75});
  check_point(odot({0.2, 0.8}, {0.75, 0.25}), {3.0 / 7.0, 4.0 / 7.0});
  CHECK_THROWS_AS(odot({0.5, 0.5}, {0.2, 0.3, 0.5}), DimensionMismatch);
  RandomStream rng(1);
  for (int k = 0; k < 50; ++k) {
    const SimplexPoint p = oracle::random_point(rng, 4);
    const SimplexPoint e = odot(p, invert(p));
    for (std::size_t i = 0; i < 4; ++i) CHECK(e[i] == doctest::Approx(0.25).epsilon(1e-12));
  }
}

TEST_CASE("invert") {
  check_point(invert(SimplexPoint::barycenter(3)), {1.0 / 3, 1.0 / 3, 1.0 / 3});
  check_point(invert({0.25, 0.75}), {0.75, 0.25});
  check_point(invert({0.2, 0.3, 0.5}), {15.0 / 31, 10.0 / 31, 6.0 / 31});
  RandomStream rng(2);
  const SimplexPoint p = oracle::random_point(rng, 5);
  CHECK((invert(invert(p)).coords() - p.coords()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("power") {
  const SimplexPoint p{0.25, 0.75};
  check_point(power(1.0, p), {0.25, 0.75});
  check_point(power(0.0, p), {0.5, 0.5});
  check_point(power(2.0, p), {0.1, 0.9});
  // 0.3^500 underflows, the normalized coordinate does not
  const SimplexPoint big = power(500.0, SimplexPoint{0.3, 0.7});
  CHECK(big[0] == doctest::Approx(std::exp(500.0 * std::log(3.0 / 7.0))).epsilon(1e-10));
  CHECK_THROWS_AS(power(1e4, SimplexPoint{0.4, 0.6}), ValidationError);
}

TEST_CASE("cost") {
  CHECK(cost({0.5, 0.5}, {0.25, 0.75}) == doctest::Approx(0.5 * std::log(4.0 / 3.0)).epsilon(1e-14));
  CHECK(cost({0.5, 0.5}, {0.25, 0.75}) == doctest::Approx(0.1438410).epsilon(1e-6));
  CHECK_THROWS_AS(cost({0.5, 0.5}, {0.2, 0.3, 0.5}), DimensionMismatch);
  RandomStream rng(3);
  for (int k = 0; k < 200; ++k) {
    const std::size_t n = 2 + rng.below(6);
    const SimplexPoint p = oracle::random_point(rng, n, 1e-3), q = oracle::random_point(rng, n, 1e-3);
    CHECK(std::abs(cost(p, p)) <= 1e-14);
    CHECK(cost(p, q) > 0.0);
    CHECK(cost(p, q) == doctest::Approx(oracle::naive_cost(p, q)).epsilon(1e-10).scale(1e-12));
    CHECK(std::abs(cost(q, p) - cost(invert(p), invert(q))) <= 1e-12);
    const double h = relative_entropy(SimplexPoint::barycenter(n), odot(q, invert(p)));
    CHECK(std::abs(cost(p, q) - h) <= 1e-12);
    CHECK(std::abs(cost_exp_coords(exp_coords(p), exp_coords(q)) - cost(p, q)) <= 1e-12);
    const double bound = (1.0 + 1.0 / n) * (exp_coords(p).cwiseAbs().sum() + exp_coords(q).cwiseAbs().sum());
    CHECK(cost(p, q) <= bound);
  }
}

TEST_CASE("cost stays finite near the boundary") {
  const SimplexPoint p{1e-200, 1.0}, q{1.0, 1e-200};
  const double c = cost(p, q);
  CHECK(std::isfinite(c));
  CHECK(c == doctest::Approx(oracle::naive_cost(p, q)).epsilon(1e-10));
}

TEST_CASE("relative entropy") {
  const SimplexPoint p{0.25, 0.75};
  CHECK(relative_entropy(p, p) == 0.0);
  CHECK(relative_entropy(SimplexPoint::barycenter(2), p) == doctest::Approx(0.1438410).epsilon(1e-6));
  // decreasing to zero along a ray towards the barycenter
  const Eigen::VectorXd e = SimplexPoint::barycenter(3).coords();
  const Eigen::VectorXd pi = SimplexPoint{0.1, 0.3, 0.6}.coords();
  double last = INFINITY;
  for (int k = 20; k >= 0; --k) {
    const double s = k / 20.0;
    const double h = relative_entropy(SimplexPoint::barycenter(3), SimplexPoint(e + s * (pi - e)));
    CHECK(h < last);
    last = h;
  }
  CHECK(std::abs(last) <= 1e-15);
}

TEST_CASE("mu0 log-density") {
  CHECK(mu0_log_density(SimplexPoint::barycenter(2)) == doctest::Approx(2 * std::log(2.0)).epsilon(1e-14));
  CHECK(mu0_log_density({0.25, 0.75}) == doctest::Approx(1.673976).epsilon(1e-6));
}

TEST_CASE("exponential coordinates round trip") {
  RandomStream rng(4);
  for (int k = 0; k < 20; ++k) {
    const SimplexPoint p = oracle::random_point(rng, 6);
    CHECK((from_exp_coords(exp_coords(p)).coords() - p.coords()).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((from_exp_coords(exp_coords(p).array() + 3.7).coords() - p.coords()).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((alr_inverse(alr(p)).coords() - p.coords()).cwiseAbs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("group axioms") {
  RandomStream rng(5);
  for (int k = 0; k < 100; ++k) {
    const SimplexPoint a = oracle::random_point(rng, 4), b = oracle::random_point(rng, 4),
                       c = oracle::random_point(rng, 4);
    const SimplexPoint e = SimplexPoint::barycenter(4);
    CHECK((odot(a, b).coords() - odot(b, a).coords()).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((odot(odot(a, b), c).coords() - odot(a, odot(b, c)).coords()).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((odot(a, e).coords() - a.coords()).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("truncated mu0 sampler respects its domain and the Haar property") {
  const TruncatedMu0Sampler sampler(2, 0.02);
  RandomStream rng(6);
  // In the alr chart y = log(p1/p2) mu0 is Lebesgue, so y is uniform on
  // the truncated interval; compare a histogram.
  const double L = std::log(0.98 / 0.02);
  const int bins = 10, draws = 20000;
  std::vector<double> counts(bins, 0.0);
  for (int k = 0; k < draws; ++k) {
    const SimplexPoint p = sampler(rng);
    REQUIRE(p[0] >= 0.02 - 1e-15);
    REQUIRE(p[1] >= 0.02 - 1e-15);
    const double y = alr(p)[0];
    counts[std::min(bins - 1, static_cast<int>((y + L) / (2 * L) * bins))] += 1.0;
  }
  const std::vector<double> probs(bins, 1.0 / bins);
  CHECK(stats::chi_square_sf(oracle::chi_square(counts, probs), bins - 1) > 0.01);

  // p -> a (.) p is a translation in the chart, so it maps uniform to uniform
  // on the shifted interval.
  const SimplexPoint a{0.3, 0.7};
  const double shift = std::log(0.3 / 0.7);
  std::vector<double> shifted(bins, 0.0);
  for (int k = 0; k < draws; ++k) {
    const double y = alr(odot(a, sampler(rng)))[0] - shift;
    shifted[std::min(bins - 1, static_cast<int>((y + L) / (2 * L) * bins))] += 1.0;
  }
  CHECK(stats::chi_square_sf(oracle::chi_square(shifted, probs), bins - 1) > 0.01);
}

TEST_CASE("truncated uniform sampler") {
  const TruncatedUniformSampler sampler(3, 0.05);
  RandomStream rng(7);
  std::vector<double> first;
  for (int k = 0; k < 20000; ++k) {
    const SimplexPoint p = sampler(rng);
    REQUIRE(p.coords().minCoeff() >= 0.05 - 1e-15);
    first.push_back(p[0]);
  }
  // affine image of the flat Dirichlet: mean stays 1/3
  CHECK(std::abs(stats::mean(first) - 1.0 / 3.0) <= 3 * stats::standard_error(first));
  CHECK_THROWS_AS(TruncatedUniformSampler(3, 0.4), ValidationError);
}
