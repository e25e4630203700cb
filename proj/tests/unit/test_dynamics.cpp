#include <doctest.h>

#include <boost/math/distributions/gamma.hpp>
#include <cmath>
#include <limits>
#include <vector>

#include "dtrans/dynamics.hpp"
#include "dtrans/errors.hpp"
#include "dtrans/rng.hpp"
#include "dtrans/simplex.hpp"
#include "dtrans/stats.hpp"
#include "support/oracles.hpp"

using namespace dtrans;

namespace {

Eigen::VectorXd grid_cdf(std::size_t grid, const std::function<double(double)>& f) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(grid + 1));
  for (std::size_t g = 0; g <= grid; ++g) out[static_cast<Eigen::Index>(g)] = f(static_cast<double>(g) / grid);
  return out;
}

// Piecewise-linear path through the points t_k * pi with uneven speeds.
MonotonePath perturbed_path(const SimplexPoint& pi, std::size_t grid, RandomStream& rng) {
  MonotonePath f;
  f.values.resize(static_cast<Eigen::Index>(grid + 1), static_cast<Eigen::Index>(pi.dim()));
  for (Eigen::Index i = 0; i < f.values.cols(); ++i) {
    const std::size_t pieces = 2 + rng.below(6);
    std::vector<double> speed(pieces);
    for (auto& s : speed) s = 0.2 + rng.uniform();
    Eigen::VectorXd inc(static_cast<Eigen::Index>(grid));
    for (std::size_t g = 0; g < grid; ++g) inc[static_cast<Eigen::Index>(g)] = speed[g * pieces / grid];
    inc *= pi[static_cast<std::size_t>(i)] / inc.sum();
    f.values(0, i) = 0.0;
    for (Eigen::Index g = 0; g < inc.size(); ++g) f.values(g + 1, i) = f.values(g, i) + inc[g];
  }
  return f;
}

MonotonePath smooth_path(const SimplexPoint& pi, std::size_t grid) {
  MonotonePath f;
  f.values.resize(static_cast<Eigen::Index>(grid + 1), static_cast<Eigen::Index>(pi.dim()));
  for (std::size_t g = 0; g <= grid; ++g) {
    const double t = static_cast<double>(g) / grid;
    for (std::size_t i = 0; i < pi.dim(); ++i) {
      const double b = 0.3 + 0.2 * static_cast<double>(i);
      f.values(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(i)) =
          pi[i] * (t + b * std::sin(2 * M_PI * t) / (2 * M_PI));
    }
  }
  return f;
}

}  // namespace

TEST_CASE("projection of measures on (0, 1]") {
  const auto leb = project_measure(grid_cdf(240, [](double t) { return t; }), 3);
  CHECK((leb.weights - Eigen::Vector3d::Constant(1.0 / 3)).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK_FALSE(leb.boundary);

  const auto half = project_measure(grid_cdf(64, [](double t) { return std::min(1.0, 2 * t); }), 2);
  CHECK(half.weights[0] == doctest::Approx(1.0));
  CHECK(half.weights[1] == 0.0);
  CHECK(half.boundary);

  const SimplexPoint pi{0.1, 0.2, 0.3, 0.4};
  const auto star = project_measure(grid_cdf(64, [&](double t) {
                                      double acc = 0.0;
                                      for (std::size_t i = 0; i < 4; ++i) {
                                        acc += pi[i] * std::clamp(4 * t - static_cast<double>(i), 0.0, 1.0);
                                      }
                                      return acc;
                                    }),
                                    4);
  CHECK((star.weights - pi.coords()).cwiseAbs().maxCoeff() <= 1e-14);

  CHECK_THROWS_AS(project_measure(grid_cdf(8, [](double t) { return 0.5 + 0.5 * t; }), 2), ValidationError);
  CHECK_THROWS_AS(project_measure(grid_cdf(8, [](double t) { return 0.9 * t; }), 2), ValidationError);
  Eigen::VectorXd bad = grid_cdf(8, [](double t) { return t; });
  bad[5] = 0.9;
  bad[6] = 0.1;
  CHECK_THROWS_AS(project_measure(bad, 2), ValidationError);
}

TEST_CASE("Lagrangian action") {
  CHECK(std::abs(lagrangian_action(MonotonePath::linear(SimplexPoint::barycenter(3), 256))) <= 1e-14);
  const SimplexPoint pi{0.25, 0.75};
  CHECK(lagrangian_action(MonotonePath::linear(pi, 256)) == doctest::Approx(0.1438410).epsilon(1e-7));

  RandomStream rng(41);
  for (int trial = 0; trial < 100; ++trial) {
    const SimplexPoint target = oracle::random_point(rng, 2 + trial % 4, 0.02);
    const double h = relative_entropy(SimplexPoint::barycenter(target.dim()), target);
    CHECK(lagrangian_action(MonotonePath::linear(target, 256)) - h <= 1e-6 + 4.0 / 256);
    CHECK(lagrangian_action(perturbed_path(target, 256, rng)) > h);
  }

  MonotonePath flat = MonotonePath::linear(pi, 16);
  flat.values(5, 1) = flat.values(4, 1);
  CHECK(lagrangian_action(flat) == std::numeric_limits<double>::infinity());
}

TEST_CASE("Lagrangian action under grid refinement") {
  const SimplexPoint pi{0.2, 0.3, 0.5};
  std::vector<double> c;
  for (std::size_t grid = 32; grid <= 1024; grid *= 2) {
    const double delta = std::abs(lagrangian_action(smooth_path(pi, 2 * grid)) - lagrangian_action(smooth_path(pi, grid)));
    c.push_back(delta * static_cast<double>(grid));
  }
  MESSAGE("refinement constant C = " << *std::max_element(c.begin(), c.end()));
  for (double v : c) CHECK(v <= 1.0);
  // The scaled change settles rather than growing.
  CHECK(c.back() <= 1.5 * c.front());
}

TEST_CASE("optimal path") {
  const SimplexPoint e = SimplexPoint::barycenter(2);
  const SimplexPoint q{0.25, 0.75};
  const BridgePath b = optimal_path(e, q, 256);
  CHECK(b.path(128, 0) == doctest::Approx(0.375).epsilon(1e-14));
  CHECK(b.path(128, 1) == doctest::Approx(0.625).epsilon(1e-14));
  CHECK(b.lambda == 0.0);

  RandomStream rng(43);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + trial % 5;
    const SimplexPoint p = oracle::random_point(rng, n, 0.02);
    const SimplexPoint r = oracle::random_point(rng, n, 0.02);
    const BridgePath path = optimal_path(p, r, 64);
    CHECK((path.path.row(0).transpose() - p.coords()).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((path.path.row(64).transpose() - r.coords()).cwiseAbs().maxCoeff() <= 1e-12);
    const Eigen::VectorXd dir = r.coords() - p.coords();
    double off = 0.0;
    for (Eigen::Index g = 0; g <= 64; ++g) {
      const Eigen::VectorXd x = path.path.row(g).transpose() - p.coords();
      const double s = std::clamp(x.dot(dir) / dir.squaredNorm(), 0.0, 1.0);
      off = std::max(off, (x - s * dir).norm());
      const double t = static_cast<double>(g) / 64;
      const Eigen::VectorXd expect = ((1 - t) / static_cast<double>(n) + t * path.endpoint.coords().array()).matrix();
      CHECK((path.portfolio.row(g).transpose() - expect).cwiseAbs().maxCoeff() <= 1e-14);
    }
    CHECK(off <= 1e-12);
  }
}

TEST_CASE("gamma subordinator") {
  RandomStream rng(47);
  const double lambda = 50.0;
  const std::size_t grid = 64, paths = 10000;
  std::vector<double> at_quarter, at_end, inc_a, inc_b;
  for (std::size_t k = 0; k < paths; ++k) {
    const Eigen::VectorXd gam = sample_gamma_subordinator(lambda, grid, rng);
    CHECK(gam[0] == 0.0);
    for (Eigen::Index g = 0; g < gam.size() - 1; ++g) REQUIRE(gam[g + 1] >= gam[g]);
    at_quarter.push_back(gam[16]);
    at_end.push_back(gam[64]);
    inc_a.push_back(gam[16]);
    inc_b.push_back(gam[40] - gam[16]);
  }
  CHECK(std::abs(stats::mean(at_quarter) - 12.5) <= 3 * stats::standard_error(at_quarter));
  CHECK(std::abs(stats::mean(at_end) - 50.0) <= 3 * stats::standard_error(at_end));
  CHECK(std::abs(stats::pearson(inc_a, inc_b)) <= 3.0 / std::sqrt(static_cast<double>(paths)));

  const boost::math::gamma_distribution<double> law(12.5);
  const double d = oracle::ks_statistic(at_quarter, [&](double x) { return boost::math::cdf(law, x); });
  CHECK(oracle::ks_pvalue(d, paths) > 0.01);
}

TEST_CASE("Dirichlet process") {
  RandomStream rng(53);
  const double lambda = 6.0;
  const std::size_t grid = 60, paths = 10000, n = 3;
  std::vector<double> at_third, cell_sq;
  for (std::size_t k = 0; k < paths; ++k) {
    const Eigen::VectorXd d = sample_dirichlet_process(lambda, grid, rng);
    CHECK(d[0] == 0.0);
    CHECK(d[60] == 1.0);
    at_third.push_back(d[20]);
    const Projection proj = project_measure(d, n);
    cell_sq.push_back(proj.weights[0] * proj.weights[0]);
  }
  CHECK(std::abs(stats::mean(at_third) - 1.0 / 3) <= 3 * stats::standard_error(at_third));
  const double a = lambda / n;
  const double second = a * (a + 1) / (lambda * (lambda + 1));
  CHECK(std::abs(stats::mean(cell_sq) - second) <= 3 * stats::standard_error(cell_sq));

  // Small shapes stay finite through the log-space normalization.
  const Eigen::VectorXd tiny = sample_dirichlet_process(1e-3, 256, rng);
  CHECK(tiny.allFinite());
  CHECK(tiny[256] == 1.0);
}

TEST_CASE("conditional bridges") {
  RandomStream rng(59);
  const SimplexPoint p{0.5, 0.3, 0.2};
  const SimplexPoint q{0.2, 0.3, 0.5};
  const std::size_t grid = 32, paths = 10000;
  std::vector<double> first, second, ratio0;
  for (std::size_t k = 0; k < paths; ++k) {
    const BridgePath b = sample_conditional_bridge(p, q, 20.0, grid, rng);
    REQUIRE((b.path.row(0).transpose() - p.coords()).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE((b.path.row(32).transpose() - odot(p, b.endpoint).coords()).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE((b.path.row(32).transpose() - q.coords()).cwiseAbs().maxCoeff() <= 1e-12);
    for (Eigen::Index i = 0; i < 3; ++i) {
      const Eigen::VectorXd col = b.fraction.values.col(i) / b.endpoint[static_cast<std::size_t>(i)];
      REQUIRE(col[0] == 0.0);
      REQUIRE(col[32] == doctest::Approx(1.0).epsilon(1e-15));
      for (Eigen::Index g = 0; g < 32; ++g) REQUIRE(col[g + 1] >= col[g]);
    }
    ratio0.push_back(b.fraction.values(8, 0) / b.endpoint[0]);
    first.push_back(b.fraction.values(16, 0) / b.endpoint[0]);
    second.push_back(b.fraction.values(16, 1) / b.endpoint[1]);
  }
  CHECK(std::abs(stats::mean(ratio0) - 0.25) <= 3 * stats::standard_error(ratio0));
  CHECK(std::abs(stats::mean(first) - 0.5) <= 3 * stats::standard_error(first));
  CHECK(std::abs(stats::pearson(first, second)) <= 3.0 / std::sqrt(static_cast<double>(paths)));
}

TEST_CASE("mean-field bridge is the optimal path") {
  RandomStream rng(61);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + trial % 4;
    const SimplexPoint p = oracle::random_point(rng, n, 0.02);
    const SimplexPoint q = oracle::random_point(rng, n, 0.02);
    const BridgePath a = mean_field_bridge(p, q, 128);
    const BridgePath b = optimal_path(p, q, 128);
    CHECK((a.path - b.path).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK((a.fraction.values - b.fraction.values).cwiseAbs().maxCoeff() <= 1e-15);
  }
}

TEST_CASE("entropy restriction to the discrete simplex") {
  const std::size_t cells = 240;
  const SimplexPoint e = SimplexPoint::barycenter(3);
  const auto leb = entropy_restriction_check(e, {Eigen::VectorXd::Constant(cells, 1.0 / cells)});
  CHECK(std::abs(leb.discrete_entropy) <= 1e-15);
  CHECK(std::abs(leb.values[0]) <= 1e-12);
  CHECK(leb.holds);

  RandomStream rng(67);
  const SimplexPoint pi{0.15, 0.35, 0.5};
  const std::size_t per = cells / 3;
  Eigen::VectorXd star(cells);
  for (std::size_t c = 0; c < cells; ++c) star[static_cast<Eigen::Index>(c)] = pi[c / per] / per;
  std::vector<Eigen::VectorXd> candidates{star};
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd mu(cells);
    for (std::size_t i = 0; i < 3; ++i) {
      Eigen::VectorXd w(per);
      for (Eigen::Index c = 0; c < w.size(); ++c) w[c] = 0.1 + rng.uniform();
      mu.segment(static_cast<Eigen::Index>(i * per), static_cast<Eigen::Index>(per)) = w * (pi[i] / w.sum());
    }
    candidates.push_back(mu);
  }
  const auto rep = entropy_restriction_check(pi, candidates);
  CHECK(rep.holds);
  CHECK(std::abs(rep.values[0] - rep.discrete_entropy) <= 1.0 / cells);
  for (std::size_t k = 1; k < rep.values.size(); ++k) CHECK(rep.values[k] > rep.discrete_entropy + 1e-12);

  Eigen::VectorXd wrong = star;
  wrong[0] += 0.01;
  wrong[cells - 1] -= 0.01;
  CHECK_THROWS_AS(entropy_restriction_check(pi, {wrong}), ValidationError);
  CHECK_THROWS_AS(entropy_restriction_check(pi, {Eigen::VectorXd::Constant(7, 1.0 / 7)}), ValidationError);
}

TEST_CASE("bridge paths converge to the optimal path") {
  Theorem3Config cfg;
  cfg.particles = 20;
  cfg.seeds = 7;
  cfg.grid = 128;
  const auto result = theorem3_experiment(cfg);
  REQUIRE(result.summary.size() == 3);
  CHECK(result.records.size() == 21);
  for (std::size_t l = 1; l < 3; ++l) {
    CHECK(result.summary[l].median_statistic < result.summary[l - 1].median_statistic);
  }
  CHECK(result.summary[2].mean_path_distance <= 0.05);

  const auto again = theorem3_experiment(cfg);
  for (std::size_t k = 0; k < result.records.size(); ++k) {
    CHECK(again.records[k].statistic == result.records[k].statistic);
  }
}
