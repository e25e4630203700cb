#include <doctest.h>

#include <cmath>
#include <vector>

#include "dtrans/dynamics.hpp"
#include "dtrans/interpolation.hpp"
#include "dtrans/ot.hpp"
#include "dtrans/rng.hpp"
#include "support/oracles.hpp"

using namespace dtrans;

namespace {

DiscreteMeasure atoms(RandomStream& rng, std::size_t count, std::size_t n, double eps = 0.0) {
  std::vector<SimplexPoint> pts;
  for (std::size_t k = 0; k < count; ++k) pts.push_back(oracle::random_point(rng, n, eps));
  return DiscreteMeasure::uniform(std::move(pts));
}

double segment_distance(const Eigen::VectorXd& x, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::VectorXd d = b - a;
  if (d.squaredNorm() == 0.0) return (x - a).norm();
  const double s = std::clamp((x - a).dot(d) / d.squaredNorm(), 0.0, 1.0);
  return (x - a - s * d).norm();
}

}  // namespace

TEST_CASE("transport along the interpolation") {
  RandomStream rng(71);
  const GeneratorPtr g = parse_generator("power:0.5");
  const GeneratorPtr phi0 = make_phi0();
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + trial % 4;
    const SimplexPoint p = oracle::random_point(rng, n, 0.01);
    CHECK((transport_at(*g, 0.0, p).coords() - p.coords()).cwiseAbs().maxCoeff() <= 1e-14);
    const SimplexPoint q = transport_at(*g, 1.0, p);
    CHECK((q.coords() - transport_map(*g, p).coords()).cwiseAbs().maxCoeff() <= 1e-14);
    for (double t : {0.25, 0.6}) {
      CHECK((transport_at(*phi0, t, p).coords() - p.coords()).cwiseAbs().maxCoeff() <= 1e-14);
    }

    // Two code paths: the dynamic optimal path and the interpolated transport map.
    const BridgePath path = optimal_path(p, q, 16);
    double worst = 0.0, off = 0.0;
    for (Eigen::Index k = 0; k <= 16; ++k) {
      const SimplexPoint qt = transport_at(*g, static_cast<double>(k) / 16, p);
      worst = std::max(worst, (qt.coords() - path.path.row(k).transpose()).cwiseAbs().maxCoeff());
      off = std::max(off, segment_distance(qt.coords(), p.coords(), q.coords()));
    }
    CHECK(worst <= 1e-12);
    CHECK(off <= 1e-12);

    const SimplexPoint r = invert(p);
    const Eigen::VectorXd pi1 = portfolio_map(*g, r);
    for (double t : {0.0, 0.3, 0.8, 1.0}) {
      const Eigen::VectorXd expect = ((1 - t) / static_cast<double>(n) + t * pi1.array()).matrix();
      CHECK((portfolio_at(*g, t, r) - expect).cwiseAbs().maxCoeff() <= 1e-15);
      CHECK((portfolio_map(*generator_at(g, t), r) - expect).cwiseAbs().maxCoeff() <= 1e-14);
    }
  }
  CHECK_THROWS_AS(portfolio_at(*g, 1.5, SimplexPoint{0.5, 0.5}), ValidationError);
}

TEST_CASE("interpolated measures") {
  RandomStream rng(73);
  const GeneratorPtr g = parse_generator("power:0.5");
  const DiscreteMeasure p0 = atoms(rng, 6, 3, 0.02);
  const DiscreteMeasure at0 = interpolate_measure(*g, p0, 0.0);
  for (std::size_t j = 0; j < p0.size(); ++j) {
    CHECK((at0.atoms[j].coords() - p0.atoms[j].coords()).cwiseAbs().maxCoeff() <= 1e-14);
  }
  CHECK(at0.weights == p0.weights);

  const SimplexPoint single{0.2, 0.3, 0.5};
  const DiscreteMeasure one = interpolate_measure(*g, DiscreteMeasure::uniform({single}), 0.4);
  CHECK(one.size() == 1);
  CHECK((one.atoms[0].coords() - transport_at(*g, 0.4, single).coords()).cwiseAbs().maxCoeff() == 0.0);

  // The generator-induced coupling is optimal at every intermediate time.
  for (std::size_t size : {4u, 6u, 8u}) {
    const DiscreteMeasure src = atoms(rng, size, 3, 0.02);
    for (double t : {0.3, 1.0}) {
      const DiscreteMeasure dst = interpolate_measure(*g, src, t);
      double monge = 0.0;
      for (std::size_t j = 0; j < size; ++j) monge += cost(src.atoms[j], dst.atoms[j]) / static_cast<double>(size);
      const Coupling lp = solve_kantorovich(src, dst, CostKind::dirichlet);
      CHECK(lp.value == doctest::Approx(monge).epsilon(1e-10));
      const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(size), static_cast<Eigen::Index>(size)) /
                                       static_cast<double>(size);
      CHECK(certify_c_monotone(cost_matrix(src, dst, CostKind::dirichlet), identity, 2000, 5).certified);
    }
  }
}

TEST_CASE("cost along the interpolation is increasing and convex") {
  RandomStream rng(79);
  const DiscreteMeasure p0 = atoms(rng, 50, 3);
  const CostCurve curve = cost_curve(InterpolationSchedule(parse_generator("power:0.5")), p0);
  REQUIRE(curve.times.size() == 33);
  CHECK(curve.costs.front() == 0.0);
  CHECK(curve.monotone);
  CHECK(curve.convex);
  for (double d : curve.second_differences) CHECK(d > 0.0);

  const CostCurve flat = cost_curve(InterpolationSchedule(make_phi0()), p0);
  for (double c : flat.costs) CHECK(std::abs(c) <= 1e-15);

  // The pointwise formula against the cost of the transported atoms.
  const GeneratorPtr g = parse_generator("mix:0.5,phi0,power:0.25");
  const CostCurve mixed = cost_curve(InterpolationSchedule(g, std::vector<double>{0.0, 0.1, 0.5, 0.9, 1.0}), p0);
  for (std::size_t k = 0; k < mixed.times.size(); ++k) {
    double direct = 0.0;
    for (const auto& p : p0.atoms) direct += cost(p, transport_at(*g, mixed.times[k], p)) / 50.0;
    CHECK(mixed.costs[k] == doctest::Approx(direct).epsilon(1e-12));
  }

  for (std::size_t n : {2u, 3u, 5u}) {
    for (const auto& name : builtin_generators(n)) {
      for (std::uint64_t seed = 0; seed < 10; ++seed) {
        RandomStream local(seed, "cost-curve", n);
        const CostCurve c = cost_curve(InterpolationSchedule(parse_generator(name)), atoms(local, 20, n));
        CHECK_MESSAGE(c.monotone, name);
        CHECK_MESSAGE(c.convex, name);
      }
    }
  }

  CHECK_THROWS_AS(InterpolationSchedule(make_phi0(), std::vector<double>{0.0, 0.5}), ValidationError);
  CHECK_THROWS_AS(InterpolationSchedule(make_phi0(), std::vector<double>{0.0, 0.7, 0.5, 1.0}), ValidationError);
}
