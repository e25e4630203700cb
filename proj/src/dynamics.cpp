#include "dtrans/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dtrans/parallel.hpp"
#include "dtrans/portfolio.hpp"
#include "dtrans/rng.hpp"
#include "dtrans/stats.hpp"

namespace dtrans {

namespace {

void check_grid(std::size_t grid) {
  if (grid == 0) throw ValidationError("time grid needs at least one step");
}

// Cumulative distribution from log increments, with exact 0 and 1 endpoints.
Eigen::VectorXd normalized_cumulative(const Eigen::VectorXd& log_inc) {
  const double m = log_inc.maxCoeff();
  const Eigen::VectorXd w = (log_inc.array() - m).exp().matrix();
  const double total = w.sum();
  Eigen::VectorXd out(log_inc.size() + 1);
  out[0] = 0.0;
  double run = 0.0;
  for (Eigen::Index g = 0; g < log_inc.size(); ++g) {
    run += w[g];
    out[g + 1] = run / total;
  }
  out[log_inc.size()] = 1.0;
  return out;
}

BridgePath assemble(const SimplexPoint& p, const SimplexPoint& pi, MonotonePath f, double lambda) {
  const std::size_t grid = f.grid();
  const std::size_t n = p.dim();
  BridgePath b{0, lambda, pi, std::move(f), {}, {}};
  b.portfolio.resize(static_cast<Eigen::Index>(grid + 1), static_cast<Eigen::Index>(n));
  b.path.resize(static_cast<Eigen::Index>(grid + 1), static_cast<Eigen::Index>(n));
  for (std::size_t g = 0; g <= grid; ++g) {
    const auto row = static_cast<Eigen::Index>(g);
    const double t = static_cast<double>(g) / static_cast<double>(grid);
    Eigen::VectorXd w = ((1.0 - t) / static_cast<double>(n) + b.fraction.values.row(row).array())
                            .matrix()
                            .transpose();
    w /= w.sum();
    b.portfolio.row(row) = w.transpose();
    if (g == 0) {
      b.path.row(row) = p.coords().transpose();
    } else {
      const Eigen::VectorXd q = (p.coords().array() * w.array()).matrix();
      b.path.row(row) = (q / q.sum()).transpose();
    }
  }
  // The last row reproduces q = p (.) pi exactly.
  b.path.row(static_cast<Eigen::Index>(grid)) = odot(p, pi).coords().transpose();
  return b;
}

}  // namespace

MonotonePath MonotonePath::linear(const SimplexPoint& pi, std::size_t grid) {
  check_grid(grid);
  MonotonePath f;
  f.values.resize(static_cast<Eigen::Index>(grid + 1), static_cast<Eigen::Index>(pi.dim()));
  for (std::size_t g = 0; g <= grid; ++g) {
    const double t = static_cast<double>(g) / static_cast<double>(grid);
    f.values.row(static_cast<Eigen::Index>(g)) = t * pi.coords().transpose();
  }
  return f;
}

Projection project_measure(const Eigen::VectorXd& distribution, std::size_t n) {
  if (n < 2) throw ValidationError("projection needs n >= 2");
  if (distribution.size() < 2) throw ValidationError("distribution needs at least two grid points");
  if (std::abs(distribution[0]) > 1e-12) throw ValidationError("measure has an atom at 0");
  const double total = distribution[distribution.size() - 1];
  if (std::abs(total - 1.0) > 1e-12) throw ValidationError("measure must have total mass one");
  for (Eigen::Index g = 1; g < distribution.size(); ++g) {
    if (distribution[g] < distribution[g - 1] - 1e-12) throw ValidationError("distribution function is decreasing");
  }
  const auto grid = static_cast<double>(distribution.size() - 1);
  auto at = [&](double t) {
    const double x = t * grid;
    const auto lo = static_cast<Eigen::Index>(std::min(std::floor(x), grid - 1.0));
    const double frac = x - static_cast<double>(lo);
    return distribution[lo] + frac * (distribution[lo + 1] - distribution[lo]);
  };
  Projection out;
  out.weights.resize(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const double a = static_cast<double>(i) / static_cast<double>(n);
    const double b = static_cast<double>(i + 1) / static_cast<double>(n);
    double w = at(b) - at(a);
    w = std::max(w, 0.0);
    out.weights[static_cast<Eigen::Index>(i)] = w;
    if (w <= 0.0) out.boundary = true;
  }
  return out;
}

double lagrangian_action(const MonotonePath& f) {
  const std::size_t grid = f.grid();
  check_grid(grid);
  const double n = static_cast<double>(f.dim());
  const double dt = 1.0 / static_cast<double>(grid);
  double integral = 0.0;
  for (Eigen::Index i = 0; i < f.values.cols(); ++i) {
    for (std::size_t g = 0; g < grid; ++g) {
      const auto row = static_cast<Eigen::Index>(g);
      const double inc = f.values(row + 1, i) - f.values(row, i);
      if (!(inc > 0.0)) return std::numeric_limits<double>::infinity();
      integral += dt * std::log(inc / dt);
    }
  }
  return -std::log(n) - integral / n;
}

BridgePath optimal_path(const SimplexPoint& p, const SimplexPoint& q, std::size_t grid) {
  if (p.dim() != q.dim()) throw DimensionMismatch(p.dim(), q.dim());
  const SimplexPoint pi = odot(q, invert(p));
  return assemble(p, pi, MonotonePath::linear(pi, grid), 0.0);
}

Eigen::VectorXd sample_gamma_subordinator(double lambda_total, std::size_t grid, RandomStream& rng) {
  check_grid(grid);
  if (!(lambda_total > 0.0)) throw ValidationError("lambda must be positive");
  const double shape = lambda_total / static_cast<double>(grid);
  Eigen::VectorXd out(static_cast<Eigen::Index>(grid + 1));
  out[0] = 0.0;
  for (std::size_t g = 0; g < grid; ++g) {
    out[static_cast<Eigen::Index>(g + 1)] = out[static_cast<Eigen::Index>(g)] + rng.gamma(shape);
  }
  return out;
}

Eigen::VectorXd sample_dirichlet_process(double lambda, std::size_t grid, RandomStream& rng) {
  check_grid(grid);
  if (!(lambda > 0.0)) throw ValidationError("lambda must be positive");
  const double shape = lambda / static_cast<double>(grid);
  Eigen::VectorXd log_inc(static_cast<Eigen::Index>(grid));
  for (Eigen::Index g = 0; g < log_inc.size(); ++g) log_inc[g] = rng.log_gamma(shape);
  return normalized_cumulative(log_inc);
}

BridgePath sample_conditional_bridge(const SimplexPoint& p, const SimplexPoint& q, double lambda,
                                     std::size_t grid, RandomStream& rng) {
  if (p.dim() != q.dim()) throw DimensionMismatch(p.dim(), q.dim());
  const SimplexPoint pi = odot(q, invert(p));
  MonotonePath f;
  f.values.resize(static_cast<Eigen::Index>(grid + 1), static_cast<Eigen::Index>(p.dim()));
  for (Eigen::Index i = 0; i < f.values.cols(); ++i) {
    f.values.col(i) = sample_dirichlet_process(lambda, grid, rng) * pi[static_cast<std::size_t>(i)];
  }
  return assemble(p, pi, std::move(f), lambda);
}

BridgePath mean_field_bridge(const SimplexPoint& p, const SimplexPoint& q, std::size_t grid) {
  if (p.dim() != q.dim()) throw DimensionMismatch(p.dim(), q.dim());
  const SimplexPoint pi = odot(q, invert(p));
  MonotonePath f;
  f.values.resize(static_cast<Eigen::Index>(grid + 1), static_cast<Eigen::Index>(p.dim()));
  const Eigen::VectorXd mean_inc = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid));
  const Eigen::VectorXd d = normalized_cumulative(mean_inc);
  for (Eigen::Index i = 0; i < f.values.cols(); ++i) f.values.col(i) = d * pi[static_cast<std::size_t>(i)];
  return assemble(p, pi, std::move(f), std::numeric_limits<double>::infinity());
}

RestrictionReport entropy_restriction_check(const SimplexPoint& pi,
                                            const std::vector<Eigen::VectorXd>& candidates) {
  const std::size_t n = pi.dim();
  RestrictionReport rep;
  rep.discrete_entropy = relative_entropy(SimplexPoint::barycenter(n), pi);
  rep.min_gap = std::numeric_limits<double>::infinity();
  for (const auto& mu : candidates) {
    const auto cells = static_cast<std::size_t>(mu.size());
    if (cells == 0 || cells % n != 0) throw ValidationError("cell count must be a multiple of n");
    const std::size_t per = cells / n;
    for (std::size_t i = 0; i < n; ++i) {
      const double mass = mu.segment(static_cast<Eigen::Index>(i * per), static_cast<Eigen::Index>(per)).sum();
      if (std::abs(mass - pi[i]) > 1e-9) throw ValidationError("candidate violates mu(E_i) = pi_i");
    }
    const double leb = 1.0 / static_cast<double>(cells);
    double h = 0.0;
    for (Eigen::Index c = 0; c < mu.size(); ++c) {
      if (!(mu[c] > 0.0)) {
        h = std::numeric_limits<double>::infinity();
        break;
      }
      h += leb * std::log(leb / mu[c]);
    }
    rep.values.push_back(h);
    rep.min_gap = std::min(rep.min_gap, h - rep.discrete_entropy);
  }
  if (candidates.empty()) rep.min_gap = 0.0;
  rep.holds = rep.min_gap >= -1e-12;
  return rep;
}

Theorem3Result theorem3_experiment(const Theorem3Config& cfg) {
  if (cfg.lambdas.empty() || cfg.seeds == 0 || cfg.particles == 0) {
    throw ValidationError("empty experiment grid");
  }
  const GeneratorPtr g = parse_generator(cfg.generator);
  const TruncatedUniformSampler sampler(cfg.n, cfg.eps);
  const std::size_t jobs = cfg.lambdas.size() * cfg.seeds;
  std::vector<Theorem3Record> records(jobs);
  parallel_for(jobs, [&](std::size_t job) {
    const double lambda = cfg.lambdas[job / cfg.seeds];
    const std::size_t seed = job % cfg.seeds;
    // Particles share their endpoints across lambdas; only the noise changes.
    RandomStream points(cfg.master_seed, "theorem3/points", seed);
    RandomStream noise(cfg.master_seed, "theorem3/noise/" + std::to_string(job / cfg.seeds), seed);
    Theorem3Record rec;
    rec.lambda = lambda;
    rec.seed = seed;
    for (std::size_t k = 0; k < cfg.particles; ++k) {
      const SimplexPoint p = sampler(points);
      const SimplexPoint q = transport_map(*g, p);
      const BridgePath sim = sample_conditional_bridge(p, q, lambda, cfg.grid, noise);
      const BridgePath opt = optimal_path(p, q, cfg.grid);
      double sup_frac = 0.0, sup_path = 0.0;
      for (std::size_t gi = 0; gi <= cfg.grid; ++gi) {
        const auto row = static_cast<Eigen::Index>(gi);
        const double t = static_cast<double>(gi) / static_cast<double>(cfg.grid);
        for (std::size_t i = 0; i < cfg.n; ++i) {
          const double ratio = sim.fraction.values(row, static_cast<Eigen::Index>(i)) / sim.endpoint[i];
          sup_frac = std::max(sup_frac, std::abs(ratio - t));
        }
        sup_path = std::max(sup_path, (sim.path.row(row) - opt.path.row(row)).norm());
      }
      rec.statistic += sup_frac;
      rec.path_distance += sup_path;
    }
    rec.statistic /= static_cast<double>(cfg.particles);
    rec.path_distance /= static_cast<double>(cfg.particles);
    records[job] = rec;
  });
  Theorem3Result result;
  result.records = records;
  for (std::size_t l = 0; l < cfg.lambdas.size(); ++l) {
    std::vector<double> s, d;
    for (std::size_t seed = 0; seed < cfg.seeds; ++seed) {
      s.push_back(records[l * cfg.seeds + seed].statistic);
      d.push_back(records[l * cfg.seeds + seed].path_distance);
    }
    result.summary.push_back({cfg.lambdas[l], stats::median(s), stats::mean(d)});
  }
  return result;
}

}  // namespace dtrans
