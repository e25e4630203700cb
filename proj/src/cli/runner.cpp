#include "dtrans/cli/runner.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "dtrans/bounds.hpp"
#include "dtrans/cli/json_writer.hpp"
#include "dtrans/dynamics.hpp"
#include "dtrans/errors.hpp"
#include "dtrans/geometry.hpp"
#include "dtrans/interpolation.hpp"
#include "dtrans/ot.hpp"
#include "dtrans/portfolio.hpp"
#include "dtrans/rng.hpp"
#include "dtrans/schrodinger.hpp"

namespace dtrans::cli {

using nlohmann::json;

namespace {

std::string num(double x) { return format_double(x); }
std::string num(std::size_t x) { return std::to_string(x); }

json to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

SimplexPoint point_from(const std::vector<double>& x) {
  return SimplexPoint(Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size())));
}

std::vector<double> uniform_times(std::size_t points) {
  std::vector<double> t(points);
  for (std::size_t k = 0; k < points; ++k) t[k] = static_cast<double>(k) / static_cast<double>(points - 1);
  return t;
}

DensityModel density_model(const ExperimentConfig& c) {
  const std::string spec = c.model.empty() ? "uniform" : c.model;
  if (spec == "uniform") return DensityModel::uniform(c.n);
  if (spec.rfind("dirichlet:", 0) == 0) {
    std::vector<double> a;
    std::stringstream ss(spec.substr(10));
    std::string item;
    while (std::getline(ss, item, ',')) {
      char* end = nullptr;
      a.push_back(std::strtod(item.c_str(), &end));
      if (item.empty() || end != item.c_str() + item.size()) {
        throw ValidationError("model: bad Dirichlet parameter '" + item + "'");
      }
    }
    if (a.size() != c.n) throw ValidationError("model: Dirichlet parameters must have length n");
    return DensityModel::dirichlet(Eigen::Map<Eigen::VectorXd>(a.data(), static_cast<Eigen::Index>(a.size())));
  }
  throw ValidationError("model: unknown density model '" + spec + "'");
}

Artifacts run_cost(const ExperimentConfig& c) {
  const SimplexPoint p = point_from(c.p), q = point_from(c.q);
  const double value = cost(p, q);
  Artifacts a;
  a.payload = {{"p", to_json(p.coords())},
               {"q", to_json(q.coords())},
               {"cost", value},
               {"cost_reverse", cost(q, p)},
               {"entropy_form", relative_entropy(SimplexPoint::barycenter(c.n), odot(q, invert(p)))}};
  a.tables.push_back({"cost.csv", {"n", "cost"}, {{num(c.n), num(value)}}});
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.7f", value);
  a.summary = buf;
  return a;
}

Artifacts run_couple(const ExperimentConfig& c) {
  const GeneratorPtr g = parse_generator(c.generator);
  const TruncatedUniformSampler sampler(c.n, c.eps);
  Artifacts a;
  a.payload["instances"] = json::array();
  CsvTable table{"couple.csv", {"N", "i", "j", "mass"}, {}};
  std::ostringstream summary;
  for (std::size_t N : c.sizes) {
    RandomStream rng(c.seed, "couple", N);
    std::vector<SimplexPoint> src, tgt;
    for (std::size_t j = 0; j < N; ++j) src.push_back(sampler(rng));
    std::vector<std::size_t> order(N);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t j = N; j > 1; --j) std::swap(order[j - 1], order[rng.below(j)]);
    double monge = 0.0;
    for (std::size_t j = 0; j < N; ++j) monge += cost(src[j], transport_map(*g, src[j]));
    monge /= static_cast<double>(N);
    for (std::size_t j = 0; j < N; ++j) tgt.push_back(transport_map(*g, src[order[j]]));
    const DiscreteMeasure p0 = DiscreteMeasure::uniform(src), p1 = DiscreteMeasure::uniform(tgt);
    const Coupling lp = solve_kantorovich(p0, p1, CostKind::dirichlet);
    const Assignment asg = solve_assignment(cost_matrix(p0, p1, CostKind::dirichlet));
    const MonotonicityReport cert = certify_c_monotone(lp, 10000, derive_seed(c.seed, "certify", N));
    json triples = json::array();
    for (Eigen::Index i = 0; i < lp.mass.rows(); ++i) {
      for (Eigen::Index j = 0; j < lp.mass.cols(); ++j) {
        if (lp.mass(i, j) <= 1e-12) continue;
        triples.push_back({i, j, lp.mass(i, j)});
        table.rows.push_back({num(N), std::to_string(i), std::to_string(j), num(lp.mass(i, j))});
      }
    }
    json perm = json::array();
    for (std::size_t s : asg.perm) perm.push_back(s);
    a.payload["instances"].push_back({{"N", N},
                                      {"lp_value", lp.value},
                                      {"assignment_value", asg.value / static_cast<double>(N)},
                                      {"monge_value", monge},
                                      {"assignment", perm},
                                      {"coupling", triples},
                                      {"certified", cert.certified},
                                      {"min_cycle_gap", cert.min_cycle_gap},
                                      {"cycles", cert.cycles}});
    summary << "N=" << N << " lp=" << num(lp.value) << " monge=" << num(monge)
            << (cert.certified ? " certified" : " NOT certified") << "\n";
  }
  a.tables.push_back(std::move(table));
  a.summary = summary.str();
  return a;
}

Artifacts run_schrodinger(const ExperimentConfig& c) {
  Theorem2Config t;
  t.n = c.n;
  t.generator = c.generator;
  t.sizes = c.sizes;
  t.seeds = c.seeds;
  t.master_seed = c.seed;
  t.eps = c.eps;
  t.lambda = c.lambda;
  t.regularity_pairs = c.regularity_pairs;
  const Theorem2Result r = theorem2_experiment(t);
  Artifacts a;
  const auto& reg = r.regularity;
  a.payload["regularity"] = {{"alpha", reg.alpha},     {"alpha_prime", reg.alpha_prime},
                             {"c1", reg.c1},           {"c2", reg.c2},
                             {"c3", reg.c3},           {"m", reg.m},
                             {"alpha_lemma8", reg.alpha_lemma8},
                             {"pairs", reg.pairs},     {"truncation", c.eps}};
  a.payload["lambda_policy"] = c.lambda ? "fixed" : "auto";
  CsvTable table{"schrodinger.csv",
                 {"n", "N", "lambda", "seed", "mode", "w2_sq", "w2_sq_baseline", "w2_sq_sinkhorn",
                  "matching", "optimal_pair_mass"},
                 {}};
  json records = json::array();
  bool ties = false;
  for (const auto& rec : r.records) {
    records.push_back({{"n", c.n},
                       {"N", rec.size},
                       {"lambda", rec.lambda},
                       {"seed", rec.seed},
                       {"mode", to_string(rec.mode)},
                       {"w2_sq", rec.w2_sq},
                       {"w2_sq_baseline", rec.w2_sq_baseline},
                       {"w2_sq_sinkhorn", rec.w2_sq_sinkhorn},
                       {"matching", rec.matching},
                       {"optimal_pair_mass", rec.optimal_pair_mass}});
    ties = ties || rec.ties_perturbed;
    table.rows.push_back({num(c.n), num(rec.size), num(rec.lambda), num(rec.seed), to_string(rec.mode),
                          num(rec.w2_sq), num(rec.w2_sq_baseline), num(rec.w2_sq_sinkhorn),
                          num(rec.matching), num(rec.optimal_pair_mass)});
  }
  json summary = json::array();
  std::ostringstream text;
  text << "alpha=" << num(reg.alpha) << "\n";
  bool below = true;
  for (const auto& s : r.summary) {
    summary.push_back({{"N", s.size},
                       {"lambda", s.lambda},
                       {"median_w2_sq", s.median_w2_sq},
                       {"median_w2_sq_baseline", s.median_baseline},
                       {"median_w2_sq_sinkhorn", s.median_sinkhorn},
                       {"median_matching", s.median_matching}});
    below = below && s.median_w2_sq < s.median_baseline;
    text << "N=" << s.size << " lambda=" << num(s.lambda) << " median_w2_sq=" << num(s.median_w2_sq)
         << " baseline=" << num(s.median_baseline) << "\n";
  }
  a.payload["records"] = records;
  a.payload["summary"] = summary;
  a.payload["spearman"] = r.spearman;
  a.payload["max_mode_gap"] = r.max_mode_gap;
  a.payload["ties_perturbed"] = ties;
  a.payload["verdicts"] = {{"below_baseline", below}, {"decreasing", r.spearman < 0.0}};
  a.tables.push_back(std::move(table));
  a.summary = text.str();
  return a;
}

Artifacts run_paths(const ExperimentConfig& c) {
  Theorem3Config t;
  t.n = c.n;
  t.generator = c.generator;
  t.lambdas = c.lambdas;
  t.particles = c.particles;
  t.grid = c.grid;
  t.seeds = c.seeds;
  t.master_seed = c.seed;
  t.eps = c.eps;
  const Theorem3Result r = theorem3_experiment(t);
  Artifacts a;
  json records = json::array();
  CsvTable table{"paths.csv", {"lambda", "seed", "S", "path_distance"}, {}};
  for (const auto& rec : r.records) {
    records.push_back({{"lambda", rec.lambda}, {"seed", rec.seed}, {"S", rec.statistic},
                       {"path_distance", rec.path_distance}});
    table.rows.push_back({num(rec.lambda), num(rec.seed), num(rec.statistic), num(rec.path_distance)});
  }
  json summary = json::array();
  std::ostringstream text;
  for (const auto& s : r.summary) {
    summary.push_back({{"lambda", s.lambda}, {"median_S", s.median_statistic},
                       {"mean_path_distance", s.mean_path_distance}});
    text << "lambda=" << num(s.lambda) << " median_S=" << num(s.median_statistic)
         << " mean_path_distance=" << num(s.mean_path_distance) << "\n";
  }
  a.payload["records"] = records;
  a.payload["summary"] = summary;
  a.tables.push_back(std::move(table));

  // A few sample trajectories at the largest lambda.
  const GeneratorPtr g = parse_generator(c.generator);
  const TruncatedUniformSampler sampler(c.n, c.eps);
  RandomStream rng(c.seed, "paths/dump");
  const double lambda = *std::max_element(c.lambdas.begin(), c.lambdas.end());
  CsvTable dump{"paths_dump.csv", {"particle", "t"}, {}};
  for (std::size_t i = 0; i < c.n; ++i) dump.columns.push_back("q_" + std::to_string(i + 1));
  for (std::size_t i = 0; i < c.n; ++i) dump.columns.push_back("pi_" + std::to_string(i + 1));
  const std::size_t shown = std::min<std::size_t>(c.particles, 5);
  for (std::size_t k = 0; k < shown; ++k) {
    const SimplexPoint p = sampler(rng);
    const BridgePath b = sample_conditional_bridge(p, transport_map(*g, p), lambda, c.grid, rng);
    for (std::size_t gi = 0; gi <= c.grid; ++gi) {
      const auto row = static_cast<Eigen::Index>(gi);
      std::vector<std::string> cells{num(k), num(static_cast<double>(gi) / static_cast<double>(c.grid))};
      for (Eigen::Index i = 0; i < b.path.cols(); ++i) cells.push_back(num(b.path(row, i)));
      for (Eigen::Index i = 0; i < b.portfolio.cols(); ++i) cells.push_back(num(b.portfolio(row, i)));
      dump.rows.push_back(std::move(cells));
    }
  }
  a.tables.push_back(std::move(dump));
  a.summary = text.str();
  return a;
}

Artifacts run_interpolate(const ExperimentConfig& c) {
  const GeneratorPtr g = parse_generator(c.generator);
  const TruncatedUniformSampler sampler(c.n, c.eps);
  RandomStream rng(c.seed, "interpolate");
  std::vector<SimplexPoint> atoms;
  for (std::size_t j = 0; j < c.atoms; ++j) atoms.push_back(sampler(rng));
  const DiscreteMeasure p0 = DiscreteMeasure::uniform(atoms);
  const CostCurve curve = cost_curve(InterpolationSchedule(g, c.t_grid), p0);
  Artifacts a;
  a.payload = {{"times", curve.times},
               {"costs", curve.costs},
               {"second_differences", curve.second_differences},
               {"verdicts", {{"monotone", curve.monotone}, {"convex", curve.convex}}}};
  CsvTable table{"interpolate.csv", {"t", "cost"}, {}};
  for (std::size_t k = 0; k < curve.times.size(); ++k) {
    table.rows.push_back({num(curve.times[k]), num(curve.costs[k])});
  }
  a.tables.push_back(std::move(table));
  a.summary = std::string("monotone=") + (curve.monotone ? "true" : "false") +
              " convex=" + (curve.convex ? "true" : "false") + " final_cost=" + num(curve.costs.back()) + "\n";
  return a;
}

Artifacts run_entropy(const ExperimentConfig& c) {
  const GeneratorPtr g = parse_generator(c.generator);
  const DensityModel model = density_model(c);
  const Theorem4Report r = theorem4_experiment(model, g, uniform_times(c.t_grid), c.samples, c.seed);
  Artifacts a;
  a.payload = {{"t_grid", r.times},
               {"curve_a", r.curve_a},
               {"curve_b", r.curve_b},
               {"second_differences", r.second_differences},
               {"min_sample_second_difference", r.min_sample_second_difference},
               {"difference_range", r.difference_range},
               {"standard_error", r.standard_error},
               {"model", model.name},
               {"verdicts", {{"convex", r.convex}, {"constant_difference", r.constant_difference}}}};
  CsvTable table{"entropy.csv", {"t", "curve_a", "curve_b"}, {}};
  for (std::size_t k = 0; k < r.times.size(); ++k) {
    table.rows.push_back({num(r.times[k]), num(r.curve_a[k]), num(r.curve_b[k])});
  }
  a.tables.push_back(std::move(table));
  a.summary = std::string("convex=") + (r.convex ? "true" : "false") + " difference_range=" +
              num(r.difference_range) + " standard_error=" + num(r.standard_error) + "\n";
  return a;
}

Artifacts run_gaps(const ExperimentConfig& c) {
  const GapModel model = GapModel::parse(c.model.empty() ? "linear" : c.model);
  const auto rows = theorem6_experiment(model, c.n_grid, c.replicas, c.seed);
  Artifacts a;
  json out = json::array();
  CsvTable table{"gaps.csv", {"n", "replicas", "mean_cost", "term1", "term2", "quadrature_bound"}, {}};
  std::ostringstream text;
  for (const auto& r : rows) {
    out.push_back({{"n", r.n},
                   {"replicas", r.replicas},
                   {"mean_cost", r.mean_cost},
                   {"cost_standard_error", r.cost_standard_error},
                   {"term1", r.mean_term1},
                   {"median_term1", r.median_term1},
                   {"median_abs_term1", r.median_abs_term1},
                   {"term2", r.mean_term2},
                   {"quadrature_bound", r.quadrature_bound}});
    table.rows.push_back({num(r.n), num(r.replicas), num(r.mean_cost), num(r.mean_term1),
                          num(r.mean_term2), num(r.quadrature_bound)});
    text << "n=" << r.n << " mean_cost=" << num(r.mean_cost) << " bound=" << num(r.quadrature_bound) << "\n";
  }
  a.payload = {{"model", model.name()}, {"entropy_bound", model.entropy_bound()}, {"rows", out}};
  a.tables.push_back(std::move(table));
  a.summary = text.str();
  return a;
}

std::string render_csv(const CsvTable& t) {
  std::string s;
  for (std::size_t i = 0; i < t.columns.size(); ++i) s += (i ? "," : "") + t.columns[i];
  s += "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) s += (i ? "," : "") + row[i];
    s += "\n";
  }
  return s;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError("out: cannot write '" + path.string() + "'");
  f << content;
  if (!f) throw ValidationError("out: cannot write '" + path.string() + "'");
}

}  // namespace

json config_to_json(const ExperimentConfig& c) {
  json j = {{"kind", c.kind},
            {"n", c.n},
            {"generator", c.generator},
            {"N", c.sizes},
            {"lambda", c.lambda ? json(*c.lambda) : json("auto")},
            {"t_grid", c.t_grid},
            {"grid", c.grid},
            {"seeds", c.seeds},
            {"seed", c.seed},
            {"eps", c.eps},
            {"format", c.format},
            {"atoms", c.atoms},
            {"samples", c.samples},
            {"replicas", c.replicas},
            {"n_grid", c.n_grid},
            {"lambdas", c.lambdas},
            {"particles", c.particles},
            {"model", c.model},
            {"regularity_pairs", c.regularity_pairs}};
  if (!c.p.empty()) j["p"] = c.p;
  if (!c.q.empty()) j["q"] = c.q;
  return j;
}

Artifacts execute(const ExperimentConfig& c) {
  if (c.kind == "cost") return run_cost(c);
  if (c.kind == "couple") return run_couple(c);
  if (c.kind == "schrodinger") return run_schrodinger(c);
  if (c.kind == "paths") return run_paths(c);
  if (c.kind == "interpolate") return run_interpolate(c);
  if (c.kind == "entropy") return run_entropy(c);
  if (c.kind == "gaps") return run_gaps(c);
  throw ValidationError("kind: unrecognized experiment '" + c.kind + "'");
}

json make_document(const ExperimentConfig& c, const json& payload) {
  return {{"kind", c.kind}, {"version", kVersion}, {"seed", c.seed}, {"config", config_to_json(c)},
          {"payload", payload}};
}

int run(const ExperimentConfig& c, std::ostream& out, std::ostream& err) {
  try {
    const auto errors = check_config(c);
    if (!errors.empty()) {
      for (const auto& e : errors) err << "error: " << e << "\n";
      return kValidationFailure;
    }
    const Artifacts a = execute(c);
    if (!c.out.empty()) {
      const std::filesystem::path dir(c.out);
      std::error_code ec;
      std::filesystem::create_directories(dir, ec);
      if (ec) throw ValidationError("out: cannot create '" + c.out + "': " + ec.message());
      if (c.format == "json" || c.format == "both") {
        write_file(dir / (c.kind + ".json"), write_json(make_document(c, a.payload)));
      }
      if (c.format == "csv" || c.format == "both") {
        for (const auto& t : a.tables) write_file(dir / t.file, render_csv(t));
      }
    }
    out << a.summary;
    if (!a.summary.empty() && a.summary.back() != '\n') out << "\n";
    return kSuccess;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kValidationFailure;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumericalFailure;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << "\n";
    return kNumericalFailure;
  }
}

int validate(const ExperimentConfig& c, const std::vector<std::string>& parse_errors,
             std::ostream& out, std::ostream& err) {
  std::vector<std::string> errors = parse_errors;
  const bool uses_generator = c.kind == "couple" || c.kind == "schrodinger" || c.kind == "paths" ||
                              c.kind == "interpolate" || c.kind == "entropy";
  GeneratorPtr g;
  if (uses_generator) {
    try {
      g = parse_generator(c.generator);
    } catch (const std::exception& e) {
      errors.push_back(std::string("generator: ") + e.what());
    }
  }
  if (c.kind == "schrodinger" && g && errors.empty()) {
    try {
      const RegularityEstimate reg = estimate_regularity(*g, c.n, c.eps, c.regularity_pairs,
                                                         derive_seed(c.seed, "regularity"));
      out << "alpha=" << format_double(reg.alpha) << "\n";
      if (!c.lambda && reg.degenerate) {
        errors.push_back("lambda: auto requires alpha > 0, but generator '" + c.generator +
                         "' has alpha = 0");
      } else {
        for (std::size_t N : c.sizes) {
          const double lambda = c.lambda ? *c.lambda : theorem2_lambda(reg.alpha, N, c.n);
          out << "N=" << N << " lambda=" << format_double(lambda) << "\n";
        }
      }
    } catch (const std::exception& e) {
      errors.push_back(std::string("generator: ") + e.what());
    }
  }
  if (c.kind == "entropy" && g) {
    try {
      density_model(c);
    } catch (const std::exception& e) {
      errors.push_back(e.what());
    }
  }
  if (c.kind == "gaps") {
    try {
      GapModel::parse(c.model.empty() ? "linear" : c.model);
    } catch (const std::exception& e) {
      errors.push_back(std::string("model: ") + e.what());
    }
  }
  for (const auto& e : errors) err << "error: " << e << "\n";
  if (errors.empty()) out << "ok\n";
  return errors.empty() ? kSuccess : kValidationFailure;
}

}  // namespace dtrans::cli
