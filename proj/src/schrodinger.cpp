#include "dtrans/schrodinger.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/special_functions/gamma.hpp>

#include "dtrans/kernels.hpp"
#include "dtrans/ot.hpp"
#include "dtrans/parallel.hpp"
#include "dtrans/rng.hpp"
#include "dtrans/stats.hpp"

namespace dtrans {

namespace {

double lgam(double x) { return boost::math::lgamma(x); }

double log_sum_exp(const std::vector<double>& x) {
  const double m = *std::max_element(x.begin(), x.end());
  double s = 0.0;
  for (double v : x) s += std::exp(v - m);
  return m + std::log(s);
}

void check_sizes(const std::vector<SimplexPoint>& source, const std::vector<SimplexPoint>& target) {
  if (source.empty()) throw ValidationError("mixture needs at least one atom");
  if (source.size() != target.size()) throw DimensionMismatch(source.size(), target.size());
}

}  // namespace

GammaKernel::GammaKernel(Eigen::VectorXd a) : alpha(std::move(a)) {
  if (alpha.size() < 2) throw ValidationError("kernel needs n >= 2");
  for (Eigen::Index i = 0; i < alpha.size(); ++i) {
    if (!(alpha[i] > 0.0) || !std::isfinite(alpha[i])) {
      throw ValidationError("kernel parameters must be positive");
    }
  }
}

GammaKernel GammaKernel::symmetric(double lambda, std::size_t n) {
  if (!(lambda > 0.0)) throw ValidationError("lambda must be positive");
  return GammaKernel(Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n),
                                               lambda / static_cast<double>(n)));
}

SimplexPoint GammaKernel::sample(const SimplexPoint& p, RandomStream& rng) const {
  if (static_cast<std::size_t>(alpha.size()) != p.dim()) {
    throw DimensionMismatch(static_cast<std::size_t>(alpha.size()), p.dim());
  }
  Eigen::VectorXd logits = p.log();
  for (Eigen::Index i = 0; i < logits.size(); ++i) logits[i] += rng.log_gamma(alpha[i]);
  return SimplexPoint::from_logits(logits);
}

double log_density_general(const GammaKernel& kernel, const SimplexPoint& p,
                           const SimplexPoint& q) {
  if (p.dim() != q.dim()) throw DimensionMismatch(p.dim(), q.dim());
  if (static_cast<std::size_t>(kernel.alpha.size()) != p.dim()) {
    throw DimensionMismatch(static_cast<std::size_t>(kernel.alpha.size()), p.dim());
  }
  const Eigen::VectorXd& a = kernel.alpha;
  const Eigen::VectorXd d = q.log() - p.log();  // log(q_i / p_i)
  const double m = d.maxCoeff();
  const double log_sum_ratio = m + std::log((d.array() - m).exp().sum());
  double out = lgam(a.sum()) - q.log().sum() + a.dot(d) - a.sum() * log_sum_ratio;
  for (Eigen::Index i = 0; i < a.size(); ++i) out -= lgam(a[i]);
  return out;
}

double log_density_symmetric(double lambda, const SimplexPoint& p, const SimplexPoint& q) {
  return log_density_general(GammaKernel::symmetric(lambda, p.dim()), p, q);
}

std::vector<LdpRow> ldp_limit_check(const std::vector<double>& lambdas, const SimplexPoint& p,
                                    const SimplexPoint& q) {
  const double c = cost(p, q);
  std::vector<LdpRow> rows;
  rows.reserve(lambdas.size());
  for (double lambda : lambdas) {
    LdpRow row;
    row.lambda = lambda;
    row.value = -log_density_symmetric(lambda, p, q) / lambda;
    row.deviation = std::abs(row.value - c);
    rows.push_back(row);
  }
  return rows;
}

double ldp_decay_slope(const std::vector<LdpRow>& table) {
  std::vector<double> x, y;
  for (const auto& row : table) {
    if (row.deviation <= 0.0) continue;
    x.push_back(std::log(row.lambda));
    y.push_back(std::log(row.deviation));
  }
  return stats::slope(x, y);
}

Eigen::MatrixXd reduced_log_weights(const std::vector<SimplexPoint>& source,
                                    const std::vector<SimplexPoint>& target, double lambda) {
  check_sizes(source, target);
  const std::size_t n = source.front().dim();
  const auto N = static_cast<Eigen::Index>(source.size());
  // Rows of inv_p hold 1/p(j), rows of qs hold q(k), each contiguous.
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> inv_p(N, n), qs(N, n);
  for (Eigen::Index j = 0; j < N; ++j) {
    const auto& p = source[static_cast<std::size_t>(j)];
    const auto& q = target[static_cast<std::size_t>(j)];
    if (p.dim() != n || q.dim() != n) throw DimensionMismatch(p.dim(), q.dim());
    inv_p.row(j) = p.coords().cwiseInverse().transpose();
    qs.row(j) = q.coords().transpose();
  }
  Eigen::MatrixXd a(N, N);
  for (Eigen::Index j = 0; j < N; ++j) {
    for (Eigen::Index k = 0; k < N; ++k) {
      a(j, k) = -lambda * std::log(kernels::dot(qs.row(k).data(), inv_p.row(j).data(), n));
    }
  }
  return a;
}

double permanent(const Eigen::MatrixXd& b) {
  if (b.rows() != b.cols()) throw ValidationError("permanent needs a square matrix");
  const auto n = static_cast<std::size_t>(b.rows());
  if (n == 0) return 1.0;
  if (n > 30) throw ValidationError("permanent size too large");
  std::vector<double> row_sum(n, 0.0);
  double total = 0.0;
  std::uint64_t prev_gray = 0;
  for (std::uint64_t g = 1; g < (std::uint64_t{1} << n); ++g) {
    const std::uint64_t gray = g ^ (g >> 1);
    const std::uint64_t diff = gray ^ prev_gray;
    const auto col = static_cast<Eigen::Index>(__builtin_ctzll(diff));
    const double sign = (gray & diff) ? 1.0 : -1.0;
    for (std::size_t i = 0; i < n; ++i) row_sum[i] += sign * b(static_cast<Eigen::Index>(i), col);
    prev_gray = gray;
    double prod = 1.0;
    for (double s : row_sum) prod *= s;
    const int size = __builtin_popcountll(gray);
    total += ((static_cast<int>(n) - size) % 2 ? -1.0 : 1.0) * prod;
  }
  return total;
}

bool perturb_ties(std::vector<SimplexPoint>& atoms) {
  bool changed = false;
  for (std::size_t a = 0; a < atoms.size(); ++a) {
    for (std::size_t b = 0; b < a; ++b) {
      if ((atoms[a].coords() - atoms[b].coords()).cwiseAbs().maxCoeff() > 0.0) continue;
      Eigen::VectorXd x = atoms[a].coords();
      x[0] += 1e-12 * static_cast<double>(a);
      atoms[a] = SimplexPoint(x);
      changed = true;
    }
  }
  return changed;
}

MixtureCoupling build_mixture_exact(std::vector<SimplexPoint> source,
                                    std::vector<SimplexPoint> target, double lambda) {
  check_sizes(source, target);
  if (source.size() > kExactModeMax) throw ValidationError("N too large for exact mode");
  if (!(lambda >= 0.0)) throw ValidationError("lambda must be nonnegative");
  MixtureCoupling out;
  out.ties_perturbed = perturb_ties(source) | perturb_ties(target);
  const std::size_t N = source.size();
  const Eigen::MatrixXd a = reduced_log_weights(source, target, lambda);
  out.mode = MixtureMode::exact;
  out.lambda = lambda;
  out.n_atoms = N;

  std::vector<std::vector<std::size_t>> perms;
  std::vector<std::size_t> perm(N);
  std::iota(perm.begin(), perm.end(), 0);
  do {
    double s = 0.0;
    for (std::size_t j = 0; j < N; ++j) {
      s += a(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(perm[j]));
    }
    out.log_weights.push_back(s);
  } while (std::next_permutation(perm.begin(), perm.end()));

  const double z = log_sum_exp(out.log_weights);
  out.pair_marginal = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
  std::iota(perm.begin(), perm.end(), 0);
  std::size_t idx = 0;
  do {
    double& lw = out.log_weights[idx++];
    lw -= z;
    const double w = std::exp(lw) / static_cast<double>(N);
    for (std::size_t j = 0; j < N; ++j) {
      out.pair_marginal(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(perm[j])) += w;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

Eigen::MatrixXd sinkhorn_coupling(const Eigen::MatrixXd& log_kernel, std::size_t max_iter,
                                  double tol) {
  const Eigen::Index n = log_kernel.rows();
  if (n != log_kernel.cols() || n == 0) throw ValidationError("sinkhorn needs a square kernel");
  Eigen::MatrixXd lk = log_kernel;
  const double target = -std::log(static_cast<double>(n));
  for (std::size_t it = 0; it < max_iter; ++it) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double m = lk.row(i).maxCoeff();
      lk.row(i).array() -= m + std::log((lk.row(i).array() - m).exp().sum()) - target;
    }
    double err = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double m = lk.col(j).maxCoeff();
      const double lse = m + std::log((lk.col(j).array() - m).exp().sum());
      err = std::max(err, std::abs(std::exp(lse) - std::exp(target)));
      lk.col(j).array() -= lse - target;
    }
    if (err < tol) break;
  }
  return lk.array().exp().matrix();
}

MixtureCoupling build_mixture_marginal(std::vector<SimplexPoint> source,
                                       std::vector<SimplexPoint> target, double lambda) {
  check_sizes(source, target);
  if (source.size() > kMarginalModeMax) throw ValidationError("N too large for marginal mode");
  if (!(lambda >= 0.0)) throw ValidationError("lambda must be nonnegative");
  MixtureCoupling out;
  out.ties_perturbed = perturb_ties(source) | perturb_ties(target);
  const std::size_t N = source.size();
  out.mode = MixtureMode::marginal;
  out.lambda = lambda;
  out.n_atoms = N;
  const Eigen::MatrixXd a = reduced_log_weights(source, target, lambda);
  const auto NN = static_cast<Eigen::Index>(N);
  const std::size_t full = (std::size_t{1} << N) - 1;
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();

  // Sum-product over column subsets in log space. fwd[S]: rows 0..|S|-1
  // matched onto the columns S. bwd[S]: the remaining rows matched onto the
  // complement of S. All terms are positive, so nothing cancels.
  std::vector<double> fwd(full + 1, kNegInf), bwd(full + 1, kNegInf), terms(N);
  auto accumulate = [&](std::size_t count) {
    double m = kNegInf;
    for (std::size_t k = 0; k < count; ++k) m = std::max(m, terms[k]);
    if (m == kNegInf) return kNegInf;
    double sum = 0.0;
    for (std::size_t k = 0; k < count; ++k) sum += std::exp(terms[k] - m);
    return m + std::log(sum);
  };
  fwd[0] = 0.0;
  for (std::size_t set = 1; set <= full; ++set) {
    const auto row = static_cast<Eigen::Index>(__builtin_popcountll(set) - 1);
    std::size_t count = 0;
    for (std::size_t k = 0; k < N; ++k) {
      if (set & (std::size_t{1} << k)) terms[count++] = fwd[set ^ (std::size_t{1} << k)] + a(row, static_cast<Eigen::Index>(k));
    }
    fwd[set] = accumulate(count);
  }
  bwd[full] = 0.0;
  for (std::size_t set = full; set-- > 0;) {
    const auto row = static_cast<Eigen::Index>(__builtin_popcountll(set));
    std::size_t count = 0;
    for (std::size_t k = 0; k < N; ++k) {
      if (!(set & (std::size_t{1} << k))) terms[count++] = a(row, static_cast<Eigen::Index>(k)) + bwd[set | (std::size_t{1} << k)];
    }
    bwd[set] = accumulate(count);
  }
  const double log_perm = fwd[full];
  if (!std::isfinite(log_perm)) throw NumericalError("permanent underflow");

  out.pair_marginal = Eigen::MatrixXd::Zero(NN, NN);
  for (std::size_t set = 0; set < full; ++set) {
    const auto row = static_cast<Eigen::Index>(__builtin_popcountll(set));
    const double head = fwd[set] - log_perm;
    if (head == kNegInf) continue;
    for (std::size_t k = 0; k < N; ++k) {
      if (set & (std::size_t{1} << k)) continue;
      const auto col = static_cast<Eigen::Index>(k);
      out.pair_marginal(row, col) += std::exp(head + a(row, col) + bwd[set | (std::size_t{1} << k)]);
    }
  }
  out.pair_marginal /= static_cast<double>(N);
  return out;
}

std::string to_string(MixtureMode mode) { return mode == MixtureMode::exact ? "exact" : "marginal"; }

double theorem2_lambda(double alpha, std::size_t size, std::size_t n) {
  if (!(alpha > 0.0)) throw NumericalError("regularity constant alpha is not positive");
  return (4.0 / alpha) * std::pow(static_cast<double>(size), 2.0 / static_cast<double>(n));
}

namespace {

// W2^2 between sum_{j,k} mass(j,k) delta_(p_j, q_k) and (1/N) sum_l delta_(p_l, t_l).
double mixture_w2_sq(const std::vector<SimplexPoint>& p, const std::vector<SimplexPoint>& q,
                     const std::vector<SimplexPoint>& t, const Eigen::MatrixXd& mass) {
  const std::size_t N = p.size();
  const Eigen::MatrixXd pp = cost_matrix(p, p, CostKind::sq_euclidean);
  const Eigen::MatrixXd qt = cost_matrix(q, t, CostKind::sq_euclidean);
  const auto NN = static_cast<Eigen::Index>(N);
  Eigen::MatrixXd c(NN * NN, NN);
  Eigen::VectorXd supply(NN * NN);
  for (Eigen::Index j = 0; j < NN; ++j) {
    for (Eigen::Index k = 0; k < NN; ++k) {
      const Eigen::Index row = j * NN + k;
      supply[row] = std::max(0.0, mass(j, k));
      for (Eigen::Index l = 0; l < NN; ++l) c(row, l) = pp(j, l) + qt(k, l);
    }
  }
  supply /= supply.sum();
  const Eigen::VectorXd demand = Eigen::VectorXd::Constant(NN, 1.0 / static_cast<double>(N));
  return solve_transport(c, supply, demand).value;
}

}  // namespace

Theorem2Result theorem2_experiment(const Theorem2Config& cfg) {
  if (cfg.sizes.empty() || cfg.seeds == 0) throw ValidationError("empty experiment grid");
  for (std::size_t N : cfg.sizes) {
    if (N == 0 || N > kMarginalModeMax) throw ValidationError("N outside [1, 16]");
  }
  const GeneratorPtr g = parse_generator(cfg.generator);
  Theorem2Result result;
  result.regularity = estimate_regularity(*g, cfg.n, cfg.eps, cfg.regularity_pairs,
                                          derive_seed(cfg.master_seed, "regularity"));
  if (!cfg.lambda && result.regularity.degenerate) {
    throw NumericalError("generator has alpha = 0; automatic lambda is undefined");
  }
  const TruncatedUniformSampler sampler(cfg.n, cfg.eps);

  const std::size_t jobs = cfg.sizes.size() * cfg.seeds;
  std::vector<Theorem2Record> records(jobs);
  parallel_for(jobs, [&](std::size_t job) {
    const std::size_t N = cfg.sizes[job / cfg.seeds];
    const std::size_t seed = job % cfg.seeds;
    RandomStream rng(cfg.master_seed, "theorem2/N=" + std::to_string(N), seed);
    std::vector<SimplexPoint> p, q, t;
    for (std::size_t j = 0; j < N; ++j) p.push_back(sampler(rng));
    for (std::size_t j = 0; j < N; ++j) q.push_back(transport_map(*g, sampler(rng)));
    for (const auto& x : p) t.push_back(transport_map(*g, x));

    Theorem2Record rec;
    rec.size = N;
    rec.seed = seed;
    rec.lambda = cfg.lambda ? *cfg.lambda : theorem2_lambda(result.regularity.alpha, N, cfg.n);
    MixtureCoupling mix = N <= kExactModeMax ? build_mixture_exact(p, q, rec.lambda)
                                             : build_mixture_marginal(p, q, rec.lambda);
    rec.mode = mix.mode;
    rec.ties_perturbed = mix.ties_perturbed;
    if (N <= cfg.cross_check_max) {
      const MixtureCoupling other = build_mixture_marginal(p, q, rec.lambda);
      rec.mode_gap = (other.pair_marginal - mix.pair_marginal).cwiseAbs().maxCoeff();
    }
    const auto NN = static_cast<Eigen::Index>(N);
    rec.w2_sq = mixture_w2_sq(p, q, t, mix.pair_marginal);
    rec.w2_sq_baseline = mixture_w2_sq(
        p, q, t, Eigen::MatrixXd::Constant(NN, NN, 1.0 / static_cast<double>(N * N)));
    rec.w2_sq_sinkhorn = mixture_w2_sq(
        p, q, t, sinkhorn_coupling(reduced_log_weights(p, q, rec.lambda)));
    Eigen::MatrixXd qm(NN, static_cast<Eigen::Index>(cfg.n)), tm(NN, static_cast<Eigen::Index>(cfg.n));
    for (Eigen::Index j = 0; j < NN; ++j) {
      qm.row(j) = q[static_cast<std::size_t>(j)].coords().transpose();
      tm.row(j) = t[static_cast<std::size_t>(j)].coords().transpose();
    }
    rec.matching = l2_matching_distance(tm, qm);
    const Assignment best = solve_assignment(-reduced_log_weights(p, q, 1.0));
    for (std::size_t j = 0; j < N; ++j) {
      rec.optimal_pair_mass +=
          mix.pair_marginal(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(best.perm[j]));
    }
    records[job] = rec;
  });
  result.records = records;

  std::vector<double> sizes, medians;
  for (std::size_t s = 0; s < cfg.sizes.size(); ++s) {
    std::vector<double> w, base, sk, match;
    for (std::size_t seed = 0; seed < cfg.seeds; ++seed) {
      const auto& rec = records[s * cfg.seeds + seed];
      w.push_back(rec.w2_sq);
      base.push_back(rec.w2_sq_baseline);
      sk.push_back(rec.w2_sq_sinkhorn);
      match.push_back(rec.matching);
      result.max_mode_gap = std::max(result.max_mode_gap, rec.mode_gap);
    }
    Theorem2Summary sum;
    sum.size = cfg.sizes[s];
    sum.lambda = records[s * cfg.seeds].lambda;
    sum.median_w2_sq = stats::median(w);
    sum.median_baseline = stats::median(base);
    sum.median_sinkhorn = stats::median(sk);
    sum.median_matching = stats::median(match);
    result.summary.push_back(sum);
    sizes.push_back(static_cast<double>(sum.size));
    medians.push_back(sum.median_w2_sq);
  }
  result.spearman = sizes.size() >= 2 ? stats::spearman(sizes, medians) : 0.0;
  return result;
}

}  // namespace dtrans
