#include "dtrans/ot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "dtrans/kernels.hpp"
#include "dtrans/rng.hpp"

namespace dtrans {

DiscreteMeasure::DiscreteMeasure(std::vector<SimplexPoint> a, Eigen::VectorXd w)
    : atoms(std::move(a)), weights(std::move(w)) {
  if (atoms.empty()) throw ValidationError("measure needs at least one atom");
  if (static_cast<std::size_t>(weights.size()) != atoms.size()) {
    throw DimensionMismatch(atoms.size(), static_cast<std::size_t>(weights.size()));
  }
  if (weights.minCoeff() < 0.0) throw ValidationError("negative measure weight");
  if (std::abs(weights.sum() - 1.0) > 1e-12) throw ValidationError("weights must sum to one");
  for (const auto& p : atoms) {
    if (p.dim() != atoms.front().dim()) throw DimensionMismatch(p.dim(), atoms.front().dim());
  }
}

DiscreteMeasure DiscreteMeasure::uniform(std::vector<SimplexPoint> atoms) {
  const auto n = static_cast<Eigen::Index>(atoms.size());
  return DiscreteMeasure(std::move(atoms), Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n)));
}

Eigen::MatrixXd cost_matrix(const std::vector<SimplexPoint>& source,
                            const std::vector<SimplexPoint>& target, CostKind kind) {
  const auto m = static_cast<Eigen::Index>(source.size());
  const auto k = static_cast<Eigen::Index>(target.size());
  Eigen::MatrixXd c(m, k);
  if (kind == CostKind::sq_euclidean) {
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j < k; ++j) {
        const auto& p = source[static_cast<std::size_t>(i)];
        const auto& q = target[static_cast<std::size_t>(j)];
        if (p.dim() != q.dim()) throw DimensionMismatch(p.dim(), q.dim());
        c(i, j) = kernels::sq_dist(p.coords().data(), q.coords().data(), p.dim());
      }
    }
    return c;
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) {
      c(i, j) = cost(source[static_cast<std::size_t>(i)], target[static_cast<std::size_t>(j)]);
    }
  }
  return c;
}

Eigen::MatrixXd cost_matrix(const DiscreteMeasure& source, const DiscreteMeasure& target,
                            CostKind kind) {
  return cost_matrix(source.atoms, target.atoms, kind);
}

Eigen::MatrixXd sq_distance_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.cols() != b.cols()) {
    throw DimensionMismatch(static_cast<std::size_t>(a.cols()), static_cast<std::size_t>(b.cols()));
  }
  // Row-major copies keep each point contiguous for the kernels.
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> ra = a, rb = b;
  Eigen::MatrixXd d(a.rows(), b.rows());
  const auto dim = static_cast<std::size_t>(a.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
      d(i, j) = kernels::sq_dist(ra.row(i).data(), rb.row(j).data(), dim);
    }
  }
  return d;
}

namespace {

struct Hungarian {
  std::vector<std::size_t> perm;
  Eigen::VectorXd u, v;
};

// Shortest augmenting path method with dual potentials.
Hungarian hungarian(const Eigen::MatrixXd& a) {
  const auto n = static_cast<std::size_t>(a.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = a(static_cast<Eigen::Index>(i0 - 1), static_cast<Eigen::Index>(j - 1)) -
                           u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  Hungarian h;
  h.perm.assign(n, 0);
  for (std::size_t j = 1; j <= n; ++j) h.perm[p[j] - 1] = j - 1;
  h.u.resize(static_cast<Eigen::Index>(n));
  h.v.resize(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    h.u[static_cast<Eigen::Index>(i)] = u[i + 1];
    h.v[static_cast<Eigen::Index>(i)] = v[i + 1];
  }
  return h;
}

// Tries to re-route the matching so that row `row` takes column `col`, using
// only tight edges among rows/columns not yet fixed. Updates the matching on
// success.
bool force_edge(const std::vector<std::vector<char>>& tight, std::vector<std::size_t>& row_of,
                std::vector<std::size_t>& col_of, const std::vector<char>& row_fixed,
                std::size_t row, std::size_t col) {
  const std::size_t n = row_of.size();
  if (col_of[row] == col) return true;
  const std::size_t free_row = row_of[col];  // loses its column
  const std::size_t free_col = col_of[row];  // becomes available
  // Augmenting path free_row -> ... -> free_col avoiding `row` and `col`.
  std::vector<std::size_t> prev_row(n, n);  // for each column, the row that reached it
  std::vector<char> seen_col(n, 0);
  std::queue<std::size_t> bfs;
  bfs.push(free_row);
  bool found = false;
  while (!bfs.empty() && !found) {
    const std::size_t r = bfs.front();
    bfs.pop();
    for (std::size_t c = 0; c < n; ++c) {
      if (c == col || seen_col[c] || !tight[r][c]) continue;
      if (c != free_col && c == col_of[r]) continue;
      seen_col[c] = 1;
      prev_row[c] = r;
      if (c == free_col) {
        found = true;
        break;
      }
      const std::size_t next = row_of[c];
      if (next == row || row_fixed[next]) continue;
      bfs.push(next);
    }
  }
  if (!found) return false;
  std::size_t c = free_col;
  while (true) {
    const std::size_t r = prev_row[c];
    const std::size_t old = col_of[r];
    col_of[r] = c;
    row_of[c] = r;
    if (r == free_row) break;
    c = old;
  }
  col_of[row] = col;
  row_of[col] = row;
  return true;
}

}  // namespace

Assignment solve_assignment(const Eigen::MatrixXd& cost) {
  if (cost.rows() != cost.cols()) {
    throw ValidationError("assignment needs a square cost matrix");
  }
  const auto n = static_cast<std::size_t>(cost.rows());
  if (n == 0) throw ValidationError("empty cost matrix");
  if (!cost.allFinite()) throw ValidationError("cost matrix has non-finite entries");
  const Hungarian h = hungarian(cost);

  const double scale = std::max(1.0, cost.cwiseAbs().maxCoeff());
  const double tol = 1e-9 * scale;
  std::vector<std::vector<char>> tight(n, std::vector<char>(n, 0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double red = cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) -
                         h.u[static_cast<Eigen::Index>(i)] - h.v[static_cast<Eigen::Index>(j)];
      tight[i][j] = red <= tol;
    }
  }
  std::vector<std::size_t> col_of = h.perm, row_of(n);
  for (std::size_t i = 0; i < n; ++i) row_of[col_of[i]] = i;
  std::vector<char> row_fixed(n, 0), col_fixed(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (col_fixed[j] || !tight[i][j]) continue;
      if (force_edge(tight, row_of, col_of, row_fixed, i, j)) break;
    }
    row_fixed[i] = 1;
    col_fixed[col_of[i]] = 1;
  }
  Assignment out;
  out.perm = col_of;
  for (std::size_t i = 0; i < n; ++i) {
    out.value += cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(out.perm[i]));
  }
  return out;
}

namespace {

struct Cell {
  std::size_t row, col;
};

class NetworkSimplex {
 public:
  NetworkSimplex(const Eigen::MatrixXd& c, const Eigen::VectorXd& a, const Eigen::VectorXd& b)
      : c_(c), m_(static_cast<std::size_t>(c.rows())), k_(static_cast<std::size_t>(c.cols())),
        x_(Eigen::MatrixXd::Zero(c.rows(), c.cols())),
        basic_(m_, std::vector<char>(k_, 0)) {
    initial_basis(a, b);
  }

  TransportPlan run() {
    const double scale = std::max(1.0, c_.cwiseAbs().maxCoeff());
    const double tol = 1e-12 * scale;
    std::size_t degenerate_run = 0;
    TransportPlan plan;
    const std::size_t max_pivots = 50 * (m_ + k_) * (m_ + k_) + 1000;
    for (;;) {
      compute_potentials();
      const bool bland = degenerate_run > m_ + k_;
      Cell enter{m_, k_};
      double best = -tol;
      for (std::size_t i = 0; i < m_ && !(bland && enter.row < m_); ++i) {
        for (std::size_t j = 0; j < k_; ++j) {
          if (basic_[i][j]) continue;
          const double red = reduced(i, j);
          if (red < best) {
            best = red;
            enter = {i, j};
            if (bland) break;
          }
        }
      }
      if (enter.row == m_) break;
      if (++plan.pivots > max_pivots) throw NumericalError("transport simplex did not converge");
      const double theta = pivot(enter);
      degenerate_run = theta > 0.0 ? 0 : degenerate_run + 1;
    }
    compute_potentials();
    const double slack_tol = 1e-9 * scale;
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t j = 0; j < k_; ++j) {
        if (reduced(i, j) < -slack_tol) {
          throw NumericalError("complementary slackness check failed");
        }
      }
    }
    plan.mass = x_;
    plan.value = (x_.array() * c_.array()).sum();
    return plan;
  }

 private:
  // Row i is node i, column j is node m + j.
  void initial_basis(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    std::vector<double> s(a.data(), a.data() + m_), d(b.data(), b.data() + k_);
    std::size_t i = 0, j = 0;
    for (;;) {
      const double x = std::max(0.0, std::min(s[i], d[j]));
      x_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = x;
      basic_[i][j] = 1;
      s[i] -= x;
      d[j] -= x;
      if (i == m_ - 1 && j == k_ - 1) break;
      if (j == k_ - 1) {
        ++i;
      } else if (i == m_ - 1) {
        ++j;
      } else if (s[i] <= d[j]) {
        ++i;
      } else {
        ++j;
      }
    }
  }

  double reduced(std::size_t i, std::size_t j) const {
    return c_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) - u_[i] - v_[j];
  }

  void build_tree() {
    const std::size_t nodes = m_ + k_;
    adj_.assign(nodes, {});
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t j = 0; j < k_; ++j) {
        if (!basic_[i][j]) continue;
        adj_[i].push_back(m_ + j);
        adj_[m_ + j].push_back(i);
      }
    }
    parent_.assign(nodes, nodes);
    depth_.assign(nodes, 0);
    order_.clear();
    std::vector<char> seen(nodes, 0);
    std::queue<std::size_t> q;
    q.push(0);
    seen[0] = 1;
    while (!q.empty()) {
      const std::size_t v = q.front();
      q.pop();
      order_.push_back(v);
      for (std::size_t w : adj_[v]) {
        if (seen[w]) continue;
        seen[w] = 1;
        parent_[w] = v;
        depth_[w] = depth_[v] + 1;
        q.push(w);
      }
    }
    if (order_.size() != nodes) throw NumericalError("transport basis is not a spanning tree");
  }

  void compute_potentials() {
    build_tree();
    u_.assign(m_, 0.0);
    v_.assign(k_, 0.0);
    for (std::size_t v : order_) {
      if (v == 0) continue;
      const std::size_t p = parent_[v];
      if (v < m_) {
        const std::size_t col = p - m_;
        u_[v] = c_(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(col)) - v_[col];
      } else {
        const std::size_t col = v - m_;
        v_[col] = c_(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(col)) - u_[p];
      }
    }
  }

  static Cell edge(std::size_t a, std::size_t b, std::size_t m) {
    return a < m ? Cell{a, b - m} : Cell{b, a - m};
  }

  double pivot(Cell enter) {
    // Tree path from column node to row node closes the cycle.
    std::size_t a = m_ + enter.col, b = enter.row;
    std::vector<std::size_t> path_a{a}, path_b{b};
    while (a != b) {
      if (depth_[a] >= depth_[b]) {
        a = parent_[a];
        path_a.push_back(a);
      } else {
        b = parent_[b];
        path_b.push_back(b);
      }
    }
    path_b.pop_back();
    std::vector<std::size_t> walk = path_a;
    walk.insert(walk.end(), path_b.rbegin(), path_b.rend());
    // walk: col node ... row node; edge s alternates -, +, -, ...
    std::vector<Cell> minus, plus;
    for (std::size_t s = 0; s + 1 < walk.size(); ++s) {
      (s % 2 == 0 ? minus : plus).push_back(edge(walk[s], walk[s + 1], m_));
    }
    double theta = std::numeric_limits<double>::infinity();
    Cell leave{m_, k_};
    for (const Cell& e : minus) {
      const double x = x_(static_cast<Eigen::Index>(e.row), static_cast<Eigen::Index>(e.col));
      if (x < theta || (x == theta && (e.row < leave.row ||
                                       (e.row == leave.row && e.col < leave.col)))) {
        theta = x;
        leave = e;
      }
    }
    theta = std::max(theta, 0.0);
    x_(static_cast<Eigen::Index>(enter.row), static_cast<Eigen::Index>(enter.col)) = theta;
    for (const Cell& e : plus) x_(static_cast<Eigen::Index>(e.row), static_cast<Eigen::Index>(e.col)) += theta;
    for (const Cell& e : minus) {
      double& x = x_(static_cast<Eigen::Index>(e.row), static_cast<Eigen::Index>(e.col));
      x = std::max(0.0, x - theta);
    }
    x_(static_cast<Eigen::Index>(leave.row), static_cast<Eigen::Index>(leave.col)) = 0.0;
    basic_[leave.row][leave.col] = 0;
    basic_[enter.row][enter.col] = 1;
    return theta;
  }

  const Eigen::MatrixXd& c_;
  std::size_t m_, k_;
  Eigen::MatrixXd x_;
  std::vector<std::vector<char>> basic_;
  std::vector<std::vector<std::size_t>> adj_;
  std::vector<std::size_t> parent_, depth_, order_;
  std::vector<double> u_, v_;
};

}  // namespace

TransportPlan solve_transport(const Eigen::MatrixXd& cost, const Eigen::VectorXd& supply,
                              const Eigen::VectorXd& demand) {
  if (cost.rows() != supply.size()) {
    throw DimensionMismatch(static_cast<std::size_t>(cost.rows()), static_cast<std::size_t>(supply.size()));
  }
  if (cost.cols() != demand.size()) {
    throw DimensionMismatch(static_cast<std::size_t>(cost.cols()), static_cast<std::size_t>(demand.size()));
  }
  if (cost.size() == 0) throw ValidationError("empty transport problem");
  if (!cost.allFinite()) throw ValidationError("cost matrix has non-finite entries");
  if (supply.minCoeff() < 0.0 || demand.minCoeff() < 0.0) throw ValidationError("negative marginal");
  if (std::abs(supply.sum() - demand.sum()) > 1e-10) throw ValidationError("infeasible marginals");
  NetworkSimplex solver(cost, supply, demand);
  return solver.run();
}

Coupling solve_kantorovich(const DiscreteMeasure& source, const DiscreteMeasure& target,
                           CostKind kind) {
  const Eigen::MatrixXd c = cost_matrix(source, target, kind);
  TransportPlan plan = solve_transport(c, source.weights, target.weights);
  return Coupling{std::move(plan.mass), source, target, plan.value};
}

double w2_distance(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  return std::sqrt(std::max(0.0, solve_kantorovich(a, b, CostKind::sq_euclidean).value));
}

double l2_matching_distance(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  if (x.rows() != y.rows()) {
    throw DimensionMismatch(static_cast<std::size_t>(x.rows()), static_cast<std::size_t>(y.rows()));
  }
  return solve_assignment(sq_distance_matrix(x, y)).value / static_cast<double>(x.rows());
}

MonotonicityReport certify_c_monotone(const Eigen::MatrixXd& cost, const Eigen::MatrixXd& mass,
                                      std::size_t budget, std::uint64_t seed) {
  if (cost.rows() != mass.rows() || cost.cols() != mass.cols()) {
    throw DimensionMismatch(static_cast<std::size_t>(cost.size()), static_cast<std::size_t>(mass.size()));
  }
  std::vector<Cell> support;
  for (Eigen::Index i = 0; i < mass.rows(); ++i) {
    for (Eigen::Index j = 0; j < mass.cols(); ++j) {
      if (mass(i, j) > 1e-12) support.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(j)});
    }
  }
  MonotonicityReport rep;
  rep.support = support.size();
  rep.min_cycle_gap = std::numeric_limits<double>::infinity();
  auto at = [&](std::size_t i, std::size_t j) {
    return cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  };
  auto cycle_gap = [&](const std::vector<std::size_t>& idx) {
    double g = 0.0;
    for (std::size_t s = 0; s < idx.size(); ++s) {
      const Cell& cur = support[idx[s]];
      const Cell& nxt = support[idx[(s + 1) % idx.size()]];
      g += at(nxt.row, cur.col) - at(cur.row, cur.col);
    }
    return g;
  };
  if (support.size() >= 2 && support.size() <= 2000) {
    for (std::size_t a = 0; a < support.size(); ++a) {
      for (std::size_t b = a + 1; b < support.size(); ++b) {
        rep.min_cycle_gap = std::min(rep.min_cycle_gap, cycle_gap({a, b}));
        ++rep.cycles;
      }
    }
  }
  if (support.size() >= 3) {
    RandomStream rng(seed, "cycles");
    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k < budget; ++k) {
      const std::size_t len = 3 + rng.below(std::min<std::size_t>(4, support.size() - 2));
      idx.clear();
      while (idx.size() < len) {
        const std::size_t pick = rng.below(support.size());
        if (std::find(idx.begin(), idx.end(), pick) == idx.end()) idx.push_back(pick);
      }
      rep.min_cycle_gap = std::min(rep.min_cycle_gap, cycle_gap(idx));
      ++rep.cycles;
    }
  }
  if (rep.cycles == 0) rep.min_cycle_gap = 0.0;
  rep.certified = rep.min_cycle_gap >= -1e-9;
  return rep;
}

MonotonicityReport certify_c_monotone(const Coupling& coupling, std::size_t budget,
                                      std::uint64_t seed) {
  return certify_c_monotone(cost_matrix(coupling.source, coupling.target, CostKind::dirichlet),
                            coupling.mass, budget, seed);
}

}  // namespace dtrans
