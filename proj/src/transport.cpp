// Copyright 2026 The wassflow Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "wassflow/transport.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

namespace wassflow {

Vec TransportPlan::row_sums(int n) const {
  Vec r = Vec::Zero(n);
  for (const auto& e : entries) r[e.i] += e.mass;
  return r;
}

Vec TransportPlan::col_sums(int m) const {
  Vec c = Vec::Zero(m);
  for (const auto& e : entries) c[e.j] += e.mass;
  return c;
}

double TransportPlan::cost(const DiscreteMeasure& mu,
                           const DiscreteMeasure& nu) const {
  double acc = 0.0;
  for (const auto& e : entries) {
    acc += e.mass * (mu.points().col(e.i) - nu.points().col(e.j)).norm();
  }
  return acc;
}

bool TransportPlan::feasible(const DiscreteMeasure& mu,
                             const DiscreteMeasure& nu, double tol) const {
  const Vec r = row_sums(mu.size());
  const Vec c = col_sums(nu.size());
  return (r - mu.weights()).cwiseAbs().maxCoeff() <= tol &&
         (c - nu.weights()).cwiseAbs().maxCoeff() <= tol;
}

namespace {

// Dense transportation simplex (MODI). The basis is a spanning tree on the
// bipartite node set {rows} u {cols} with n+m-1 basic cells, kept as a flat
// list. Degenerate (zero-mass) basic cells are allowed; the leaving arc is
// the minimum-mass '-' cell with lexicographic tie-break, which keeps pivots
// deterministic.
class TransportationSimplex {
 public:
  TransportationSimplex(const Mat& cost, Vec supply, Vec demand)
      : c_(cost),
        n_(static_cast<int>(cost.rows())),
        m_(static_cast<int>(cost.cols())),
        a_(std::move(supply)),
        b_(std::move(demand)) {
    // Force exact balance; the imbalance is at most a few ulps of mass.
    b_[m_ - 1] += a_.sum() - b_.sum();
  }

  void run() {
    northwest_corner();
    const double tol = 1e-11 * std::max(1.0, c_.cwiseAbs().maxCoeff());
    const long max_pivots = 2000L + 50L * static_cast<long>(n_ + m_) *
                                        static_cast<long>(n_ + m_);
    for (long pivot = 0;; ++pivot) {
      if (pivot > max_pivots) {
        throw SolverError("transportation simplex exceeded pivot budget");
      }
      compute_duals();
      int ei = -1, ej = -1;
      double best = -tol;
      for (int i = 0; i < n_; ++i) {
        for (int j = 0; j < m_; ++j) {
          const double rc = c_(i, j) - u_[i] - v_[j];
          if (rc < best) {
            best = rc;
            ei = i;
            ej = j;
          }
        }
      }
      if (ei < 0) break;  // optimal
      pivot_on(ei, ej);
    }
  }

  double value() const {
    double acc = 0.0;
    for (const auto& cell : basis_) acc += cell.mass * c_(cell.i, cell.j);
    return acc;
  }

  TransportPlan plan() const {
    TransportPlan p;
    for (const auto& cell : basis_) {
      if (cell.mass > 0.0) p.entries.push_back({cell.i, cell.j, cell.mass});
    }
    std::sort(p.entries.begin(), p.entries.end(),
              [](const TransportPlan::Entry& x, const TransportPlan::Entry& y) {
                return x.i != y.i ? x.i < y.i : x.j < y.j;
              });
    return p;
  }

 private:
  struct Cell {
    int i, j;
    double mass;
  };

  void northwest_corner() {
    Vec a = a_, b = b_;
    int i = 0, j = 0;
    basis_.clear();
    basis_.reserve(n_ + m_ - 1);
    while (true) {
      const double q = std::min(a[i], b[j]);
      basis_.push_back({i, j, std::max(q, 0.0)});
      a[i] -= q;
      b[j] -= q;
      if (i == n_ - 1 && j == m_ - 1) break;
      if (a[i] <= 0.0 && i < n_ - 1) {
        ++i;
      } else {
        ++j;
      }
    }
  }

  // Node ids: rows are 0..n-1, columns are n..n+m-1.
  void rebuild_adjacency() {
    adj_.assign(n_ + m_, {});
    for (int k = 0; k < static_cast<int>(basis_.size()); ++k) {
      adj_[basis_[k].i].push_back(k);
      adj_[n_ + basis_[k].j].push_back(k);
    }
  }

  void compute_duals() {
    rebuild_adjacency();
    u_.assign(n_, 0.0);
    v_.assign(m_, 0.0);
    std::vector<char> seen(n_ + m_, 0);
    std::deque<int> queue{0};
    seen[0] = 1;
    while (!queue.empty()) {
      const int node = queue.front();
      queue.pop_front();
      for (const int k : adj_[node]) {
        const Cell& cell = basis_[k];
        const int other = (node < n_) ? n_ + cell.j : cell.i;
        if (seen[other]) continue;
        seen[other] = 1;
        if (other >= n_) {
          v_[cell.j] = c_(cell.i, cell.j) - u_[cell.i];
        } else {
          u_[cell.i] = c_(cell.i, cell.j) - v_[cell.j];
        }
        queue.push_back(other);
      }
    }
  }

  // The unique tree path from row ei to column ej, as basis indices.
  std::vector<int> tree_path(int ei, int ej) const {
    std::vector<int> parent_edge(n_ + m_, -1);
    std::vector<int> parent_node(n_ + m_, -1);
    std::vector<char> seen(n_ + m_, 0);
    std::deque<int> queue{ei};
    seen[ei] = 1;
    const int target = n_ + ej;
    while (!queue.empty()) {
      const int node = queue.front();
      queue.pop_front();
      if (node == target) break;
      for (const int k : adj_[node]) {
        const Cell& cell = basis_[k];
        const int other = (node < n_) ? n_ + cell.j : cell.i;
        if (seen[other]) continue;
        seen[other] = 1;
        parent_edge[other] = k;
        parent_node[other] = node;
        queue.push_back(other);
      }
    }
    std::vector<int> path;
    for (int node = target; node != ei; node = parent_node[node]) {
      path.push_back(parent_edge[node]);
    }
    std::reverse(path.begin(), path.end());
    return path;
  }

  void pivot_on(int ei, int ej) {
    const std::vector<int> path = tree_path(ei, ej);
    // Walking the path from row ei, cells alternate -,+,-,... so even
    // positions lose mass when the entering arc gains.
    double theta = std::numeric_limits<double>::infinity();
    int leave = -1;
    for (std::size_t p = 0; p < path.size(); p += 2) {
      const Cell& cell = basis_[path[p]];
      const bool better =
          cell.mass < theta ||
          (cell.mass == theta && leave >= 0 &&
           (cell.i < basis_[leave].i ||
            (cell.i == basis_[leave].i && cell.j < basis_[leave].j)));
      if (better) {
        theta = cell.mass;
        leave = path[p];
      }
    }
    for (std::size_t p = 0; p < path.size(); ++p) {
      basis_[path[p]].mass += (p % 2 == 0) ? -theta : theta;
    }
    basis_[leave] = {ei, ej, theta};
  }

  const Mat& c_;
  int n_, m_;
  Vec a_, b_;
  std::vector<Cell> basis_;
  std::vector<std::vector<int>> adj_;
  std::vector<double> u_, v_;
};

}  // namespace

W1Result w1(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  if (mu.dim() != nu.dim()) {
    throw std::invalid_argument("w1: dimension mismatch");
  }
  const int n = mu.size(), m = nu.size();
  Mat cost(n, m);
  for (int j = 0; j < m; ++j) {
    cost.col(j) = (mu.points().colwise() - nu.points().col(j)).colwise().norm().transpose();
  }
  TransportationSimplex simplex(cost, mu.weights(), nu.weights());
  simplex.run();
  return {simplex.value(), simplex.plan()};
}

double w1_oracle_uniform(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  const int n = mu.size();
  if (nu.size() != n) {
    throw std::invalid_argument("oracle needs equal atom counts");
  }
  if (n > 8) {
    throw std::invalid_argument("oracle limited to n <= 8 (n! assignments)");
  }
  const double uw = 1.0 / static_cast<double>(n);
  if ((mu.weights().array() - uw).abs().maxCoeff() > 1e-12 ||
      (nu.weights().array() - uw).abs().maxCoeff() > 1e-12) {
    throw std::invalid_argument("oracle needs uniform weights");
  }
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      total += (mu.points().col(i) - nu.points().col(perm[i])).norm();
    }
    best = std::min(best, total * uw);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

std::vector<NarrowProbeRow> metrizes_narrow_probe(
    const std::vector<DiscreteMeasure>& seq, const DiscreteMeasure& limit,
    const std::vector<std::function<double(const Vec&)>>& testfns) {
  std::vector<NarrowProbeRow> rows;
  rows.reserve(seq.size());
  const double m_limit = momentum(limit);
  for (const auto& mu : seq) {
    NarrowProbeRow row;
    row.w1_to_limit = w1_value(mu, limit);
    for (const auto& f : testfns) {
      row.testfn_gap.push_back(std::abs(integrate(mu, f) - integrate(limit, f)));
    }
    row.momentum_gap = std::abs(momentum(mu) - m_limit);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace wassflow
