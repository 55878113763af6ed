#pragma once

// Exact optimal transport for tiny problems by enumerating vertices of the
// transport polytope. Deliberately shares no code with the solver.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace oracle {

namespace detail {

struct Dsu {
  std::vector<int> p;
  explicit Dsu(int n) : p(static_cast<std::size_t>(n)) { std::iota(p.begin(), p.end(), 0); }
  int find(int x) {
    while (p[static_cast<std::size_t>(x)] != x) x = p[static_cast<std::size_t>(x)];
    return x;
  }
};

// Basic solution on a spanning tree of the bipartite graph: peel leaves.
inline bool tree_flow(int n, int m, const std::vector<int>& cells, const Eigen::VectorXd& a,
                      const Eigen::VectorXd& b, std::vector<double>& flow) {
  std::vector<double> res(static_cast<std::size_t>(n + m));
  for (int i = 0; i < n; ++i) res[static_cast<std::size_t>(i)] = a(i);
  for (int j = 0; j < m; ++j) res[static_cast<std::size_t>(n + j)] = b(j);
  std::vector<int> degree(static_cast<std::size_t>(n + m), 0);
  for (int c : cells) {
    ++degree[static_cast<std::size_t>(c / m)];
    ++degree[static_cast<std::size_t>(n + c % m)];
  }
  flow.assign(cells.size(), 0.0);
  std::vector<bool> used(cells.size(), false);
  for (std::size_t step = 0; step < cells.size(); ++step) {
    bool found = false;
    for (std::size_t e = 0; e < cells.size() && !found; ++e) {
      if (used[e]) continue;
      const int u = cells[e] / m, v = n + cells[e] % m;
      int leaf = -1, other = -1;
      if (degree[static_cast<std::size_t>(u)] == 1) {
        leaf = u;
        other = v;
      } else if (degree[static_cast<std::size_t>(v)] == 1) {
        leaf = v;
        other = u;
      }
      if (leaf < 0) continue;
      flow[e] = res[static_cast<std::size_t>(leaf)];
      res[static_cast<std::size_t>(other)] -= flow[e];
      res[static_cast<std::size_t>(leaf)] = 0.0;
      --degree[static_cast<std::size_t>(u)];
      --degree[static_cast<std::size_t>(v)];
      used[e] = true;
      found = true;
    }
    if (!found) return false;
  }
  for (double f : flow) {
    if (f < -1e-12) return false;
  }
  return true;
}

inline void enumerate(int n, int m, int next, std::vector<int>& cells, const Dsu& dsu,
                      const Eigen::MatrixXd& C, const Eigen::VectorXd& a,
                      const Eigen::VectorXd& b, double& best) {
  const int need = n + m - 1;
  if (static_cast<int>(cells.size()) == need) {
    std::vector<double> flow;
    if (!tree_flow(n, m, cells, a, b, flow)) return;
    double cost = 0.0;
    for (std::size_t e = 0; e < cells.size(); ++e) cost += flow[e] * C(cells[e] / m, cells[e] % m);
    best = std::min(best, cost);
    return;
  }
  for (int c = next; c < n * m; ++c) {
    if (n * m - c < need - static_cast<int>(cells.size())) return;
    Dsu d = dsu;
    const int ru = d.find(c / m), rv = d.find(n + c % m);
    if (ru == rv) continue;  // would close a cycle
    d.p[static_cast<std::size_t>(ru)] = rv;
    cells.push_back(c);
    enumerate(n, m, c + 1, cells, d, C, a, b, best);
    cells.pop_back();
  }
}

}  // namespace detail

// min <P, C> over couplings of a and b, by spanning-tree vertex enumeration.
// Only for small n*m.
inline double exact_ot(const Eigen::MatrixXd& C, const Eigen::VectorXd& a,
                       const Eigen::VectorXd& b) {
  const int n = static_cast<int>(C.rows()), m = static_cast<int>(C.cols());
  if (n * m > 24) throw std::invalid_argument("exact_ot: problem too large");
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> cells;
  detail::enumerate(n, m, 0, cells, detail::Dsu(n + m), C, a, b, best);
  return best;
}

// Uniform square problems: the optimum sits on a permutation matrix.
inline double exact_assignment(const Eigen::MatrixXd& C) {
  const int n = static_cast<int>(C.rows());
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += C(i, perm[static_cast<std::size_t>(i)]);
    best = std::min(best, s / n);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace oracle
