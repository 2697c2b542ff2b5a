#pragma once

// Reference computations for the test suite.  Everything in here is
// deliberately brute force and shares no code path with the library: cycles
// are enumerated one by one, potentials come from simple-path search, and
// derivatives from central differences.  If the library and this file agree,
// they agree for independent reasons.

#include <cstdint>
#include <functional>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "weakkam/cost_system.hpp"
#include "weakkam/rational.hpp"

namespace oracle {

// Visits every simple cycle exactly once, as the node sequence starting at
// its smallest node.  Rooted enumeration: a cycle rooted at r may only use
// nodes > r in its interior, so no rotation is ever revisited.
template <class S, class F>
void for_each_simple_cycle(const weakkam::cost_system<S>& sys, F&& visit) {
  const int n = sys.n();
  std::vector<int> path;
  std::vector<char> used(n, 0);
  std::function<void(int, int, S)> dfs = [&](int root, int v, S total) {
    for (int id : sys.out_edges(v)) {
      const auto& e = sys.edge_at(id);
      if (e.to == root) {
        visit(path, total + e.cost);
      } else if (e.to > root && !used[e.to]) {
        used[e.to] = 1;
        path.push_back(e.to);
        dfs(root, e.to, total + e.cost);
        path.pop_back();
        used[e.to] = 0;
      }
    }
  };
  for (int r = 0; r < n; ++r) {
    path = {r};
    std::fill(used.begin(), used.end(), 0);
    used[r] = 1;
    dfs(r, r, S{});
  }
}

template <class S>
struct cycle_record {
  std::vector<int> nodes;
  S total{};
  int len = 0;
};

// Minimum mean cycle by exhaustion.  Means are compared by cross
// multiplication so the rational mode stays exact.
template <class S>
cycle_record<S> min_mean_cycle(const weakkam::cost_system<S>& sys) {
  cycle_record<S> best;
  for_each_simple_cycle(sys, [&](const std::vector<int>& nodes, S total) {
    const int len = static_cast<int>(nodes.size());
    if (best.len == 0 || total * S(best.len) < best.total * S(len)) {
      best = {nodes, total, len};
    }
  });
  return best;
}

template <class S>
S critical_alpha(const weakkam::cost_system<S>& sys) {
  const auto best = min_mean_cycle(sys);
  return weakkam::scalar_ops<S>::div_int(-best.total, best.len);
}

// Edges lying on some simple cycle whose total reduced cost c + alpha
// vanishes.  The tolerance scales with the cycle length; in rational mode
// near_zero ignores it and demands exact zero.
template <class S>
std::vector<std::pair<int, int>> zero_cycle_edges(const weakkam::cost_system<S>& sys,
                                                  const S& alpha, double tol = 1e-9) {
  std::set<std::pair<int, int>> acc;
  for_each_simple_cycle(sys, [&](const std::vector<int>& nodes, S total) {
    const int len = static_cast<int>(nodes.size());
    const S reduced = total + S(len) * alpha;
    if (!weakkam::scalar_ops<S>::near_zero(reduced, tol * len)) return;
    for (int i = 0; i < len; ++i) acc.emplace(nodes[i], nodes[(i + 1) % len]);
  });
  return {acc.begin(), acc.end()};
}

// All-pairs least reduced cost over simple paths, diagonal pinned to zero.
// At or above the critical level every cycle has nonnegative reduced total,
// so restricting to simple paths loses nothing.
template <class S>
std::vector<S> simple_path_potential(const weakkam::cost_system<S>& sys, const S& alpha) {
  const int n = sys.n();
  std::vector<S> phi(static_cast<std::size_t>(n) * n, S{});
  std::vector<char> have(static_cast<std::size_t>(n) * n, 0);
  for (int i = 0; i < n; ++i) have[static_cast<std::size_t>(i) * n + i] = 1;
  std::vector<char> used(n, 0);
  for (int src = 0; src < n; ++src) {
    std::fill(used.begin(), used.end(), 0);
    used[src] = 1;
    std::function<void(int, S)> dfs = [&](int v, S total) {
      for (int id : sys.out_edges(v)) {
        const auto& e = sys.edge_at(id);
        if (used[e.to]) continue;
        const S cand = total + e.cost + alpha;
        const std::size_t slot = static_cast<std::size_t>(src) * n + e.to;
        if (!have[slot] || cand < phi[slot]) {
          have[slot] = 1;
          phi[slot] = cand;
        }
        used[e.to] = 1;
        dfs(e.to, cand);
        used[e.to] = 0;
      }
    };
    dfs(src, S{});
  }
  return phi;
}

// The domination inequality checked edge by edge, nothing shared with the
// slack machinery under test.
template <class S>
bool dominated(const weakkam::cost_system<S>& sys, const std::vector<S>& u, const S& alpha,
               double tol = 1e-9) {
  for (const auto& e : sys.edges()) {
    const S slack = e.cost + alpha - (u[e.to] - u[e.from]);
    if constexpr (weakkam::scalar_ops<S>::exact) {
      if (slack < S{}) return false;
    } else {
      if (slack < -tol) return false;
    }
  }
  return true;
}

template <class F>
double central_fd(F&& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

// Random strongly connected digraph with integer costs in [-5, 5]: a random
// permutation cycle guarantees connectivity, then each remaining ordered
// pair (self loops included) appears with a density drawn per instance.
inline weakkam::cost_system<double> random_system(std::mt19937& rng, int n_min = 2,
                                                  int n_max = 8) {
  std::uniform_int_distribution<int> nd(n_min, n_max);
  std::uniform_int_distribution<int> cost(-5, 5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int n = nd(rng);
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  weakkam::cost_system<double> sys(n, 0);
  std::set<std::pair<int, int>> taken;
  for (int i = 0; i < n; ++i) {
    const int a = perm[i], b = perm[(i + 1) % n];
    if (a == b) continue;  // n = 1 never happens, but keep the guard local
    sys.add_edge(a, b, double(cost(rng)));
    taken.emplace(a, b);
  }
  const double density = 0.15 + 0.55 * unit(rng);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (taken.count({i, j})) continue;
      if (unit(rng) < density) sys.add_edge(i, j, double(cost(rng)));
    }
  sys.validate();
  return sys;
}

}  // namespace oracle
