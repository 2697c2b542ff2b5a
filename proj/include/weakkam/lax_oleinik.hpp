#pragma once

#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "weakkam/cost_system.hpp"

namespace weakkam {

// Backward operator: (T-u)(x) = min over edges (y,x) of u(y) + c(y,x).
// Strong connectivity guarantees every state has an incoming edge.
template <class S>
std::vector<S> lax_minus(const cost_system<S>& sys, const std::vector<S>& u) {
  std::vector<S> out(sys.n());
  for (int x = 0; x < sys.n(); ++x) {
    bool first = true;
    for (int id : sys.in_edges(x)) {
      const auto& e = sys.edge_at(id);
      const S cand = u[e.from] + e.cost;
      if (first || cand < out[x]) out[x] = cand;
      first = false;
    }
  }
  return out;
}

// Forward operator: (T+u)(x) = max over edges (x,y) of u(y) - c(x,y).
template <class S>
std::vector<S> lax_plus(const cost_system<S>& sys, const std::vector<S>& u) {
  std::vector<S> out(sys.n());
  for (int x = 0; x < sys.n(); ++x) {
    bool first = true;
    for (int id : sys.out_edges(x)) {
      const auto& e = sys.edge_at(id);
      const S cand = u[e.to] - e.cost;
      if (first || out[x] < cand) out[x] = cand;
      first = false;
    }
  }
  return out;
}

// Slack of u at an edge: c(x,y) + alpha - (u(y) - u(x)).  Nonnegative slack
// everywhere is exactly the subsolution property at level alpha; the slack is
// sign-stable under constant shifts of u.  Returned aligned with sys.edges().
template <class S>
std::vector<S> edge_slacks(const cost_system<S>& sys, const std::vector<S>& u, const S& alpha) {
  std::vector<S> sl;
  sl.reserve(sys.edges().size());
  for (const auto& e : sys.edges()) sl.push_back(e.cost + alpha - (u[e.to] - u[e.from]));
  return sl;
}

// Dense n*n view of the slacks; empty optional where there is no edge
// (slack +infinity).  Presentation/audit helper, algorithms use edge_slacks.
template <class S>
std::vector<std::optional<S>> slack_matrix(const cost_system<S>& sys, const std::vector<S>& u,
                                           const S& alpha) {
  std::vector<std::optional<S>> m(static_cast<std::size_t>(sys.n()) * sys.n());
  const auto sl = edge_slacks(sys, u, alpha);
  for (std::size_t id = 0; id < sl.size(); ++id) {
    const auto& e = sys.edge_at(static_cast<int>(id));
    m[static_cast<std::size_t>(e.from) * sys.n() + e.to] = sl[id];
  }
  return m;
}

template <class S>
bool is_subsolution(const cost_system<S>& sys, const std::vector<S>& u, const S& alpha,
                    double tol) {
  for (const auto& s : edge_slacks(sys, u, alpha))
    if (!scalar_ops<S>::nonneg(s, tol)) return false;
  return true;
}

// Edges where the domination inequality is an equality (|slack| <= tol).
template <class S>
std::vector<std::pair<int, int>> tight_pairs(const cost_system<S>& sys, const std::vector<S>& u,
                                             const S& alpha, double tol) {
  std::vector<std::pair<int, int>> out;
  const auto sl = edge_slacks(sys, u, alpha);
  for (std::size_t id = 0; id < sl.size(); ++id)
    if (scalar_ops<S>::near_zero(sl[id], tol)) {
      const auto& e = sys.edge_at(static_cast<int>(id));
      out.emplace_back(e.from, e.to);
    }
  return out;
}

// States where u is strictly dominated on both sides: every incoming and
// every outgoing edge has slack > tol.  Equivalently u(x) < (T-u)(x) + alpha
// and u(x) > (T+u)(x) - alpha with margin.
template <class S>
std::vector<int> strict_points(const cost_system<S>& sys, const std::vector<S>& u, const S& alpha,
                               double tol) {
  const auto sl = edge_slacks(sys, u, alpha);
  std::vector<int> out;
  for (int x = 0; x < sys.n(); ++x) {
    bool strict = true;
    for (int id : sys.in_edges(x))
      if (scalar_ops<S>::near_zero(sl[id], tol) || !scalar_ops<S>::nonneg(sl[id], tol))
        strict = false;
    for (int id : sys.out_edges(x))
      if (scalar_ops<S>::near_zero(sl[id], tol) || !scalar_ops<S>::nonneg(sl[id], tol))
        strict = false;
    if (strict) out.push_back(x);
  }
  return out;
}

}  // namespace weakkam
