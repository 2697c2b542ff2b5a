#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "weakkam/cost_system.hpp"
#include "weakkam/critical.hpp"
#include "weakkam/errors.hpp"

namespace weakkam {

// A cohomology class is a real covector paired against edge windings; the
// scalar type follows the system so exact mode stays exact.
template <class S>
S pair_winding(const std::vector<S>& h, const std::vector<std::int64_t>& w) {
  S acc{};
  for (std::size_t k = 0; k < h.size(); ++k) acc += h[k] * S(w[k]);
  return acc;
}

// Same graph, costs shifted by -h.w along each edge.  Cycle totals change by
// -h.(cycle winding), so only the winding class of a cycle matters.
template <class S>
cost_system<S> twist_cost(const cost_system<S>& sys, const std::vector<S>& h) {
  if (static_cast<int>(h.size()) != sys.winding_dim())
    throw validation_error("cohomology class has length " + std::to_string(h.size()) +
                           " but winding_dim is " + std::to_string(sys.winding_dim()));
  cost_system<S> out(sys.n(), sys.winding_dim());
  for (const auto& e : sys.edges())
    out.add_edge(e.from, e.to, e.cost - pair_winding(h, e.winding), e.winding);
  out.labels = sys.labels;
  out.coords = sys.coords;
  out.validate();
  return out;
}

// Shift costs by the coboundary of g: c'(i,j) = c(i,j) + g(i) - g(j).  Cycle
// totals are untouched (the shift telescopes), so all critical quantities
// are invariant; useful for the class-invariance audits.
template <class S>
cost_system<S> apply_coboundary(const cost_system<S>& sys, const std::vector<S>& g) {
  if (static_cast<int>(g.size()) != sys.n())
    throw validation_error("coboundary vector length does not match state count");
  cost_system<S> out(sys.n(), sys.winding_dim());
  for (const auto& e : sys.edges())
    out.add_edge(e.from, e.to, e.cost + g[e.from] - g[e.to], e.winding);
  out.labels = sys.labels;
  out.coords = sys.coords;
  out.validate();
  return out;
}

template <class S>
critical_data<S> mather_alpha(const cost_system<S>& sys, const std::vector<S>& h,
                              critical_mode mode = critical_mode::karp, double tol = 1e-9) {
  return critical_value(twist_cost(sys, h), mode, tol);
}

template <class S>
struct alpha_curve {
  std::vector<std::pair<std::vector<S>, S>> samples;  // (h, alpha[h]), sorted by h
  std::vector<int> convexity_violations;              // sample indices failing the midpoint test
  std::vector<double> superlinear_c;  // least C with alpha[h] >= k|h| - C on the grid, k = 0,1,2
  std::vector<S> minimizer;           // grid argmin of alpha
  S min_alpha{};
};

// Sample alpha over a grid of classes and audit the shape: convexity along
// consecutive triples (the grid is expected to lie on a line; the affine
// weight comes from the coordinate of largest spread) and superlinearity
// witnesses k -> C(k).  Report-style: violations are listed, never thrown.
template <class S>
alpha_curve<S> alpha_sweep(const cost_system<S>& sys, std::vector<std::vector<S>> grid,
                           critical_mode mode = critical_mode::karp, double tol = 1e-9) {
  if (grid.empty()) throw validation_error("alpha_sweep needs a nonempty grid");
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  alpha_curve<S> curve;
  for (const auto& h : grid) curve.samples.emplace_back(h, mather_alpha(sys, h, mode, tol).alpha);

  for (std::size_t i = 0; i + 2 < curve.samples.size(); ++i) {
    const auto& [h1, a1] = curve.samples[i];
    const auto& [h2, a2] = curve.samples[i + 1];
    const auto& [h3, a3] = curve.samples[i + 2];
    if (h1.empty()) continue;
    std::size_t k = 0;
    S spread = scalar_ops<S>::abs(h3[0] - h1[0]);
    for (std::size_t j = 1; j < h1.size(); ++j) {
      const S s = scalar_ops<S>::abs(h3[j] - h1[j]);
      if (spread < s) {
        spread = s;
        k = j;
      }
    }
    if (scalar_ops<S>::near_zero(h3[k] - h1[k], tol)) continue;
    const S lam = (h3[k] - h2[k]) / (h3[k] - h1[k]);
    const S bound = lam * a1 + (S(1) - lam) * a3;
    if (!scalar_ops<S>::nonneg(bound - a2, tol))
      curve.convexity_violations.push_back(static_cast<int>(i) + 1);
  }

  for (int k = 0; k <= 2; ++k) {
    double c = 0.0;
    for (const auto& [h, a] : curve.samples) {
      double norm2 = 0.0;
      for (const auto& hj : h) norm2 += to_double_value(hj) * to_double_value(hj);
      c = std::max(c, k * std::sqrt(norm2) - to_double_value(a));
    }
    curve.superlinear_c.push_back(c);
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < curve.samples.size(); ++i)
    if (curve.samples[i].second < curve.samples[best].second) best = i;
  curve.minimizer = curve.samples[best].first;
  curve.min_alpha = curve.samples[best].second;
  return curve;
}

// Finite window onto the Z^d cover: K copies per winding dimension, indices
// wrapping at the window edge (the quotient of the cover by K.Z^d, itself a
// cover).  Wrap edges are flagged so consumers can exclude the boundary
// artifacts they introduce.
template <class S = double>
struct cover_window {
  cost_system<S> base;
  cost_system<S> lifted;
  int copies = 1;  // K
  int deck_dim = 0;
  std::vector<char> wrap;  // per lifted edge id

  int fiber_size() const {
    int f = 1;
    for (int k = 0; k < deck_dim; ++k) f *= copies;
    return f;
  }
  int lift_index(int state, const std::vector<int>& g) const {
    int code = 0;
    for (int k = deck_dim - 1; k >= 0; --k) code = code * copies + g[k];
    return state * fiber_size() + code;
  }
  std::pair<int, std::vector<int>> split_index(int idx) const {
    const int f = fiber_size();
    std::vector<int> g(deck_dim);
    int code = idx % f;
    for (int k = 0; k < deck_dim; ++k) {
      g[k] = code % copies;
      code /= copies;
    }
    return {idx / f, g};
  }
  // Deck translation by +steps along dimension dim, wrapping modulo K.
  int translate(int idx, int dim, int steps = 1) const {
    auto [state, g] = split_index(idx);
    g[dim] = ((g[dim] + steps) % copies + copies) % copies;
    return lift_index(state, g);
  }
};

template <class S>
cover_window<S> build_cover(const cost_system<S>& sys, int K) {
  if (sys.winding_dim() < 1) throw validation_error("no deck directions (winding_dim is 0)");
  if (K < 1 || K % 2 == 0) throw validation_error("cover window size K must be odd and positive");
  const int d = sys.winding_dim();
  double states = sys.n();
  for (int k = 0; k < d; ++k) states *= K;
  if (states > double(1 << 20)) throw validation_error("cover window would exceed the size limit");

  cover_window<S> cw;
  cw.base = sys;
  cw.copies = K;
  cw.deck_dim = d;
  const int fiber = cw.fiber_size();
  cw.lifted = cost_system<S>(sys.n() * fiber, 0);

  std::vector<int> g(d, 0);
  for (const auto& e : sys.edges()) {
    std::fill(g.begin(), g.end(), 0);
    while (true) {
      std::vector<int> gto(d);
      bool wraps = false;
      for (int k = 0; k < d; ++k) {
        const long raw = g[k] + e.winding[k];
        if (raw < 0 || raw >= K) wraps = true;
        gto[k] = static_cast<int>(((raw % K) + K) % K);
      }
      cw.lifted.add_edge(cw.lift_index(e.from, g), cw.lift_index(e.to, gto), e.cost);
      cw.wrap.push_back(wraps ? 1 : 0);
      int k = 0;
      while (k < d && ++g[k] == K) g[k++] = 0;
      if (k == d) break;
    }
  }
  cw.lifted.validate();

  // Projection check: from a fixed fiber point of x, the cheapest lifted
  // edge into the fiber of y must cost exactly the base edge.
  const std::vector<int> origin(d, 0);
  for (const auto& e : sys.edges()) {
    const int from = cw.lift_index(e.from, origin);
    bool found = false;
    for (int id : cw.lifted.out_edges(from)) {
      const auto& le = cw.lifted.edge_at(id);
      if (le.to / fiber != e.to) continue;
      if (!(le.cost == e.cost))
        throw validation_error("cover projection check failed on edge (" +
                               std::to_string(e.from) + "," + std::to_string(e.to) + ")");
      found = true;
    }
    if (!found)
      throw validation_error("cover lost edge (" + std::to_string(e.from) + "," +
                             std::to_string(e.to) + ")");
  }
  return cw;
}

// Equivariant weak KAM data on a cover window: the quotient solution of the
// twisted system lifted by u(x, g) = u_q(x) + h.g, which satisfies
// u(T x) - u(x) = rho(T) = h.(deck vector) and is a fixed point of the
// lifted backward operator at level alpha[h] away from the window boundary.
template <class S>
struct equivariant_data {
  std::vector<S> u_base;    // solution of the twisted quotient
  std::vector<S> u_lifted;  // indexed like cover.lifted states
  S alpha{};                // C_rho = alpha[h]
  std::vector<S> rho;       // per deck generator, = h
  cover_window<S> cover;
  bool generator_identity_ok = false;   // checked on non-wrapping translations
  double max_fixed_point_residual = 0;  // over states with no incoming wrap edge
  int excluded_states = 0;              // states fed by a wrap edge
  bool pass = false;
};

template <class S>
equivariant_data<S> equivariant_solution(const cost_system<S>& sys, const std::vector<S>& h,
                                         int K, double tol = 1e-9) {
  equivariant_data<S> eq;
  eq.cover = build_cover(sys, K);
  const auto twisted = twist_cost(sys, h);
  const auto W = weak_kam(twisted, kam_sign::minus, tol);
  eq.u_base = W.u;
  eq.alpha = W.alpha;
  eq.rho = h;

  const int total = eq.cover.lifted.n();
  eq.u_lifted.resize(total);
  for (int idx = 0; idx < total; ++idx) {
    const auto [state, g] = eq.cover.split_index(idx);
    S shift{};
    for (int k = 0; k < eq.cover.deck_dim; ++k) shift += h[k] * S(g[k]);
    eq.u_lifted[idx] = eq.u_base[state] + shift;
  }

  // Generator identity, skipping translations that wrap around the window.
  eq.generator_identity_ok = true;
  for (int idx = 0; idx < total; ++idx) {
    const auto [state, g] = eq.cover.split_index(idx);
    for (int k = 0; k < eq.cover.deck_dim; ++k) {
      if (g[k] + 1 >= K) continue;
      const S diff = eq.u_lifted[eq.cover.translate(idx, k)] - eq.u_lifted[idx] - h[k];
      const double scale = 1.0 + std::abs(to_double_value(h[k]));
      if (!scalar_ops<S>::near_zero(diff, 1e-12 * scale)) eq.generator_identity_ok = false;
    }
  }

  // Fixed-point residual of the lifted backward operator at level alpha,
  // measured only at states whose incoming edges all stay inside the window.
  std::vector<char> fed_by_wrap(total, 0);
  for (std::size_t id = 0; id < eq.cover.wrap.size(); ++id)
    if (eq.cover.wrap[id]) fed_by_wrap[eq.cover.lifted.edge_at(static_cast<int>(id)).to] = 1;
  for (int idx = 0; idx < total; ++idx) {
    if (fed_by_wrap[idx]) {
      ++eq.excluded_states;
      continue;
    }
    bool first = true;
    S best{};
    for (int id : eq.cover.lifted.in_edges(idx)) {
      const auto& e = eq.cover.lifted.edge_at(id);
      const S cand = eq.u_lifted[e.from] + e.cost;
      if (first || cand < best) best = cand;
      first = false;
    }
    const S resid = best + eq.alpha - eq.u_lifted[idx];
    eq.max_fixed_point_residual =
        std::max(eq.max_fixed_point_residual, std::abs(to_double_value(resid)));
  }
  eq.pass = eq.generator_identity_ok && eq.max_fixed_point_residual <= 1e-9;
  return eq;
}

}  // namespace weakkam
