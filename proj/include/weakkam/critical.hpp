#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "weakkam/cost_system.hpp"
#include "weakkam/errors.hpp"
#include "weakkam/lax_oleinik.hpp"

namespace weakkam {

enum class critical_mode { karp, bisect, brute };

template <class S>
struct critical_data {
  S alpha{};                 // smallest level admitting a subsolution
  std::vector<int> witness;  // one cycle of minimal mean, as a node list
};

namespace detail {

// Scale used to separate floating-point noise from genuine negative cycles.
template <class S>
double detect_eps(const cost_system<S>& sys, const S& alpha) {
  if constexpr (scalar_ops<S>::exact) {
    return 0.0;
  } else {
    double scale = 1.0 + std::abs(static_cast<double>(alpha));
    for (const auto& e : sys.edges()) scale = std::max(scale, std::abs(e.cost));
    return sys.n() * 1e-13 * scale;
  }
}

// Bellman-Ford on reduced costs c + alpha from an implicit super-source
// (all states start at 0).  Converges iff there is no negative cycle; the
// resulting dist is a feasible potential: dist[to] <= dist[from] + red(e).
template <class S>
struct bf_result {
  std::vector<S> dist;
  std::vector<int> parent;  // edge id that last improved each state, -1 if none
  bool negative = false;
  int offending = -1;  // edge id still improving after n passes
};

template <class S>
bf_result<S> bf_supersource(const cost_system<S>& sys, const S& alpha) {
  const int n = sys.n();
  bf_result<S> r;
  r.dist.assign(n, S{});
  r.parent.assign(n, -1);
  const double eps = detect_eps(sys, alpha);
  for (int pass = 0; pass < n; ++pass) {
    bool changed = false;
    for (std::size_t id = 0; id < sys.edges().size(); ++id) {
      const auto& e = sys.edge_at(static_cast<int>(id));
      const S cand = r.dist[e.from] + e.cost + alpha;
      if (cand < r.dist[e.to]) {
        r.dist[e.to] = cand;
        r.parent[e.to] = static_cast<int>(id);
        changed = true;
      }
    }
    if (!changed) return r;
  }
  // One more scan: anything still improving beyond noise sits on or behind a
  // negative cycle.
  for (std::size_t id = 0; id < sys.edges().size(); ++id) {
    const auto& e = sys.edge_at(static_cast<int>(id));
    const S cand = r.dist[e.from] + e.cost + alpha;
    if (cand < r.dist[e.to]) {
      bool genuine;
      if constexpr (scalar_ops<S>::exact)
        genuine = true;
      else
        genuine = static_cast<double>(r.dist[e.to] - cand) > eps;
      if (genuine) {
        r.negative = true;
        r.offending = static_cast<int>(id);
        return r;
      }
    }
  }
  return r;
}

// After an improvement fires beyond pass n, the improvement chain behind it
// is longer than n edges, so following parents must bite its own tail.
// The caller points parent[seed] at the offending edge before calling.
template <class S>
std::vector<int> extract_parent_cycle(const cost_system<S>& sys, const std::vector<int>& parent,
                                      int seed) {
  int v = seed;
  for (int i = 0; i <= sys.n() && parent[v] != -1; ++i) v = sys.edge_at(parent[v]).from;
  // v now sits on the cycle (or the chain was too short, caught below).
  std::vector<int> cyc;
  std::vector<char> seen(sys.n(), 0);
  int w = v;
  while (parent[w] != -1 && !seen[w]) {
    seen[w] = 1;
    cyc.push_back(w);
    w = sys.edge_at(parent[w]).from;
  }
  if (!seen[w]) throw convergence_error("negative-cycle witness extraction failed");
  while (cyc.front() != w) cyc.erase(cyc.begin());
  std::reverse(cyc.begin(), cyc.end());  // parents walk backwards; restore edge order
  return cyc;
}

inline void rotate_to_min(std::vector<int>& cyc) {
  if (cyc.empty()) return;
  const auto it = std::min_element(cyc.begin(), cyc.end());
  std::rotate(cyc.begin(), it, cyc.end());
}

template <class S>
std::vector<int> negative_cycle_witness(const cost_system<S>& sys, const S& alpha,
                                        const bf_result<S>& bf) {
  auto parent = bf.parent;
  const auto& e = sys.edge_at(bf.offending);
  parent[e.to] = bf.offending;
  auto cyc = extract_parent_cycle(sys, parent, e.to);
  rotate_to_min(cyc);
  (void)alpha;
  return cyc;
}

// A minimal-mean cycle is pointwise tight for any Bellman-Ford potential at
// the critical level, so hunting a cycle among (nearly) tight edges is a
// sound and cheap witness extraction.  Thresholds grow geometrically from
// the noise level up to n*tol in floating mode; exact mode matches exactly.
template <class S>
std::vector<int> witness_cycle(const cost_system<S>& sys, const S& alpha, double tol) {
  const auto bf = bf_supersource(sys, alpha);
  const int n = sys.n();

  auto find_cycle = [&](double thr) -> std::vector<int> {
    std::vector<std::vector<int>> adj(n);
    for (std::size_t id = 0; id < sys.edges().size(); ++id) {
      const auto& e = sys.edge_at(static_cast<int>(id));
      const S rc = e.cost + alpha + bf.dist[e.from] - bf.dist[e.to];
      bool is_tight;
      if constexpr (scalar_ops<S>::exact)
        is_tight = rc == S{};
      else
        is_tight = std::abs(static_cast<double>(rc)) <= thr;
      if (is_tight) adj[e.from].push_back(e.to);
    }
    // Iterative DFS with colors; the first back edge closes a cycle.
    std::vector<int> color(n, 0), from(n, -1);
    for (int s = 0; s < n; ++s) {
      if (color[s]) continue;
      std::vector<std::pair<int, std::size_t>> stack{{s, 0}};
      color[s] = 1;
      while (!stack.empty()) {
        auto& [v, i] = stack.back();
        if (i < adj[v].size()) {
          const int w = adj[v][i++];
          if (color[w] == 1) {
            std::vector<int> cyc{w};
            for (int u = v; u != w; u = from[u]) cyc.push_back(u);
            std::reverse(cyc.begin() + 1, cyc.end());
            rotate_to_min(cyc);
            return cyc;
          }
          if (color[w] == 0) {
            color[w] = 1;
            from[w] = v;
            stack.push_back({w, 0});
          }
        } else {
          color[v] = 2;
          stack.pop_back();
        }
      }
    }
    return {};
  };

  if constexpr (scalar_ops<S>::exact) {
    auto cyc = find_cycle(0.0);
    if (!cyc.empty()) return cyc;
  } else {
    const double cap = std::max(n * std::max(tol, 1e-12), detect_eps(sys, alpha));
    for (double thr = detect_eps(sys, alpha); thr <= cap; thr *= 10.0) {
      auto cyc = find_cycle(thr);
      if (!cyc.empty()) return cyc;
    }
    auto cyc = find_cycle(cap);
    if (!cyc.empty()) return cyc;
  }
  throw convergence_error("witness extraction found no tight cycle at the critical level");
}

}  // namespace detail

// Karp's minimum cycle mean.  D[k][v] = cheapest walk of exactly k edges from
// state 0 to v (strong connectivity makes 0 a valid root); the minimum cycle
// mean is min over v of max over k of (D[n][v]-D[k][v])/(n-k), skipping
// unreachable table entries.  The critical value is its negation.
template <class S>
critical_data<S> critical_karp(const cost_system<S>& sys, double tol = 1e-9) {
  const int n = sys.n();
  std::vector<std::vector<std::optional<S>>> D(n + 1,
                                               std::vector<std::optional<S>>(n, std::nullopt));
  D[0][0] = S{};
  for (int k = 1; k <= n; ++k) {
    for (const auto& e : sys.edges()) {
      if (!D[k - 1][e.from]) continue;
      const S cand = *D[k - 1][e.from] + e.cost;
      if (!D[k][e.to] || cand < *D[k][e.to]) D[k][e.to] = cand;
    }
  }
  std::optional<S> best;  // minimum cycle mean
  for (int v = 0; v < n; ++v) {
    if (!D[n][v]) continue;
    std::optional<S> worst;
    for (int k = 0; k < n; ++k) {
      if (!D[k][v]) continue;
      const S mean = scalar_ops<S>::div_int(*D[n][v] - *D[k][v], n - k);
      if (!worst || *worst < mean) worst = mean;
    }
    if (worst && (!best || *worst < *best)) best = worst;
  }
  if (!best) throw validation_error("no cycle found (system must contain a cycle)");
  critical_data<S> out;
  out.alpha = -*best;
  out.witness = detail::witness_cycle(sys, out.alpha, tol);
  return out;
}

// Bisection on the level with a Bellman-Ford negative-cycle oracle.  The
// bracket comes from the cost bounds: the critical value is a negated cycle
// mean, hence within max |cost| of zero.
inline critical_data<double> critical_bisect(const cost_system<double>& sys, double tol = 1e-9,
                                             int iterations = 60) {
  double maxabs = 0.0;
  for (const auto& e : sys.edges()) maxabs = std::max(maxabs, std::abs(e.cost));
  double lo = -maxabs - 1.0;  // negative cycle exists here
  double hi = maxabs + 1.0;   // none here
  for (int i = 0; i < iterations; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (detail::bf_supersource(sys, mid).negative)
      lo = mid;
    else
      hi = mid;
  }
  critical_data<double> out;
  out.alpha = 0.5 * (lo + hi);
  out.witness = detail::witness_cycle(sys, out.alpha, tol);
  return out;
}

// Exhaustive minimum over simple cycles via Held-Karp style masks; the
// reference mode for small systems (n <= 10).
template <class S>
critical_data<S> critical_brute(const cost_system<S>& sys, double tol = 1e-9) {
  const int n = sys.n();
  if (n > 10) throw validation_error("brute mode is limited to n <= 10");
  std::optional<S> best;
  // dp over simple paths that start at s and only visit states >= s.
  for (int s = 0; s < n; ++s) {
    const int span = n - s;
    std::vector<std::vector<std::optional<S>>> dp(
        std::size_t(1) << span, std::vector<std::optional<S>>(span, std::nullopt));
    dp[1][0] = S{};  // path = {s}
    for (std::size_t mask = 1; mask < dp.size(); mask += 2) {
      for (int v = 0; v < span; ++v) {
        if (!dp[mask][v]) continue;
        const int vstate = s + v;
        if (sys.has_edge(vstate, s)) {  // close the cycle
          const S total = *dp[mask][v] + sys.cost(vstate, s);
          const S mean = scalar_ops<S>::div_int(total, __builtin_popcountll(mask));
          if (!best || mean < *best) best = mean;
        }
        for (int id : sys.out_edges(vstate)) {
          const auto& e = sys.edge_at(id);
          if (e.to <= s) continue;
          const int w = e.to - s;
          if (mask & (std::size_t(1) << w)) continue;
          const std::size_t m2 = mask | (std::size_t(1) << w);
          const S cand = *dp[mask][v] + e.cost;
          if (!dp[m2][w] || cand < *dp[m2][w]) dp[m2][w] = cand;
        }
      }
    }
  }
  if (!best) throw validation_error("no cycle found (system must contain a cycle)");
  critical_data<S> out;
  out.alpha = -*best;
  out.witness = detail::witness_cycle(sys, out.alpha, tol);
  return out;
}

template <class S>
critical_data<S> critical_value(const cost_system<S>& sys, critical_mode mode = critical_mode::karp,
                                double tol = 1e-9) {
  switch (mode) {
    case critical_mode::karp:
      return critical_karp(sys, tol);
    case critical_mode::bisect:
      if constexpr (scalar_ops<S>::exact)
        throw validation_error("bisect mode needs floating-point costs");
      else
        return critical_bisect(sys, tol);
    case critical_mode::brute:
      return critical_brute(sys, tol);
  }
  throw validation_error("unknown critical mode");
}

// All-pairs minimal chain costs at level alpha, with the diagonal pinned to
// zero by convention (the empty chain).  parent[x*n+y] is the id of the last
// edge of a minimal chain x -> y, so chains reconstruct backwards.
template <class S>
struct potential_data {
  int n = 0;
  S alpha{};
  std::vector<S> phi;        // n*n row-major
  std::vector<int> parent;   // n*n, -1 on the diagonal
  std::vector<int> from_of;  // edge id -> tail state, so chain() is self-contained

  const S& operator()(int x, int y) const { return phi[static_cast<std::size_t>(x) * n + y]; }

  // Node list of a minimal chain x -> ... -> y (x itself included).  A
  // minimal chain is simple, so more than n steps means the parent pointers
  // are corrupt; fail loudly rather than walk in circles.
  std::vector<int> chain(int x, int y) const {
    std::vector<int> nodes{y};
    while (y != x) {
      const int id = parent[static_cast<std::size_t>(x) * n + y];
      y = from_of[id];
      nodes.push_back(y);
      if (static_cast<int>(nodes.size()) > n)
        throw convergence_error("minimal chain reconstruction walked into a parent loop");
    }
    std::reverse(nodes.begin(), nodes.end());
    return nodes;
  }
};

template <class S>
potential_data<S> mane_potential(const cost_system<S>& sys, const S& alpha) {
  const int n = sys.n();
  potential_data<S> P;
  P.n = n;
  P.alpha = alpha;
  P.phi.assign(static_cast<std::size_t>(n) * n, S{});
  P.parent.assign(static_cast<std::size_t>(n) * n, -1);
  P.from_of.reserve(sys.edges().size());
  for (const auto& e : sys.edges()) P.from_of.push_back(e.from);
  const double eps = detail::detect_eps(sys, alpha);

  std::vector<S> dist(n);
  std::vector<int> parent(n);
  for (int src = 0; src < n; ++src) {
    // Single-source relaxation with the source pinned at 0: chains are
    // implicitly nonempty off the diagonal and the diagonal stays exactly 0.
    for (int v = 0; v < n; ++v) dist[v] = S{};
    std::fill(parent.begin(), parent.end(), -1);
    std::vector<char> reached(n, 0);
    reached[src] = 1;
    for (int pass = 0; pass < n; ++pass) {
      bool changed = false;
      for (std::size_t id = 0; id < sys.edges().size(); ++id) {
        const auto& e = sys.edge_at(static_cast<int>(id));
        if (!reached[e.from] || e.to == src) continue;
        const S cand = dist[e.from] + e.cost + alpha;
        // Noise-level improvements around a zero cycle are refused: letting
        // them in can leave the parent pointers cyclic, which chain() would
        // then walk forever.
        bool improves = !reached[e.to];
        if (!improves) {
          if constexpr (scalar_ops<S>::exact)
            improves = cand < dist[e.to];
          else
            improves = static_cast<double>(dist[e.to] - cand) > eps;
        }
        if (improves) {
          dist[e.to] = cand;
          parent[e.to] = static_cast<int>(id);
          reached[e.to] = 1;
          changed = true;
        }
      }
      if (!changed) break;
    }
    // Detection: a relaxation that still wants to fire (including back into
    // the pinned source) certifies a negative cycle at this level.
    for (std::size_t id = 0; id < sys.edges().size(); ++id) {
      const auto& e = sys.edge_at(static_cast<int>(id));
      if (!reached[e.from]) continue;
      const S cand = dist[e.from] + e.cost + alpha;
      const S cur = (e.to == src) ? S{} : dist[e.to];
      if (cand < cur) {
        bool genuine;
        if constexpr (scalar_ops<S>::exact)
          genuine = true;
        else
          genuine = static_cast<double>(cur - cand) > eps;
        if (!genuine) continue;
        if (e.to == src) {
          // The cycle closes through the source along the parent tree.
          std::vector<int> cyc{src};
          for (int v = e.from; v != src; v = sys.edge_at(parent[v]).from) cyc.push_back(v);
          std::reverse(cyc.begin() + 1, cyc.end());
          detail::rotate_to_min(cyc);
          throw negative_cycle_error(std::move(cyc));
        }
        const auto bf = detail::bf_supersource(sys, alpha);
        if (bf.negative) throw negative_cycle_error(detail::negative_cycle_witness(sys, alpha, bf));
        // Noise straddling the threshold; treat as converged.
      }
    }
    for (int v = 0; v < n; ++v) {
      P.phi[static_cast<std::size_t>(src) * n + v] = (v == src) ? S{} : dist[v];
      P.parent[static_cast<std::size_t>(src) * n + v] = (v == src) ? -1 : parent[v];
    }
  }
  return P;
}

struct aubry_data {
  std::vector<int> nodes;
  std::vector<std::pair<int, int>> pairs;
  // Parallel to nodes: one zero-total cycle through the node, as a node
  // list.  Empty when the node only sits on a bi-infinite chain between
  // cycles rather than on a cycle itself (possible for aubry_of).
  std::vector<std::vector<int>> certificates;
};

// Projected Aubry set of the system: edges lying on a zero-total reduced
// cycle at the critical level, and their endpoints.  The cheapest cycle
// through edge (x,y) costs red(x,y) + phi(y,x), so the test is a lookup.
template <class S>
aubry_data aubry(const cost_system<S>& sys, double tol = 1e-9) {
  const auto crit = critical_value(sys, critical_mode::karp, tol);
  const auto P = mane_potential(sys, crit.alpha);
  const int n = sys.n();
  aubry_data A;
  std::set<int> nodeset;
  for (const auto& e : sys.edges()) {
    const S v = e.cost + crit.alpha + P(e.to, e.from);
    if (scalar_ops<S>::near_zero(v, n * tol)) {
      A.pairs.emplace_back(e.from, e.to);
      nodeset.insert(e.from);
      nodeset.insert(e.to);
    }
  }
  std::sort(A.pairs.begin(), A.pairs.end());
  A.nodes.assign(nodeset.begin(), nodeset.end());
  for (int x : A.nodes) {
    // Certificate: close the cheapest chain back from the head of one of the
    // node's zero-cycle edges.  Every Aubry node has an outgoing pair.
    std::vector<int> cyc;
    for (const auto& [from, to] : A.pairs) {
      if (from != x) continue;
      if (to == x) {
        cyc = {x};
      } else {
        cyc = {x};
        const auto back = P.chain(to, x);  // to -> ... -> x
        cyc.insert(cyc.end(), back.begin(), back.end() - 1);
        detail::rotate_to_min(cyc);
      }
      break;
    }
    A.certificates.push_back(std::move(cyc));
  }
  return A;
}

// Weak KAM solutions.  minus: u(x) = min over Aubry nodes a of phi(a, x);
// plus: u(x) = max over Aubry nodes a of -phi(x, a).  Both are fixed points
// of the corresponding conjugated operator; no shift is applied afterwards
// (the construction already anchors the values on the Aubry set).
enum class kam_sign { minus, plus };

template <class S>
struct weak_kam_data {
  std::vector<S> u;
  S alpha{};
  aubry_data aubry;
};

template <class S>
weak_kam_data<S> weak_kam(const cost_system<S>& sys, kam_sign sign, double tol = 1e-9) {
  weak_kam_data<S> W;
  const auto crit = critical_value(sys, critical_mode::karp, tol);
  W.alpha = crit.alpha;
  W.aubry = aubry(sys, tol);
  const auto P = mane_potential(sys, W.alpha);
  const int n = sys.n();
  W.u.resize(n);
  for (int x = 0; x < n; ++x) {
    bool first = true;
    for (int a : W.aubry.nodes) {
      const S cand = (sign == kam_sign::minus) ? P(a, x) : -P(x, a);
      if (first || (sign == kam_sign::minus ? cand < W.u[x] : W.u[x] < cand)) W.u[x] = cand;
      first = false;
    }
  }
  return W;
}

// Tight subgraph of a subsolution, with the structure the Aubry analysis
// needs: which states sit on tight cycles, and which can reach / be reached
// from one along tight edges.
struct tight_structure_data {
  std::vector<char> tight;            // per edge id
  std::vector<std::vector<int>> fwd;  // tight adjacency
  std::vector<std::vector<int>> bwd;
  std::vector<int> comp;        // SCC index per state (tight subgraph)
  std::vector<char> cyclic;     // on some tight cycle
  std::vector<char> from_cycle;  // reachable from a tight cycle (backward-infinite histories)
  std::vector<char> to_cycle;    // reaches a tight cycle (forward-infinite continuations)
};

template <class S>
tight_structure_data tight_structure(const cost_system<S>& sys, const std::vector<S>& u,
                                     const S& alpha, double tol = 1e-9) {
  const int n = sys.n();
  const auto sl = edge_slacks(sys, u, alpha);
  tight_structure_data T;
  T.tight.assign(sl.size(), 0);
  T.fwd.assign(n, {});
  T.bwd.assign(n, {});
  for (std::size_t id = 0; id < sl.size(); ++id) {
    if (!scalar_ops<S>::near_zero(sl[id], tol)) continue;
    T.tight[id] = 1;
    const auto& e = sys.edge_at(static_cast<int>(id));
    T.fwd[e.from].push_back(e.to);
    T.bwd[e.to].push_back(e.from);
  }

  // Tarjan SCC over the tight subgraph; an SCC carries a cycle iff it has
  // >= 2 states or a tight self-loop.
  std::vector<int> low(n), num(n, -1), stk;
  T.comp.assign(n, -1);
  int counter = 0, ncomp = 0;
  std::vector<char> onstk(n, 0);
  for (int root = 0; root < n; ++root) {
    if (num[root] != -1) continue;
    std::vector<std::pair<int, std::size_t>> call{{root, 0}};
    while (!call.empty()) {
      auto& [v, i] = call.back();
      if (i == 0) {
        num[v] = low[v] = counter++;
        stk.push_back(v);
        onstk[v] = 1;
      }
      if (i < T.fwd[v].size()) {
        const int w = T.fwd[v][i++];
        if (num[w] == -1)
          call.push_back({w, 0});
        else if (onstk[w])
          low[v] = std::min(low[v], num[w]);
      } else {
        if (low[v] == num[v]) {
          while (true) {
            const int w = stk.back();
            stk.pop_back();
            onstk[w] = 0;
            T.comp[w] = ncomp;
            if (w == v) break;
          }
          ++ncomp;
        }
        const int vdone = v;
        call.pop_back();
        if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[vdone]);
      }
    }
  }
  std::vector<int> compsize(ncomp, 0);
  for (int v = 0; v < n; ++v) ++compsize[T.comp[v]];
  T.cyclic.assign(n, 0);
  for (std::size_t id = 0; id < sl.size(); ++id) {
    if (!T.tight[id]) continue;
    const auto& e = sys.edge_at(static_cast<int>(id));
    if (e.from == e.to || (T.comp[e.from] == T.comp[e.to] && compsize[T.comp[e.from]] >= 2))
      T.cyclic[e.from] = T.cyclic[e.to] = 1;
  }

  auto sweep = [&](const std::vector<std::vector<int>>& adj) {
    std::vector<char> seen(n, 0);
    std::vector<int> q;
    for (int v = 0; v < n; ++v)
      if (T.cyclic[v]) {
        seen[v] = 1;
        q.push_back(v);
      }
    while (!q.empty()) {
      const int v = q.back();
      q.pop_back();
      for (int w : adj[v])
        if (!seen[w]) {
          seen[w] = 1;
          q.push_back(w);
        }
    }
    return seen;
  };
  T.from_cycle = sweep(T.fwd);
  T.to_cycle = sweep(T.bwd);
  return T;
}

// Aubry set of a particular subsolution u: tight edges that sit on some
// bi-infinite tight walk.  On a finite system that means: the edge's tail is
// reachable from a tight cycle and its head reaches one (equivalently, both
// endpoints are).
template <class S>
aubry_data aubry_of(const cost_system<S>& sys, const std::vector<S>& u, const S& alpha,
                    double tol = 1e-9) {
  const int n = sys.n();
  const auto T = tight_structure(sys, u, alpha, tol);
  const auto& fwd = T.fwd;
  const auto& comp = T.comp;
  const auto& cyclic = T.cyclic;

  aubry_data A;
  for (int v = 0; v < n; ++v)
    if (T.from_cycle[v] && T.to_cycle[v]) A.nodes.push_back(v);
  for (std::size_t id = 0; id < T.tight.size(); ++id) {
    if (!T.tight[id]) continue;
    const auto& e = sys.edge_at(static_cast<int>(id));
    if (T.from_cycle[e.from] && T.to_cycle[e.to]) A.pairs.emplace_back(e.from, e.to);
  }
  std::sort(A.pairs.begin(), A.pairs.end());

  // Certificates: a tight cycle through each node that lies on one (BFS back
  // to itself inside its SCC of the tight subgraph).
  for (int x : A.nodes) {
    std::vector<int> cert;
    if (cyclic[x]) {
      std::vector<int> pred(n, -1);
      std::vector<char> seen(n, 0);
      std::vector<int> queue;
      bool closed = false;
      for (int w : fwd[x]) {
        if (w == x) {
          cert = {x};
          closed = true;
          break;
        }
        if (comp[w] == comp[x] && !seen[w]) {
          seen[w] = 1;
          pred[w] = x;
          queue.push_back(w);
        }
      }
      for (std::size_t qi = 0; qi < queue.size() && !closed; ++qi) {
        const int v = queue[qi];
        for (int w : fwd[v]) {
          if (w == x) {
            cert = {x};
            for (int p = v; p != x; p = pred[p]) cert.push_back(p);
            std::reverse(cert.begin() + 1, cert.end());
            closed = true;
            break;
          }
          if (comp[w] == comp[x] && !seen[w]) {
            seen[w] = 1;
            pred[w] = v;
            queue.push_back(w);
          }
        }
      }
      detail::rotate_to_min(cert);
    }
    A.certificates.push_back(std::move(cert));
  }
  return A;
}

// Argmins of the backward operator that land on the subsolution's Aubry set
// although the base state is off it.  This cannot happen for costs generated
// by a twist dynamics in the continuum; on bare finite systems it can, and
// callers get the full list of offending (state, argmin) pairs.
template <class S>
std::vector<std::pair<int, int>> lemma_err_violations(const cost_system<S>& sys,
                                                      const std::vector<S>& u, const S& alpha,
                                                      double tol = 1e-9) {
  const auto A = aubry_of(sys, u, alpha, tol);
  std::vector<char> on(sys.n(), 0);
  for (int v : A.nodes) on[v] = 1;
  std::vector<std::pair<int, int>> bad;
  for (int x = 0; x < sys.n(); ++x) {
    if (on[x]) continue;
    std::optional<S> best;
    for (int id : sys.in_edges(x)) {
      const auto& e = sys.edge_at(id);
      const S cand = u[e.from] + e.cost;
      if (!best || cand < *best) best = cand;
    }
    for (int id : sys.in_edges(x)) {
      const auto& e = sys.edge_at(id);
      const S gap = u[e.from] + e.cost - *best;
      if (scalar_ops<S>::near_zero(gap, tol) && on[e.from]) bad.emplace_back(x, e.from);
    }
  }
  return bad;
}

}  // namespace weakkam
