#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "weakkam/errors.hpp"
#include "weakkam/rational.hpp"

namespace weakkam {

template <class S>
struct edge {
  int from = 0;
  int to = 0;
  S cost{};
  std::vector<std::int64_t> winding;  // length = winding_dim of the system
};

// Finite cost system: states 0..n-1, at most one directed edge per ordered
// pair, absent pairs are +infinity (represented structurally, never stored).
// Windings attach an integer homology class to each edge; dim 0 means none.
template <class S = double>
class cost_system {
public:
  cost_system() = default;

  cost_system(int n, int winding_dim) : n_(n), wdim_(winding_dim) {
    if (n <= 0) throw validation_error("cost_system: n must be positive");
    if (winding_dim < 0) throw validation_error("cost_system: winding_dim must be >= 0");
    index_.assign(static_cast<std::size_t>(n) * n, -1);
    out_.resize(n);
    in_.resize(n);
  }

  cost_system(int n, int winding_dim, const std::vector<edge<S>>& edges)
      : cost_system(n, winding_dim) {
    for (const auto& e : edges) add_edge(e.from, e.to, e.cost, e.winding);
    validate();
  }

  int add_edge(int from, int to, S cost, std::vector<std::int64_t> winding = {}) {
    if (from < 0 || from >= n_ || to < 0 || to >= n_)
      throw validation_error("edge (" + std::to_string(from) + "," + std::to_string(to) +
                             "): state out of range");
    if (index_[static_cast<std::size_t>(from) * n_ + to] != -1)
      throw validation_error("duplicate edge (" + std::to_string(from) + "," +
                             std::to_string(to) + ")");
    if (static_cast<int>(winding.size()) != wdim_)
      throw validation_error("edge (" + std::to_string(from) + "," + std::to_string(to) +
                             "): winding length " + std::to_string(winding.size()) +
                             " != winding_dim " + std::to_string(wdim_));
    const int id = static_cast<int>(edges_.size());
    edges_.push_back(edge<S>{from, to, std::move(cost), std::move(winding)});
    index_[static_cast<std::size_t>(from) * n_ + to] = id;
    out_[from].push_back(id);
    in_[to].push_back(id);
    return id;
  }

  // Every operation downstream assumes a strongly connected system with at
  // least one cycle; reject anything else up front with a usable message.
  void validate() const {
    if (edges_.empty()) throw validation_error("cost_system: no edges (no cycle exists)");
    std::vector<char> fwd(n_, 0), bwd(n_, 0);
    reach(0, out_, fwd);
    reach(0, in_, bwd);
    for (int v = 0; v < n_; ++v) {
      if (!fwd[v] || !bwd[v])
        throw validation_error("cost_system: not strongly connected (state " +
                               std::to_string(v) + " is not on a cycle through state 0)");
    }
  }

  int n() const { return n_; }
  int winding_dim() const { return wdim_; }
  const std::vector<edge<S>>& edges() const { return edges_; }
  const edge<S>& edge_at(int id) const { return edges_[id]; }

  int edge_index(int from, int to) const {
    return index_[static_cast<std::size_t>(from) * n_ + to];
  }
  bool has_edge(int from, int to) const { return edge_index(from, to) != -1; }
  const S& cost(int from, int to) const {
    const int id = edge_index(from, to);
    if (id < 0)
      throw validation_error("no edge (" + std::to_string(from) + "," + std::to_string(to) + ")");
    return edges_[id].cost;
  }

  const std::vector<int>& out_edges(int v) const { return out_[v]; }
  const std::vector<int>& in_edges(int v) const { return in_[v]; }

  std::vector<std::string> labels;               // optional, size n when present
  std::vector<std::vector<double>> coords;       // optional, size n when present

private:
  int n_ = 0;
  int wdim_ = 0;
  std::vector<edge<S>> edges_;
  std::vector<int> index_;
  std::vector<std::vector<int>> out_, in_;

  void reach(int src, const std::vector<std::vector<int>>& adj, std::vector<char>& seen) const {
    std::vector<int> stack{src};
    seen[src] = 1;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (int id : adj[v]) {
        const auto& e = edges_[id];
        const int w = (&adj == &out_) ? e.to : e.from;
        if (!seen[w]) {
          seen[w] = 1;
          stack.push_back(w);
        }
      }
    }
  }
};

// Map integer-valued double costs into exact rationals (costs must be exact
// multiples of 1/denominator; used by tests that run both modes on one draw).
inline cost_system<rational> to_rational(const cost_system<double>& sys, int denominator = 1) {
  cost_system<rational> out(sys.n(), sys.winding_dim());
  for (const auto& e : sys.edges()) {
    const double scaled = e.cost * denominator;
    const auto num = static_cast<std::int64_t>(scaled >= 0 ? scaled + 0.5 : scaled - 0.5);
    if (static_cast<double>(num) != scaled)
      throw validation_error("to_rational: cost is not a multiple of 1/" +
                             std::to_string(denominator));
    out.add_edge(e.from, e.to, rational(num, denominator), e.winding);
  }
  out.validate();
  return out;
}

// Report-style audit of the standing hypotheses.  Unlike
// cost_system::validate() this never throws: it is the inspection tool for
// systems of unknown provenance.  On a finite system the superlinearity and
// boundedness constants always exist, so failures can only concern
// connectivity, NaN costs, or missing coords when required.
struct validation_report {
  bool strongly_connected = false;
  int finite_edge_count = 0;
  std::vector<std::pair<int, double>> superlinearity_witness;  // (k, least C(k))
  std::vector<std::pair<double, double>> boundedness_witness;  // (R, least A(R))
  std::vector<std::string> failures;
};

template <class S>
validation_report validate(const cost_system<S>& sys, bool coords_required = false) {
  validation_report rep;
  const int n = sys.n();
  rep.finite_edge_count = static_cast<int>(sys.edges().size());

  if (sys.edges().empty()) {
    rep.failures.push_back("no finite edges");
  } else {
    std::vector<char> fwd(n, 0), bwd(n, 0);
    auto sweep = [&](std::vector<char>& seen, bool forward) {
      std::vector<int> stack{0};
      seen[0] = 1;
      while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        for (int id : forward ? sys.out_edges(v) : sys.in_edges(v)) {
          const auto& e = sys.edge_at(id);
          const int w = forward ? e.to : e.from;
          if (!seen[w]) {
            seen[w] = 1;
            stack.push_back(w);
          }
        }
      }
    };
    sweep(fwd, true);
    sweep(bwd, false);
    rep.strongly_connected = true;
    for (int v = 0; v < n; ++v) {
      if (!fwd[v] || !bwd[v]) {
        rep.strongly_connected = false;
        rep.failures.push_back("not strongly connected: state " + std::to_string(v));
        break;
      }
    }
  }

  if constexpr (!scalar_ops<S>::exact) {
    for (const auto& e : sys.edges()) {
      if (!(e.cost == e.cost) || e.cost > 1e300 || e.cost < -1e300) {
        rep.failures.push_back("non-finite cost on edge (" + std::to_string(e.from) + "," +
                               std::to_string(e.to) + ")");
        break;
      }
    }
  }

  const bool have_coords = static_cast<int>(sys.coords.size()) == n && n > 0;
  if (coords_required && !have_coords) rep.failures.push_back("coords required but absent");

  auto dist = [&](int a, int b) {
    double s = 0;
    for (std::size_t k = 0; k < sys.coords[a].size() && k < sys.coords[b].size(); ++k) {
      const double d = sys.coords[a][k] - sys.coords[b][k];
      s += d * d;
    }
    return std::sqrt(s);
  };

  if (!sys.edges().empty()) {
    // Least C(k) with c(x,y) >= k d(x,y) - C(k) over all finite edges.  With
    // no metric only k = 0 makes sense and C(0) = -min cost.
    for (int k = 0; k <= (have_coords ? 2 : 0); ++k) {
      double c_needed = -1e308;
      for (const auto& e : sys.edges()) {
        const double d = (k == 0 || !have_coords) ? 0.0 : dist(e.from, e.to);
        c_needed = std::max(c_needed, k * d - to_double_value(e.cost));
      }
      rep.superlinearity_witness.emplace_back(k, c_needed);
    }
    if (have_coords) {
      double dmax = 0;
      for (const auto& e : sys.edges()) dmax = std::max(dmax, dist(e.from, e.to));
      for (double r : {0.5 * dmax, dmax}) {
        double a_needed = -1e308;
        bool any = false;
        for (const auto& e : sys.edges()) {
          if (dist(e.from, e.to) <= r) {
            a_needed = std::max(a_needed, to_double_value(e.cost));
            any = true;
          }
        }
        if (any) rep.boundedness_witness.emplace_back(r, a_needed);
      }
    } else {
      // No metric: every pair counts as nearby, so the least bound is just
      // the max finite cost.
      double a_needed = -1e308;
      for (const auto& e : sys.edges()) a_needed = std::max(a_needed, to_double_value(e.cost));
      rep.boundedness_witness.emplace_back(0.0, a_needed);
    }
  }
  return rep;
}

}  // namespace weakkam
