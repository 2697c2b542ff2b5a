#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "weakkam/critical.hpp"
#include "weakkam/errors.hpp"
#include "weakkam/lax_oleinik.hpp"

namespace weakkam {

// Strictness of a subsolution measured against a designated set of pairs
// that are allowed (and required) to be tight.  Off that set every edge must
// have positive slack; on it the slack must vanish.
template <class S>
struct strictness_audit {
  std::optional<S> min_slack_off_aubry;  // empty when no edge lies off the pair set
  S max_abs_slack_on_aubry{};
  std::vector<std::pair<int, int>> violating_pairs;
  bool pass = false;
};

template <class S>
strictness_audit<S> audit_strictness(const cost_system<S>& sys, const std::vector<S>& u,
                                     const S& alpha,
                                     const std::vector<std::pair<int, int>>& aubry_pairs,
                                     double tol = 1e-9) {
  strictness_audit<S> a;
  const std::set<std::pair<int, int>> allowed(aubry_pairs.begin(), aubry_pairs.end());
  const auto sl = edge_slacks(sys, u, alpha);
  bool ok = true;
  for (std::size_t id = 0; id < sl.size(); ++id) {
    const auto& e = sys.edge_at(static_cast<int>(id));
    if (allowed.count({e.from, e.to})) {
      const S mag = scalar_ops<S>::abs(sl[id]);
      if (a.max_abs_slack_on_aubry < mag) a.max_abs_slack_on_aubry = mag;
      if (!scalar_ops<S>::near_zero(sl[id], tol)) {
        a.violating_pairs.emplace_back(e.from, e.to);
        ok = false;
      }
    } else {
      if (!a.min_slack_off_aubry || sl[id] < *a.min_slack_off_aubry)
        a.min_slack_off_aubry = sl[id];
      if (!scalar_ops<S>::pos(sl[id], tol)) {
        a.violating_pairs.emplace_back(e.from, e.to);
        ok = false;
      }
    }
  }
  a.pass = ok;
  return a;
}

namespace detail {

inline std::string format_pairs(const std::vector<std::pair<int, int>>& pairs) {
  std::ostringstream os;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (i) os << ", ";
    os << "(" << pairs[i].first << "," << pairs[i].second << ")";
  }
  return os.str();
}

}  // namespace detail

template <class S>
struct strict_subsolution_data {
  std::vector<S> u;
  S alpha{};
  aubry_data aubry;  // the tight set of u, which is the Aubry set of the system
  strictness_audit<S> audit;
};

// The averaged potential family: u0 = (1/n) sum_z w_z with w_z = -phi(., z).
// Each w_z is a subsolution by the triangle inequality; at a pair (x,y) the
// component w_x has slack c(x,y) + alpha + phi(y,x), the cost of the cheapest
// cycle through the edge, so the average is strict exactly off the Aubry
// pairs and tight on them.
template <class S>
strict_subsolution_data<S> strict_subsolution(const cost_system<S>& sys, double tol = 1e-9) {
  const int n = sys.n();
  strict_subsolution_data<S> out;
  const auto crit = critical_value(sys, critical_mode::karp, tol);
  out.alpha = crit.alpha;
  out.aubry = aubry(sys, tol);
  const auto P = mane_potential(sys, out.alpha);
  out.u.assign(n, S{});
  for (int x = 0; x < n; ++x) {
    S acc{};
    for (int z = 0; z < n; ++z) acc += P(x, z);
    out.u[x] = scalar_ops<S>::div_int(-acc, n);
  }
  out.audit = audit_strictness(sys, out.u, out.alpha, out.aubry.pairs, tol);
  if (!out.audit.pass)
    throw validation_error("strict subsolution audit failed at pairs " +
                           detail::format_pairs(out.audit.violating_pairs));
  return out;
}

template <class S>
struct pin_to_data {
  std::vector<S> u;
  strictness_audit<S> audit;
  aubry_data aubry;  // of the input subsolution; unchanged by construction
};

// Sharpen a subsolution until it is strict at every pair outside its own
// Aubry pair set, without moving it on the Aubry nodes.  Each offending
// tight edge (x,y) admits a bump direction read off the tight subgraph: if y
// cannot reach a tight cycle, lower everything tight-reachable from y; if x
// is not reachable from one, raise everything that tight-reaches x.  Either
// set is closed under the tight edges on the relevant side and misses the
// Aubry nodes, so the bump costs slack only at edges that have some to
// spare.  One round normally suffices; the loop re-audits and keeps a hard
// budget so a numerically stuck input fails loudly instead of silently.
template <class S>
pin_to_data<S> pin_to(const cost_system<S>& sys, const std::vector<S>& u, double tol = 1e-9) {
  const int n = sys.n();
  const auto crit = critical_value(sys, critical_mode::karp, tol);
  const S alpha = crit.alpha;
  if (!is_subsolution(sys, u, alpha, tol))
    throw validation_error("pin_to input is not a subsolution at the critical level");

  pin_to_data<S> out;
  out.aubry = aubry_of(sys, u, alpha, tol);
  const std::set<std::pair<int, int>> allowed(out.aubry.pairs.begin(), out.aubry.pairs.end());

  std::vector<S> v = u;
  const long budget = static_cast<long>(n) * n;
  for (long round = 0;; ++round) {
    out.audit = audit_strictness(sys, v, alpha, out.aubry.pairs, tol);
    if (out.audit.pass) break;
    if (round >= budget)
      throw validation_error("pin_to repair budget exhausted; still tight at " +
                             detail::format_pairs(out.audit.violating_pairs));

    const auto T = tight_structure(sys, v, alpha, tol);
    std::vector<int> bad;  // edge ids tight but off the Aubry pair set
    for (std::size_t id = 0; id < T.tight.size(); ++id) {
      if (!T.tight[id]) continue;
      const auto& e = sys.edge_at(static_cast<int>(id));
      if (!allowed.count({e.from, e.to})) bad.push_back(static_cast<int>(id));
    }
    if (bad.empty())  // audit failed on an Aubry pair: not repairable by bumps
      throw validation_error("pin_to cannot restore tightness at Aubry pairs " +
                             detail::format_pairs(out.audit.violating_pairs));

    // Smallest slack that must survive the round.
    const auto sl = edge_slacks(sys, v, alpha);
    std::optional<S> delta;
    for (const auto& s : sl)
      if (scalar_ops<S>::pos(s, tol) && (!delta || s < *delta)) delta = s;
    const int k = static_cast<int>(bad.size());
    if (!delta)
      throw validation_error("pin_to found no slack to trade at " +
                             detail::format_pairs(out.audit.violating_pairs));
    const S eps = scalar_ops<S>::div_int(*delta, 2 * (k + 1));
    if (!scalar_ops<S>::pos(eps, tol))
      throw validation_error("pin_to repair margin collapsed below tolerance at " +
                             detail::format_pairs(out.audit.violating_pairs));

    auto reach = [&](int start, const std::vector<std::vector<int>>& adj) {
      std::vector<char> seen(n, 0);
      std::vector<int> q{start};
      seen[start] = 1;
      while (!q.empty()) {
        const int a = q.back();
        q.pop_back();
        for (int b : adj[a])
          if (!seen[b]) {
            seen[b] = 1;
            q.push_back(b);
          }
      }
      return seen;
    };

    for (int id : bad) {
      const auto& e = sys.edge_at(id);
      if (!T.to_cycle[e.to]) {
        const auto R = reach(e.to, T.fwd);
        for (int x = 0; x < n; ++x)
          if (R[x]) v[x] -= eps;
      } else if (!T.from_cycle[e.from]) {
        const auto R = reach(e.from, T.bwd);
        for (int x = 0; x < n; ++x)
          if (R[x]) v[x] += eps;
      } else {
        // Both sides touch tight cycles, so the edge would be an Aubry pair;
        // reaching here means the tight structure disagrees with the audit.
        throw validation_error("pin_to met an unrepairable tight pair (" +
                               std::to_string(e.from) + "," + std::to_string(e.to) + ")");
      }
    }
  }

  // The postcondition is part of the contract, not a debug check.
  for (int a : out.aubry.nodes)
    if (!(v[a] == u[a]))
      throw validation_error("pin_to moved the subsolution on Aubry node " + std::to_string(a));
  if (!is_subsolution(sys, v, alpha, tol))
    throw validation_error("pin_to result lost the subsolution property");
  out.u = std::move(v);
  return out;
}

// One round of conjugated forward then backward Lax-Oleinik.  Subsolutions
// are preserved, the Aubry data of the input is preserved, and strictness
// outside the Aubry pairs survives.
template <class S>
std::vector<S> regularize(const cost_system<S>& sys, const std::vector<S>& u, const S& alpha,
                          double tol = 1e-9) {
  if (!is_subsolution(sys, u, alpha, tol))
    throw validation_error("regularize input is not a subsolution at this level");
  auto v = lax_plus(sys, u);
  for (auto& x : v) x -= alpha;
  auto w = lax_minus(sys, v);
  for (auto& x : w) x += alpha;
  return w;
}

// Property-test vehicle for the sandwich lemma: if u is a subsolution
// strict outside its Aubry pairs and u <= v <= T^- u + alpha with equality
// u = v exactly on the Aubry nodes, then v is itself a subsolution with the
// same Aubry data and the same strictness.  Precondition breaches are
// reported separately from assertion failures.
struct sandwich_report {
  bool preconditions_ok = false;
  std::vector<std::string> precondition_failures;
  bool pass = false;
  std::vector<std::string> failures;
};

template <class S>
sandwich_report verify_sandwich(const cost_system<S>& sys, const std::vector<S>& u,
                                const std::vector<S>& v, const S& alpha, double tol = 1e-9) {
  const int n = sys.n();
  sandwich_report rep;

  if (!is_subsolution(sys, u, alpha, tol))
    rep.precondition_failures.push_back("u is not a subsolution");
  const auto Au = aubry_of(sys, u, alpha, tol);
  const auto ua = audit_strictness(sys, u, alpha, Au.pairs, tol);
  if (!ua.pass)
    rep.precondition_failures.push_back("u is not strict outside its Aubry pairs at " +
                                        detail::format_pairs(ua.violating_pairs));
  const auto tm = lax_minus(sys, u);
  std::vector<char> on(n, 0);
  for (int a : Au.nodes) on[a] = 1;
  for (int x = 0; x < n; ++x) {
    if (!scalar_ops<S>::nonneg(v[x] - u[x], tol))
      rep.precondition_failures.push_back("v < u at state " + std::to_string(x));
    if (!scalar_ops<S>::nonneg(tm[x] + alpha - v[x], tol))
      rep.precondition_failures.push_back("v exceeds the backward envelope at state " +
                                          std::to_string(x));
    const bool equal = scalar_ops<S>::near_zero(v[x] - u[x], tol);
    if (equal && !on[x])
      rep.precondition_failures.push_back("contact {u=v} leaks off the Aubry set at state " +
                                          std::to_string(x));
    if (!equal && on[x])
      rep.precondition_failures.push_back("v detaches from u on Aubry node " + std::to_string(x));
  }
  rep.preconditions_ok = rep.precondition_failures.empty();
  if (!rep.preconditions_ok) return rep;

  if (!is_subsolution(sys, v, alpha, tol)) rep.failures.push_back("v is not a subsolution");
  const auto Av = aubry_of(sys, v, alpha, tol);
  if (Av.nodes != Au.nodes) rep.failures.push_back("Aubry nodes of v differ from those of u");
  if (Av.pairs != Au.pairs) rep.failures.push_back("Aubry pairs of v differ from those of u");
  const auto va = audit_strictness(sys, v, alpha, Au.pairs, tol);
  if (!va.pass)
    rep.failures.push_back("v is not strict outside the Aubry pairs at " +
                           detail::format_pairs(va.violating_pairs));
  rep.pass = rep.failures.empty();
  return rep;
}

}  // namespace weakkam
