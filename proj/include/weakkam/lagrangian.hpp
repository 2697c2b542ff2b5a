#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "weakkam/cost_system.hpp"
#include "weakkam/critical.hpp"
#include "weakkam/errors.hpp"

namespace weakkam {

// Mechanical Lagrangian L(x,v) = v^2/2 - V(x) on the circle of length 1,
// with V a finite trigonometric series: cosine_coeffs[k] multiplies
// cos(2 pi (k+1) x) and sine_coeffs[k] multiplies sin(2 pi (k+1) x).
struct lagrangian_spec {
  std::vector<double> cosine_coeffs;
  std::vector<double> sine_coeffs;
  int collocation_steps = 32;  // M, segments per unit-time curve
  int integrator_steps = 1000;
  double gradient_tol = 1e-10;  // stationarity target for the curve solver
  double shooting_tol = 0.0;    // collocation/shooting agreement budget; 0 = 25/M^2
};

inline double agreement_budget(const lagrangian_spec& L) {
  if (L.shooting_tol > 0) return L.shooting_tol;
  const double m = L.collocation_steps;
  return 25.0 / (m * m);
}

namespace detail {

// Exact symmetric reduction to [-0.5, 0.5].  Built from operations that are
// exact in IEEE arithmetic (trunc, subtraction of nearby values), so it
// commutes bitwise with negation and with integer shifts; the curve solver
// leans on that to make mirror-image problems bitwise mirror-equal.
inline double reduce_circle(double x) {
  double u = x - std::trunc(x);
  if (u > 0.5) u -= 1.0;
  if (u < -0.5) u += 1.0;
  return u;
}

// sin(2 pi k u) for integer k vanishes identically at u = 0 and u = +-1/2.
// Grid data hits those arguments exactly, and the computed sin(pi k) is
// ~1e-16 junk whose sign depends on the lift, so the exact zero is both
// more accurate and required for the bitwise mirror symmetry below.
inline double odd_sine(double t, double u) {
  if (u == 0.0 || u == 0.5 || u == -0.5) return 0.0;
  return std::copysign(std::sin(std::abs(t)), t);
}

// Series evaluation with exact parity: cosine terms read their argument
// through |.| and sine terms through copysign, so V(-x) == V(x) bitwise for
// even potentials and the derivative flips sign bitwise.  The mirror
// symmetry of costs generated by even potentials is then exact, not
// approximate.
inline double potential(const lagrangian_spec& L, double x) {
  const double u = reduce_circle(x);
  double acc = 0.0;
  for (std::size_t k = 0; k < L.cosine_coeffs.size(); ++k) {
    const double w = 2.0 * std::numbers::pi * double(k + 1);
    acc += L.cosine_coeffs[k] * std::cos(std::abs(w * u));
  }
  for (std::size_t k = 0; k < L.sine_coeffs.size(); ++k) {
    const double w = 2.0 * std::numbers::pi * double(k + 1);
    acc += L.sine_coeffs[k] * odd_sine(w * u, u);
  }
  return acc;
}

inline double potential_d(const lagrangian_spec& L, double x) {
  const double u = reduce_circle(x);
  double acc = 0.0;
  for (std::size_t k = 0; k < L.cosine_coeffs.size(); ++k) {
    const double w = 2.0 * std::numbers::pi * double(k + 1);
    acc -= L.cosine_coeffs[k] * w * odd_sine(w * u, u);
  }
  for (std::size_t k = 0; k < L.sine_coeffs.size(); ++k) {
    const double w = 2.0 * std::numbers::pi * double(k + 1);
    acc += L.sine_coeffs[k] * w * std::cos(std::abs(w * u));
  }
  return acc;
}

inline double potential_dd(const lagrangian_spec& L, double x) {
  const double u = reduce_circle(x);
  double acc = 0.0;
  for (std::size_t k = 0; k < L.cosine_coeffs.size(); ++k) {
    const double w = 2.0 * std::numbers::pi * double(k + 1);
    acc -= L.cosine_coeffs[k] * w * w * std::cos(std::abs(w * u));
  }
  for (std::size_t k = 0; k < L.sine_coeffs.size(); ++k) {
    const double w = 2.0 * std::numbers::pi * double(k + 1);
    acc -= L.sine_coeffs[k] * w * w * odd_sine(w * u, u);
  }
  return acc;
}

// Tridiagonal solve, destructive on the inputs.  Returns false on a pivot
// too small to trust (the caller then raises its damping).
inline bool thomas_solve(std::vector<double>& sub, std::vector<double>& diag,
                         std::vector<double>& sup, std::vector<double>& rhs) {
  const std::size_t m = diag.size();
  for (std::size_t i = 0; i < m; ++i) {
    if (i > 0) {
      const double w = sub[i] / diag[i - 1];
      diag[i] -= w * sup[i - 1];
      rhs[i] -= w * rhs[i - 1];
    }
    if (std::abs(diag[i]) < 1e-14) return false;
  }
  rhs[m - 1] /= diag[m - 1];
  for (std::size_t i = m - 1; i-- > 0;) rhs[i] = (rhs[i] - sup[i] * rhs[i + 1]) / diag[i];
  return true;
}

// Direct collocation state for one winding class: interior offsets xi from
// the straight line, with the line's node and midpoint values prereduced.
// Everything downstream (gradient, Hessian, action) is expressed through
// xi and exact dyadic line data so mirror problems stay bitwise mirrored.
struct collocation_problem {
  const lagrangian_spec* L = nullptr;
  int M = 0;
  double h = 0;
  double D = 0;                 // total lifted displacement
  std::vector<double> u_node;   // reduce(x0 + s h D), s = 0..M
  std::vector<double> u_mid;    // reduce(x0 + (s + 1/2) h D), s = 0..M-1

  double action(const std::vector<double>& xi) const {
    double a = 0.0;
    const double hd = h * D;
    for (int s = 0; s < M; ++s) {
      const double dx = hd + (xi[s + 1] - xi[s]);
      const double t = u_mid[s] + 0.5 * (xi[s] + xi[s + 1]);
      a += dx * dx / (2.0 * h) - h * potential(*L, t);
    }
    return a;
  }

  void gradient(const std::vector<double>& xi, std::vector<double>& g) const {
    const double hd = h * D;
    g.assign(M - 1, 0.0);
    for (int s = 0; s < M; ++s) {
      const double dx = hd + (xi[s + 1] - xi[s]);
      const double t = u_mid[s] + 0.5 * (xi[s] + xi[s + 1]);
      const double vp = potential_d(*L, t);
      // segment s couples xi_s (enters dx negatively) and xi_{s+1} (positively)
      if (s >= 1) g[s - 1] += -dx / h - 0.5 * h * vp;
      if (s + 1 <= M - 1) g[s] += dx / h - 0.5 * h * vp;
    }
  }
};

struct collocation_result {
  std::vector<double> xi;
  double action = 0;
  double grad_norm = 0;
  double v0 = 0, v1 = 0;  // discrete endpoint velocities (exact action gradients)
  bool converged = false;
};

inline collocation_result solve_collocation(const collocation_problem& P,
                                            std::vector<double> xi) {
  const int M = P.M;
  const double h = P.h;
  const lagrangian_spec& L = *P.L;
  collocation_result r;
  std::vector<double> g, sub, diag, sup, step, trial(xi.size());
  double lambda = 0.0;
  double a_cur = P.action(xi);
  for (int iter = 0; iter < 120; ++iter) {
    P.gradient(xi, g);
    double gmax = 0.0;
    for (double gi : g) gmax = std::max(gmax, std::abs(gi));
    r.grad_norm = gmax;
    if (gmax <= L.gradient_tol) {
      r.converged = true;
      break;
    }
    // Assemble the tridiagonal Hessian of the discrete action.
    sub.assign(M - 1, 0.0);
    diag.assign(M - 1, 0.0);
    sup.assign(M - 1, 0.0);
    for (int i = 1; i <= M - 1; ++i) {
      const double tl = P.u_mid[i - 1] + 0.5 * (xi[i - 1] + xi[i]);
      const double tr = P.u_mid[i] + 0.5 * (xi[i] + xi[i + 1]);
      diag[i - 1] = 2.0 / h - 0.25 * h * (potential_dd(L, tl) + potential_dd(L, tr)) + lambda;
      if (i <= M - 2) sup[i - 1] = -1.0 / h - 0.25 * h * potential_dd(L, tr);
      if (i >= 2) sub[i - 1] = -1.0 / h - 0.25 * h * potential_dd(L, tl);
    }
    step.assign(M - 1, 0.0);
    for (int i = 0; i < M - 1; ++i) step[i] = -g[i];
    auto s2 = sub, d2 = diag, p2 = sup;
    if (!thomas_solve(s2, d2, p2, step)) {
      lambda = std::max(1e-6, lambda * 10.0);
      continue;
    }
    for (std::size_t i = 0; i < xi.size(); ++i) trial[i] = xi[i];
    for (int i = 1; i <= M - 1; ++i) trial[i] = xi[i] + step[i - 1];
    bool sane = true;
    for (double t : trial) sane = sane && std::abs(t) < 5.0;
    const double a_new = sane ? P.action(trial) : std::numeric_limits<double>::infinity();
    if (a_new <= a_cur + 1e-13) {
      xi.swap(trial);
      a_cur = a_new;
      lambda *= 0.25;
      if (lambda < 1e-12) lambda = 0.0;
    } else {
      lambda = std::max(1e-6, lambda * 10.0);
    }
  }
  if (!r.converged && r.grad_norm <= 1e-6) r.converged = true;  // flat enough for the action
  const double hd = P.h * P.D;
  const double t0 = P.u_mid[0] + 0.5 * (xi[0] + xi[1]);
  const double t1 = P.u_mid[M - 1] + 0.5 * (xi[M - 1] + xi[M]);
  r.v0 = (hd + (xi[1] - xi[0])) / h + 0.5 * h * potential_d(L, t0);
  r.v1 = (hd + (xi[M] - xi[M - 1])) / h - 0.5 * h * potential_d(L, t1);
  r.action = a_cur;
  r.xi = std::move(xi);
  return r;
}

// Unit-time shot of the Euler-Lagrange flow v' = -V'(x) in offset
// coordinates q = x - x0, carrying the sensitivity dq/dv0 and the running
// action.  Offset coordinates keep the mirror argument alive here too.
struct shot {
  double q = 0, v = 0;
  double sq = 0, sv = 1;  // sensitivity of (q, v) to the initial velocity
  double action = 0;
};

inline shot shoot(const lagrangian_spec& L, double u0, double v0, int steps) {
  shot s;
  s.v = v0;
  const double dt = 1.0 / steps;
  auto deriv = [&](const double y[5], double dy[5]) {
    const double t = u0 + y[0];
    dy[0] = y[1];
    dy[1] = -potential_d(L, t);
    dy[2] = y[3];
    dy[3] = -potential_dd(L, t) * y[2];
    dy[4] = 0.5 * y[1] * y[1] - potential(L, t);
  };
  double y[5] = {s.q, s.v, s.sq, s.sv, s.action};
  double k1[5], k2[5], k3[5], k4[5], tmp[5];
  for (int i = 0; i < steps; ++i) {
    deriv(y, k1);
    for (int j = 0; j < 5; ++j) tmp[j] = y[j] + 0.5 * dt * k1[j];
    deriv(tmp, k2);
    for (int j = 0; j < 5; ++j) tmp[j] = y[j] + 0.5 * dt * k2[j];
    deriv(tmp, k3);
    for (int j = 0; j < 5; ++j) tmp[j] = y[j] + dt * k3[j];
    deriv(tmp, k4);
    // dt * (sum/6) rather than (dt/6) * sum: on a rest curve the slope sum
    // is an exact multiple of 6, so the action stays an exact dyadic sum
    for (int j = 0; j < 5; ++j)
      y[j] += dt * ((k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]) / 6.0);
  }
  s.q = y[0];
  s.v = y[1];
  s.sq = y[2];
  s.sv = y[3];
  s.action = y[4];
  return s;
}

}  // namespace detail

// One curve between circle points, in a fixed winding class.  points are
// lifted reals (points[0] = x, points[M] = x + displacement); velocities are
// the M collocation segment velocities.  action is the shooting-refined
// value when refined, otherwise the collocation value.
struct curve {
  double x = 0, y = 0;
  int winding = 0;
  std::vector<double> points;
  std::vector<double> velocities;
  double action = 0;
  double collocation_action = 0;
  double v_start = 0, v_end = 0;
  bool refined = false;
  double winding_gap = std::numeric_limits<double>::infinity();
  bool tied_minimizer = false;  // distinct minimizers within the same winding
};

struct action_cost_result {
  double cost = 0;
  curve minimizer;
};

namespace detail {

struct winding_solve {
  collocation_result best;
  bool tied = false;
  int w = 0;
  double u0 = 0, D = 0;
  collocation_problem prob;
};

inline winding_solve solve_one_winding(const lagrangian_spec& L, double x, double y, int w) {
  const int M = L.collocation_steps;
  winding_solve out;
  out.D = (y - x) + double(w);
  out.prob.L = &L;
  out.prob.M = M;
  out.prob.h = 1.0 / M;
  out.prob.D = out.D;
  out.prob.u_node.resize(M + 1);
  out.prob.u_mid.resize(M);
  const double hd = out.D / M;
  for (int s = 0; s <= M; ++s) out.prob.u_node[s] = reduce_circle(x + s * hd);
  for (int s = 0; s < M; ++s) out.prob.u_mid[s] = reduce_circle(x + s * hd + 0.5 * hd);
  out.u0 = reduce_circle(x);
  // Both representatives of a half-integer start are valid; pick the one
  // opposite the displacement so a mirrored problem gets the mirrored sign
  // (reduce alone would hand both runs +0.5, and the shooting integrator's
  // bitwise mirror symmetry hinges on u0 flipping sign).
  if (std::abs(out.u0) == 0.5) out.u0 = std::copysign(0.5, -out.D);

  // Multistart: the straight line plus a symmetric pair of bowed starts.
  // Rest curves at potential extrema are exact critical points (saddles at
  // interior maxima of -V), so descent from the line alone can stall on a
  // non-minimizing critical curve; the bowed pair finds the swings.
  std::vector<double> flat(M + 1, 0.0), up(M + 1), down(M + 1);
  for (int s = 0; s <= M; ++s) {
    const double shape = 0.3 * (4.0 * s * (M - s)) / double(M) / double(M);
    up[s] = shape;
    down[s] = -shape;
  }
  auto r0 = solve_collocation(out.prob, std::move(flat));
  auto r1 = solve_collocation(out.prob, std::move(up));
  auto r2 = solve_collocation(out.prob, std::move(down));
  const collocation_result* cands[3] = {&r0, &r1, &r2};
  // The tie-break key must be invariant under mirroring the problem, or two
  // mirror-image pairs can pick mirror-inconsistent representatives of the
  // same minimizer (the bowed starts approach it along different paths and
  // stop at iterates a few ulp apart, with bitwise-equal actions).  |v0| is
  // such a key; the index order is only the last resort.
  auto better = [](const collocation_result& a, const collocation_result& b) {
    if (a.converged != b.converged) return a.converged;
    if (a.action != b.action) return a.action < b.action;
    return std::abs(a.v0) < std::abs(b.v0);
  };
  int bi = 0;
  for (int c = 1; c < 3; ++c)
    if (better(*cands[c], *cands[bi])) bi = c;
  for (int c = 0; c < 3; ++c) {
    if (c == bi || !cands[c]->converged) continue;
    double apart = 0.0;
    for (std::size_t i = 0; i < cands[c]->xi.size(); ++i)
      apart = std::max(apart, std::abs(cands[c]->xi[i] - cands[bi]->xi[i]));
    if (apart > 1e-4 && std::abs(cands[c]->action - cands[bi]->action) <= 1e-6) out.tied = true;
  }
  out.best = *cands[bi];
  return out;
}

}  // namespace detail

// Minimal discrete action from x to y in the given winding class, or over
// windings -2..2 when none is given.  The collocation minimizer is refined
// by shooting along the flow from its initial velocity; the refined and
// collocation actions must agree within the configured budget.
inline action_cost_result action_cost(const lagrangian_spec& L, double x, double y,
                                      std::optional<int> winding = std::nullopt) {
  if (L.collocation_steps < 2) throw validation_error("collocation_steps must be >= 2");
  std::vector<int> ws;
  if (winding)
    ws.push_back(*winding);
  else
    for (int w = -2; w <= 2; ++w) ws.push_back(w);

  // Cheap per-winding screen before the expensive solve.  Cauchy-Schwarz
  // gives kinetic action >= D^2/2 for displacement D in unit time, and the
  // potential term is at least -sum|coeffs|, so any winding whose bound
  // already clears the incumbent by a safe margin cannot win.  Its bound
  // still feeds the winding gap, conservatively from below.  Candidates are
  // tried nearest displacement first so the incumbent shows up early.
  //
  // Ties in |D| (half-turn pairs, loops) prefer the lift whose sign matches
  // the circle representative y - x.  Exactly tied branches commit to the
  // first candidate tried, and this order makes the committed displacements
  // odd under reversal: D(y,x) = -D(x,y).  Reversing a cycle then negates
  // its total winding on the nose, which is what keeps alpha sweeps of
  // reversible systems symmetric; with ascending-w ties both half-turn
  // edges at the top would commit to the same direction and the grid would
  // carry a rotating two-cycle with no mirror partner.
  double vmax = 0.0;
  for (double a : L.cosine_coeffs) vmax += std::abs(a);
  for (double b : L.sine_coeffs) vmax += std::abs(b);
  const double rep = y - x;
  auto tie_rank = [&](int w) {
    const double D = rep + w;
    const bool preferred = rep == 0.0 || (rep > 0 ? D > 0 : D < 0);
    return std::pair<double, int>(std::abs(D), preferred ? 0 : 1);
  };
  std::stable_sort(ws.begin(), ws.end(),
                   [&](int a, int b) { return tie_rank(a) < tie_rank(b); });

  std::vector<detail::winding_solve> solves;
  std::vector<double> skipped_bounds;
  int best = -1;
  for (int w : ws) {
    const double D = (y - x) + w;
    if (best >= 0 && 0.5 * D * D - vmax > solves[best].best.action + 1e-3) {
      skipped_bounds.push_back(0.5 * D * D - vmax);
      continue;
    }
    solves.push_back(detail::solve_one_winding(L, x, y, w));
    solves.back().w = w;
    if (!solves.back().best.converged) continue;
    if (best < 0 || solves.back().best.action < solves[best].best.action)
      best = static_cast<int>(solves.size()) - 1;
  }
  if (best < 0) {
    double res = solves.empty() ? 0.0 : solves.front().best.grad_norm;
    throw convergence_error("curve solver failed to converge for (" + std::to_string(x) + "," +
                                std::to_string(y) + ")",
                            res);
  }
  const auto& sb = solves[best];

  action_cost_result out;
  curve& c = out.minimizer;
  c.x = x;
  c.y = y;
  c.winding = sb.w;
  c.collocation_action = sb.best.action;
  c.tied_minimizer = sb.tied;
  const int M = L.collocation_steps;
  c.points.resize(M + 1);
  c.velocities.resize(M);
  const double hd = sb.D / M;
  for (int s = 0; s <= M; ++s) c.points[s] = x + s * hd + sb.best.xi[s];
  for (int s = 0; s < M; ++s) c.velocities[s] = (hd + (sb.best.xi[s + 1] - sb.best.xi[s])) * M;
  for (std::size_t i = 0; i < solves.size(); ++i) {
    if (static_cast<int>(i) == best || !solves[i].best.converged) continue;
    c.winding_gap = std::min(c.winding_gap, solves[i].best.action - sb.best.action);
  }
  for (double b : skipped_bounds)
    c.winding_gap = std::min(c.winding_gap, b - sb.best.action);

  // Shooting refinement: Newton on the initial velocity, damped, with a
  // bisection fallback when a bracket shows up.  Power-of-two step count
  // keeps dt dyadic, so rest-curve actions accumulate without rounding.
  int steps = 64;
  while (steps < L.integrator_steps / 5) steps *= 2;
  double v0 = sb.best.v0;
  detail::shot sh = detail::shoot(L, sb.u0, v0, steps);
  bool hit = false;
  for (int it = 0; it < 20; ++it) {
    const double miss = sh.q - sb.D;
    if (std::abs(miss) <= 1e-11) {
      hit = true;
      break;
    }
    if (std::abs(sh.sq) < 1e-12) break;
    double step = -miss / sh.sq;
    double v_try = v0 + step;
    auto sh_try = detail::shoot(L, sb.u0, v_try, steps);
    int halvings = 0;
    while (std::abs(sh_try.q - sb.D) > std::abs(miss) && halvings++ < 8) {
      step *= 0.5;
      v_try = v0 + step;
      sh_try = detail::shoot(L, sb.u0, v_try, steps);
    }
    if (std::abs(sh_try.q - sb.D) >= std::abs(miss)) break;
    v0 = v_try;
    sh = sh_try;
  }
  if (!hit) {
    // Look for a sign change near the collocation velocity, then bisect.
    double lo = 0, hi = 0;
    bool have = false;
    const double m0 = detail::shoot(L, sb.u0, sb.best.v0, steps).q - sb.D;
    for (double span : {0.25, 0.5, 1.0, 2.0, 4.0}) {
      const double mp = detail::shoot(L, sb.u0, sb.best.v0 + span, steps).q - sb.D;
      const double mm = detail::shoot(L, sb.u0, sb.best.v0 - span, steps).q - sb.D;
      if ((m0 > 0) != (mp > 0)) {
        lo = sb.best.v0;
        hi = sb.best.v0 + span;
        have = true;
        break;
      }
      if ((m0 > 0) != (mm > 0)) {
        lo = sb.best.v0 - span;
        hi = sb.best.v0;
        have = true;
        break;
      }
    }
    if (have) {
      double mlo = detail::shoot(L, sb.u0, lo, steps).q - sb.D;
      for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double mm = detail::shoot(L, sb.u0, mid, steps).q - sb.D;
        if (std::abs(mm) <= 1e-11) break;
        if ((mm > 0) == (mlo > 0)) {
          lo = mid;
          mlo = mm;
        } else {
          hi = mid;
        }
      }
      v0 = 0.5 * (lo + hi);
      sh = detail::shoot(L, sb.u0, v0, steps);
      hit = std::abs(sh.q - sb.D) <= 1e-9;
    }
  }
  if (hit) {
    if (std::abs(sh.action - sb.best.action) > agreement_budget(L))
      throw convergence_error("collocation and shooting disagree for (" + std::to_string(x) +
                                  "," + std::to_string(y) + ")",
                              std::abs(sh.action - sb.best.action));
    c.refined = true;
    c.action = sh.action;
    c.v_start = v0;
    c.v_end = sh.v;
  } else {
    c.action = sb.best.action;
    c.v_start = sb.best.v0;
    c.v_end = sb.best.v1;
  }
  out.cost = c.action;
  return out;
}

// The two partial derivatives of the cost, (dc/dx, dc/dy) = (-v0, v1) for a
// mechanical Lagrangian.  Defined only where the minimizer is unique; a tie
// between windings (or within one winding class) marks a cut-locus pair.
struct gradient_pair {
  double dx = 0, dy = 0;
};

inline gradient_pair cost_gradients(const lagrangian_spec& L, double x, double y) {
  const auto r = action_cost(L, x, y);
  if (r.minimizer.winding_gap <= 1e-6)
    throw ambiguity_error("cost is not differentiable at (" + std::to_string(x) + "," +
                          std::to_string(y) + "): winding tie");
  if (r.minimizer.tied_minimizer)
    throw ambiguity_error("cost is not differentiable at (" + std::to_string(x) + "," +
                          std::to_string(y) + "): two minimizers in one winding class");
  return {-r.minimizer.v_start, r.minimizer.v_end};
}

// Euler-Lagrange flow of the mechanical system: x' = v, v' = -V'(x),
// integrated with fixed-step RK4 at integrator_steps per unit time.  The
// returned position is reduced to [0, 1).
struct el_state {
  double x = 0, v = 0, t = 0;
};

inline el_state el_flow(const lagrangian_spec& L, el_state s, double duration) {
  const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(duration) * L.integrator_steps)));
  const double dt = duration / steps;
  double x = s.x, v = s.v;
  for (int i = 0; i < steps; ++i) {
    const double k1x = v, k1v = -detail::potential_d(L, x);
    const double k2x = v + 0.5 * dt * k1v, k2v = -detail::potential_d(L, x + 0.5 * dt * k1x);
    const double k3x = v + 0.5 * dt * k2v, k3v = -detail::potential_d(L, x + 0.5 * dt * k2x);
    const double k4x = v + dt * k3v, k4v = -detail::potential_d(L, x + dt * k3x);
    x += dt * ((k1x + 2.0 * k2x + 2.0 * k3x + k4x) / 6.0);
    v += dt * ((k1v + 2.0 * k2v + 2.0 * k3v + k4v) / 6.0);
  }
  const double r = detail::reduce_circle(x);
  return {r < 0 ? r + 1.0 : r, v, s.t + duration};
}

// Discrete Euler-Lagrange defect of a chain of circle points:
// max_i | dc/dy(x_{i-1}, x_i) + dc/dx(x_i, x_{i+1}) |.
inline double el_residual(const lagrangian_spec& L, const std::vector<double>& chain) {
  if (chain.size() < 3) return 0.0;
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < chain.size(); ++i) {
    const auto left = cost_gradients(L, chain[i - 1], chain[i]);
    const auto right = cost_gradients(L, chain[i], chain[i + 1]);
    worst = std::max(worst, std::abs(left.dy + right.dx));
  }
  return worst;
}

// One step of the partial dynamics read off the cost: continue the unique
// minimizer into (x,y) through y by flowing its end velocity for unit time
// (direction +1), or back through x from its start velocity (direction -1).
// The continued pair must itself calibrate the discrete Euler-Lagrange
// equation; when the continuation is not the unique minimizer of its own
// pair the map is undefined there.
struct partial_step {
  double a = 0, b = 0;       // the continued pair, as circle points
  double residual = 0;       // discrete EL defect of the 3-chain
  double winding_gap = 0;    // of the continued pair's minimizer
};

inline partial_step partial_dynamics(const lagrangian_spec& L, double x, double y,
                                     int direction) {
  if (direction != 1 && direction != -1)
    throw validation_error("partial dynamics direction must be +1 or -1");
  const auto r = action_cost(L, x, y);
  if (r.minimizer.winding_gap <= 1e-6 || r.minimizer.tied_minimizer)
    throw ambiguity_error("partial dynamics undefined: minimizer tie at (" + std::to_string(x) +
                          "," + std::to_string(y) + ")");
  partial_step out;
  std::vector<double> chain;
  if (direction == 1) {
    const auto cont = el_flow(L, {detail::reduce_circle(y) < 0 ? detail::reduce_circle(y) + 1.0
                                                               : detail::reduce_circle(y),
                                  r.minimizer.v_end, 0.0},
                              1.0);
    out.a = y;
    out.b = cont.x;
    chain = {x, y, cont.x};
  } else {
    const auto cont = el_flow(L, {detail::reduce_circle(x) < 0 ? detail::reduce_circle(x) + 1.0
                                                               : detail::reduce_circle(x),
                                  r.minimizer.v_start, 0.0},
                              -1.0);
    out.a = cont.x;
    out.b = x;
    chain = {cont.x, x, y};
  }
  curve cont_curve;
  try {
    const auto cr = action_cost(L, out.a, out.b);
    cont_curve = cr.minimizer;
  } catch (const convergence_error&) {
    throw partial_map_error("partial map undefined here: continuation solve failed");
  }
  if (cont_curve.winding_gap <= 1e-6 || cont_curve.tied_minimizer)
    throw partial_map_error("partial map undefined here: continued pair sits on the cut locus");
  out.winding_gap = cont_curve.winding_gap;
  out.residual = el_residual(L, chain);
  if (out.residual > 1e-6)
    throw partial_map_error("partial map undefined here: continuation fails the discrete "
                            "Euler-Lagrange equation (residual " +
                            std::to_string(out.residual) + ")");
  return out;
}

// Twist audit over any gradient provider: sample (x, y_i) for fixed x and
// report the smallest gap between the left Legendre covectors -dc/dx of
// distinct y_i (and symmetrically for the right covectors over x_i at fixed
// y).  An injective family keeps both gaps positive; a constant cost
// collapses them to zero.
struct twist_report {
  int samples = 0;
  int skipped = 0;  // ambiguous pairs met while sampling
  double min_left_gap = 0;
  double min_right_gap = 0;
  double tol = 0;
  bool pass = false;
};

template <class G>
twist_report twist_audit_with(G&& grad, int sample_count, double tol = 1e-9,
                              unsigned seed = 20240901) {
  if (sample_count < 2) throw validation_error("twist audit needs at least 2 samples");
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double x_fixed = 0.3, y_fixed = 0.7;
  twist_report rep;
  rep.samples = sample_count;
  rep.tol = tol;

  std::vector<double> left, right;
  for (int i = 0; i < sample_count; ++i) {
    const double yi = unif(rng);
    const double xi = unif(rng);
    try {
      left.push_back(-grad(x_fixed, yi).first);
    } catch (const ambiguity_error&) {
      ++rep.skipped;
    }
    try {
      right.push_back(grad(xi, y_fixed).second);
    } catch (const ambiguity_error&) {
      ++rep.skipped;
    }
  }
  auto min_gap = [](std::vector<double>& v) {
    std::sort(v.begin(), v.end());
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < v.size(); ++i) gap = std::min(gap, v[i] - v[i - 1]);
    return v.size() < 2 ? 0.0 : gap;
  };
  rep.min_left_gap = min_gap(left);
  rep.min_right_gap = min_gap(right);
  rep.pass = rep.min_left_gap > tol && rep.min_right_gap > tol;
  return rep;
}

inline twist_report twist_audit(const lagrangian_spec& L, int sample_count, double tol = 1e-9,
                                unsigned seed = 20240901) {
  return twist_audit_with(
      [&](double x, double y) {
        const auto g = cost_gradients(L, x, y);
        return std::pair<double, double>{g.dx, g.dy};
      },
      sample_count, tol, seed);
}

// Grid cost system generated by the Lagrangian: states i/N, cost over the
// best winding class, the winding recorded per edge (winding_dim 1).
inline cost_system<double> discretize(const lagrangian_spec& L, int N) {
  if (N < 8) throw validation_error("discretize needs N >= 8");
  cost_system<double> sys(N, 1);
  sys.coords.resize(N);
  for (int i = 0; i < N; ++i) sys.coords[i] = {double(i) / N};
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      const auto r = action_cost(L, double(i) / N, double(j) / N);
      sys.add_edge(i, j, r.cost, {r.minimizer.winding});
    }
  }
  sys.validate();
  return sys;
}

// Lifted Aubry data: the Aubry pairs of the discretized system pushed
// through the left Legendre map (x, -dc/dx).  The finite stand-in for the
// graph property is degree counting: every Aubry node must have exactly one
// outgoing and one incoming Aubry pair.
struct cotangent_point {
  double base = 0;
  double covector = 0;
};

struct aubry_star_data {
  aubry_data aubry;
  std::vector<std::pair<int, int>> pairs;     // mirrors aubry.pairs minus ambiguous ones
  std::vector<cotangent_point> points;        // left Legendre image, one per pair
  std::vector<std::pair<int, int>> ambiguous_pairs;
  std::vector<int> degree_violations;         // nodes without unique successor/predecessor
  bool graph_property = false;
};

inline aubry_star_data aubry_star(const lagrangian_spec& L, int N, double tol = 1e-6) {
  const auto sys = discretize(L, N);
  aubry_star_data out;
  out.aubry = aubry(sys, tol);

  std::vector<int> outdeg(N, 0), indeg(N, 0);
  for (const auto& [i, j] : out.aubry.pairs) {
    ++outdeg[i];
    ++indeg[j];
    try {
      const auto g = cost_gradients(L, double(i) / N, double(j) / N);
      out.points.push_back({double(i) / N, -g.dx});
      out.pairs.emplace_back(i, j);
    } catch (const ambiguity_error&) {
      out.ambiguous_pairs.emplace_back(i, j);
    }
  }
  for (int v : out.aubry.nodes)
    if (outdeg[v] != 1 || indeg[v] != 1) out.degree_violations.push_back(v);
  out.graph_property = out.degree_violations.empty() && out.ambiguous_pairs.empty();
  return out;
}

}  // namespace weakkam
