#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "oracle.hpp"
#include "weakkam/cohomology.hpp"
#include "weakkam/cost_system.hpp"
#include "weakkam/critical.hpp"

using weakkam::cost_system;
using weakkam::rational;

namespace {

// 3-cycle with unit costs both ways round; the forward closing edge carries
// winding +1 and the backward one -1, so forward laps wind once.
cost_system<double> make_c3() {
  cost_system<double> sys(3, 1);
  sys.add_edge(0, 1, 1, {0});
  sys.add_edge(1, 2, 1, {0});
  sys.add_edge(2, 0, 1, {1});
  sys.add_edge(1, 0, 1, {0});
  sys.add_edge(2, 1, 1, {0});
  sys.add_edge(0, 2, 1, {-1});
  sys.validate();
  return sys;
}

}  // namespace

TEST_CASE("twisting shifts costs by the paired winding") {
  const auto sys = make_c3();
  const auto tw = weakkam::twist_cost(sys, {3.0});
  CHECK(tw.cost(2, 0) == -2.0);
  CHECK(tw.cost(0, 2) == 4.0);
  CHECK(tw.cost(0, 1) == 1.0);

  CHECK_THROWS_AS(weakkam::twist_cost(sys, {1.0, 2.0}), weakkam::validation_error);
  CHECK_THROWS_AS(weakkam::twist_cost(sys, {}), weakkam::validation_error);
}

TEST_CASE("alpha at the zero class is the critical value, bit for bit") {
  const auto sys = make_c3();
  CHECK(weakkam::mather_alpha(sys, {0.0}).alpha == weakkam::critical_value(sys).alpha);

  // and the same through the exhaustive reference
  CHECK(weakkam::mather_alpha(sys, {0.0}).alpha ==
        weakkam::to_double_value(oracle::critical_alpha(sys)));
}

TEST_CASE("alpha of the wound 3-cycle has the piecewise linear closed form") {
  const auto sys = make_c3();
  for (double h = -6.0; h <= 6.0 + 1e-12; h += 0.25) {
    const double expect = std::abs(h) / 3.0 - 1.0;
    CHECK(weakkam::mather_alpha(sys, {h}).alpha == Catch::Approx(expect).margin(1e-9));
  }
  // exact mode pins the kink value
  const auto exact = weakkam::to_rational(make_c3());
  CHECK(weakkam::mather_alpha(exact, {rational(0)}).alpha == rational(-1));
  CHECK(weakkam::mather_alpha(exact, {rational(3)}).alpha == rational(0));
  CHECK(weakkam::mather_alpha(exact, {rational(-3)}).alpha == rational(0));
  CHECK(weakkam::mather_alpha(exact, {rational(1, 2)}).alpha == rational(-5, 6));
}

TEST_CASE("alpha sweep audits shape on the wound 3-cycle") {
  const auto sys = make_c3();
  std::vector<std::vector<double>> grid;
  for (double h = -6.0; h <= 6.0 + 1e-12; h += 0.25) grid.push_back({h});
  const auto curve = weakkam::alpha_sweep(sys, grid);
  CHECK(curve.samples.size() == 49);
  CHECK(curve.convexity_violations.empty());
  CHECK(curve.minimizer == std::vector<double>{0.0});
  CHECK(curve.min_alpha == Catch::Approx(-1.0).margin(1e-12));
  REQUIRE(curve.superlinear_c.size() == 3);
  CHECK(curve.superlinear_c[0] == Catch::Approx(1.0).margin(1e-9));
  CHECK(curve.superlinear_c[1] == Catch::Approx(5.0).margin(1e-9));
  CHECK(curve.superlinear_c[2] == Catch::Approx(11.0).margin(1e-9));

  CHECK_THROWS_AS(weakkam::alpha_sweep(sys, {}), weakkam::validation_error);
}

TEST_CASE("coboundaries leave every critical quantity in place") {
  std::mt19937 rng(8112);
  std::uniform_real_distribution<double> val(-3.0, 3.0);
  const auto sys = make_c3();
  for (int it = 0; it < 30; ++it) {
    const std::vector<double> g{val(rng), val(rng), val(rng)};
    const auto shifted = weakkam::apply_coboundary(sys, g);
    const double h = std::round(val(rng));
    CHECK(weakkam::mather_alpha(shifted, {h}).alpha ==
          Catch::Approx(weakkam::mather_alpha(sys, {h}).alpha).margin(1e-9));
    CHECK(weakkam::aubry(shifted, 1e-7).pairs == weakkam::aubry(sys, 1e-7).pairs);
  }

  // windingless systems work the same way; the empty class is the only one
  std::mt19937 rng2(8113);
  for (int it = 0; it < 20; ++it) {
    const auto rnd = oracle::random_system(rng2);
    std::vector<double> g(rnd.n());
    for (auto& x : g) x = val(rng2);
    const auto shifted = weakkam::apply_coboundary(rnd, g);
    CHECK(weakkam::mather_alpha(shifted, {}).alpha ==
          Catch::Approx(weakkam::critical_value(rnd).alpha).margin(1e-9));
  }

  CHECK_THROWS_AS(weakkam::apply_coboundary(sys, {0.0}), weakkam::validation_error);
}

TEST_CASE("cover window indexing round trips") {
  const auto cw = weakkam::build_cover(make_c3(), 3);
  CHECK(cw.copies == 3);
  CHECK(cw.deck_dim == 1);
  CHECK(cw.fiber_size() == 3);
  CHECK(cw.lifted.n() == 9);
  for (int idx = 0; idx < 9; ++idx) {
    const auto [state, g] = cw.split_index(idx);
    CHECK(cw.lift_index(state, g) == idx);
    CHECK(cw.translate(cw.translate(idx, 0, 1), 0, -1) == idx);
  }
  // every base edge appears once per fiber point
  CHECK(cw.lifted.edges().size() == make_c3().edges().size() * 3);
}

TEST_CASE("cover wrap flags mark exactly the window boundary") {
  const auto sys = make_c3();
  const auto cw = weakkam::build_cover(sys, 3);
  int wraps = 0;
  for (std::size_t id = 0; id < cw.wrap.size(); ++id) {
    if (!cw.wrap[id]) continue;
    ++wraps;
    const auto& e = cw.lifted.edge_at(static_cast<int>(id));
    const auto [sf, gf] = cw.split_index(e.from);
    const auto [st, gt] = cw.split_index(e.to);
    // only the wound edges can wrap, and they jump across the window
    CHECK(sys.edge_at(sys.edge_index(sf, st)).winding[0] != 0);
    CHECK(std::abs(gf[0] - gt[0]) == 2);
  }
  CHECK(wraps == 2);  // one per wound edge, at the boundary copy
}

TEST_CASE("cover guards") {
  CHECK_THROWS_AS(weakkam::build_cover(make_c3(), 2), weakkam::validation_error);
  CHECK_THROWS_AS(weakkam::build_cover(make_c3(), 0), weakkam::validation_error);

  cost_system<double> flat(2, 0);
  flat.add_edge(0, 1, 1);
  flat.add_edge(1, 0, 1);
  CHECK_THROWS_AS(weakkam::build_cover(flat, 3), weakkam::validation_error);

  // all-zero windings leave the window disconnected between copies, which
  // the lifted system must reject rather than paper over
  cost_system<double> zero(2, 1);
  zero.add_edge(0, 1, 1, {0});
  zero.add_edge(1, 0, 1, {0});
  CHECK_THROWS_AS(weakkam::build_cover(zero, 3), weakkam::validation_error);
}

TEST_CASE("equivariant solutions on the wound 3-cycle") {
  const auto sys = make_c3();
  for (double h : {0.0, 1.0, -1.0, 3.0, -3.0}) {
    const auto eq = weakkam::equivariant_solution(sys, {h}, 3);
    INFO("h = " << h);
    CHECK(eq.pass);
    CHECK(eq.generator_identity_ok);
    CHECK(eq.max_fixed_point_residual <= 1e-9);
    CHECK(eq.alpha == Catch::Approx(std::abs(h) / 3.0 - 1.0).margin(1e-9));
    CHECK(eq.excluded_states == 2);

    // the exclusions are the two states fed across the boundary
    std::vector<char> fed(eq.cover.lifted.n(), 0);
    for (std::size_t id = 0; id < eq.cover.wrap.size(); ++id)
      if (eq.cover.wrap[id]) fed[eq.cover.lifted.edge_at(static_cast<int>(id)).to] = 1;
    CHECK(fed[eq.cover.lift_index(0, {0})]);
    CHECK(fed[eq.cover.lift_index(2, {2})]);

    // lifted values are the quotient solution plus h times the deck index
    for (int idx = 0; idx < eq.cover.lifted.n(); ++idx) {
      const auto [state, g] = eq.cover.split_index(idx);
      CHECK(eq.u_lifted[idx] == Catch::Approx(eq.u_base[state] + h * g[0]).margin(1e-12));
    }
  }
}

TEST_CASE("equivariant window of size one is vacuous but honest") {
  const auto eq = weakkam::equivariant_solution(make_c3(), {1.0}, 1);
  CHECK(eq.pass);
  CHECK(eq.excluded_states == 2);  // both wound edges wrap immediately
  CHECK(eq.cover.lifted.n() == 3);
}
