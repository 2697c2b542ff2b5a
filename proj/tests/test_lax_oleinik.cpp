#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <vector>

#include "oracle.hpp"
#include "weakkam/cost_system.hpp"
#include "weakkam/lax_oleinik.hpp"

using weakkam::cost_system;
using weakkam::rational;

namespace {

cost_system<double> make_g2() {
  cost_system<double> sys(2, 0);
  sys.add_edge(0, 0, 5);
  sys.add_edge(0, 1, 1);
  sys.add_edge(1, 0, 3);
  sys.add_edge(1, 1, 4);
  sys.validate();
  return sys;
}

cost_system<double> make_g3() {
  auto sys = cost_system<double>(3, 0);
  sys.add_edge(0, 0, 5);
  sys.add_edge(0, 1, 1);
  sys.add_edge(1, 0, 3);
  sys.add_edge(1, 1, 4);
  sys.add_edge(0, 2, 6);
  sys.add_edge(2, 0, 6);
  sys.add_edge(1, 2, 6);
  sys.add_edge(2, 1, 6);
  sys.add_edge(2, 2, 10);
  sys.validate();
  return sys;
}

cost_system<double> transpose(const cost_system<double>& sys) {
  cost_system<double> t(sys.n(), 0);
  for (const auto& e : sys.edges()) t.add_edge(e.to, e.from, e.cost);
  t.validate();
  return t;
}

}  // namespace

TEST_CASE("backward operator on the two-state fixture") {
  const auto sys = make_g2();
  CHECK(weakkam::lax_minus(sys, {0, 0}) == std::vector<double>{3, 1});
  // u = (0,-1) is the backward weak KAM solution: T-u = u + 2
  CHECK(weakkam::lax_minus(sys, {0, -1}) == std::vector<double>{2, 1});
}

TEST_CASE("forward operator on the two-state fixture") {
  const auto sys = make_g2();
  CHECK(weakkam::lax_plus(sys, {0, 0}) == std::vector<double>{-1, -3});
  // u = (0,-1) again: T+u = u - 2, both fixed points at once
  CHECK(weakkam::lax_plus(sys, {0, -1}) == std::vector<double>{-2, -3});
}

TEST_CASE("slack matrix and tightness on the fixtures") {
  const auto sys = make_g2();
  const std::vector<double> u{0, -1};
  const auto m = weakkam::slack_matrix(sys, u, -2.0);
  REQUIRE(m.size() == 4);
  CHECK(*m[0] == 3);  // (0,0)
  CHECK(*m[1] == 0);  // (0,1)
  CHECK(*m[2] == 0);  // (1,0)
  CHECK(*m[3] == 2);  // (1,1)
  CHECK(weakkam::is_subsolution(sys, u, -2.0, 1e-9));
  CHECK_FALSE(weakkam::is_subsolution(sys, u, -2.5, 1e-9));

  const auto tp = weakkam::tight_pairs(sys, u, -2.0, 1e-9);
  CHECK(tp == std::vector<std::pair<int, int>>{{0, 1}, {1, 0}});
  CHECK(weakkam::strict_points(sys, u, -2.0, 1e-9).empty());

  // the extended fixture picks up a tight pair that no zero cycle supports
  const auto g3 = make_g3();
  const std::vector<double> v{0, -1, 3};
  const auto sl = weakkam::edge_slacks(g3, v, -2.0);
  CHECK(sl[g3.edge_index(1, 2)] == 0);
  const auto tp3 = weakkam::tight_pairs(g3, v, -2.0, 1e-9);
  CHECK(tp3 == std::vector<std::pair<int, int>>{{0, 1}, {1, 0}, {1, 2}});
}

TEST_CASE("operators in exact arithmetic") {
  const auto sys = weakkam::to_rational(make_g2());
  const std::vector<rational> u{rational(0), rational(-1)};
  const auto tm = weakkam::lax_minus(sys, u);
  CHECK(tm == std::vector<rational>{rational(2), rational(1)});
  CHECK(weakkam::is_subsolution(sys, u, rational(-2), 0.0));
  CHECK_FALSE(weakkam::is_subsolution(sys, u, rational(-201, 100), 0.0));
}

TEST_CASE("operator algebra on random systems") {
  std::mt19937 rng(40821);
  std::uniform_real_distribution<double> val(-3.0, 3.0);
  for (int it = 0; it < 60; ++it) {
    const auto sys = oracle::random_system(rng);
    const int n = sys.n();
    std::vector<double> u(n), v(n);
    for (int i = 0; i < n; ++i) {
      u[i] = val(rng);
      v[i] = u[i] + std::abs(val(rng));  // v >= u
    }

    const auto tu = weakkam::lax_minus(sys, u);
    const auto tv = weakkam::lax_minus(sys, v);
    for (int i = 0; i < n; ++i) CHECK(tu[i] <= tv[i] + 1e-12);  // monotone

    auto shifted = u;
    for (auto& x : shifted) x += 1.75;
    const auto ts = weakkam::lax_minus(sys, shifted);
    for (int i = 0; i < n; ++i) CHECK(ts[i] == Catch::Approx(tu[i] + 1.75).margin(1e-12));

    // T+ is the conjugate of T- through cost transposition
    const auto tp = weakkam::lax_plus(sys, u);
    auto neg = u;
    for (auto& x : neg) x = -x;
    auto conj = weakkam::lax_minus(transpose(sys), neg);
    for (int i = 0; i < n; ++i) CHECK(tp[i] == Catch::Approx(-conj[i]).margin(1e-12));

    // subsolution predicate agrees with the direct inequality check
    const auto alpha = oracle::critical_alpha(sys);
    CHECK(weakkam::is_subsolution(sys, u, alpha, 1e-9) == oracle::dominated(sys, u, alpha));
  }
}
