#include "crnlyap/birth_death.hpp"
#include "crnlyap/deterministic.hpp"
#include "crnlyap/stochastic.hpp"

#include "support.hpp"

#include <doctest.h>

#include <array>

using namespace crnlyap;
using testing::state;

namespace {

BirthDeathModel modified(const ReactionNetwork& net) {
  const auto verdict = classify_birth_death(net);
  REQUIRE(verdict.is_birth_death());
  return apply_modification(*verdict.model);
}

BirthDeathModel cubic() { return modified(testing::schlogl(6, 11, 6, 1)); }

BirthDeathModel linear_absorbing() { return modified(testing::load("linear_absorbing.crn")); }

}  // namespace

TEST_CASE("classification") {
  const auto c = classify_birth_death(testing::schlogl(6, 11, 6, 1));
  REQUIRE(c.is_birth_death());
  CHECK(c.model->n_u == 2);
  CHECK(c.model->n_d == 3);
  CHECK(c.model->up.at(0) == 6.0);
  CHECK(c.model->up.at(2) == 6.0);
  CHECK(c.model->down.at(1) == 11.0);
  CHECK(c.model->down.at(3) == 1.0);
  CHECK_FALSE(c.model->modified);

  const auto ns = classify_birth_death(testing::load("no_stationary.crn"));
  REQUIRE(ns.is_birth_death());
  CHECK(ns.model->n_u == 4);
  CHECK(ns.model->n_d == 3);

  const auto pb = classify_birth_death(testing::load("pair_birth.crn"));
  CHECK_FALSE(pb.is_birth_death());
  CHECK_FALSE(pb.reason.empty());

  CHECK_FALSE(classify_birth_death(testing::catalytic(1, 2)).is_birth_death());
  CHECK_FALSE(classify_birth_death(testing::from_text("0 -> X ; 1\n")).is_birth_death());
}

TEST_CASE("modification removes absorbing states") {
  const auto ns = modified(testing::load("no_stationary.crn"));
  CHECK(ns.i0 == 4);
  CHECK(ns.modified);
  CHECK(bd_death_rate(ns, 1.0, 4) == 0.0);
  CHECK(bd_death_rate(ns, 1.0, 5) == 60.0);
  CHECK(bd_birth_rate(ns, 1.0, 4) == 24.0);

  const auto la = linear_absorbing();
  CHECK(la.i0 == 1);
  CHECK(bd_death_rate(la, 1.0, 1) == 0.0);
  CHECK(bd_death_rate(la, 1.0, 2) == 4.0);

  const auto cu = cubic();
  CHECK(cu.i0 == 0);
  CHECK(cu.modified);
  CHECK(bd_death_rate(cu, 1.0, 1) == 11.0);

  const auto again = apply_modification(la);
  CHECK(again.i0 == la.i0);
  CHECK(again.up == la.up);
  CHECK(again.down == la.down);
}

TEST_CASE("scaled birth and death rates") {
  const auto cu = cubic();
  // p_i = 6 V + 6 i (i - 1) / V, q_i = 11 i + i (i - 1) (i - 2) / V^2
  for (double V : {1.0, 10.0, 100.0}) {
    for (std::int64_t i : {0, 1, 2, 7, 150}) {
      const double x = static_cast<double>(i);
      CHECK(bd_birth_rate(cu, V, i) == doctest::Approx(6 * V + 6 * x * (x - 1) / V).epsilon(1e-14));
      CHECK(bd_death_rate(cu, V, i) == doctest::Approx(11 * x + x * (x - 1) * (x - 2) / (V * V)).epsilon(1e-14));
    }
  }
}

TEST_CASE("existence dichotomy") {
  const auto cu = bd_existence(cubic());
  CHECK(cu.exists);
  CHECK(cu.condition == 1);

  const auto la = bd_existence(linear_absorbing());
  CHECK(la.exists);
  CHECK(la.condition == 2);

  const auto ns = bd_existence(modified(testing::load("no_stationary.crn")));
  CHECK_FALSE(ns.exists);
  CHECK(ns.condition == 0);
  CHECK(ns.message.find("no stationary distribution: n_d ≤ n_u and condition (2) fails") == 0);
  CHECK(ns.message.find("n_u = 4") != std::string::npos);

  // equal orders, birth constant larger
  const auto grow = bd_existence(modified(testing::from_text("X -> 0 ; 1\nX -> 2X ; 2\n")));
  CHECK_FALSE(grow.exists);
  // equal orders and equal constants: null recurrent, no distribution
  CHECK_FALSE(bd_existence(modified(testing::from_text("X -> 0 ; 1\nX -> 2X ; 1\n"))).exists);

  CHECK_THROWS_AS(bd_stationary(modified(testing::load("no_stationary.crn")), 1.0), NoStationaryDistribution);
}

TEST_CASE("closed-form cubic distribution") {
  const double k0 = 6, km1 = 11, k2 = 6, km3 = 1;
  const double B = k2 / km3, R = km1 / km3, P = k0 / k2;
  const auto dist = bd_stationary(cubic(), 1.0);
  CHECK(dist.method() == "birth-death");
  CHECK(dist.state(0) == state({0}));
  REQUIRE(dist.size() > 25);
  double ratio = 1.0;
  for (int x = 1; x < static_cast<int>(dist.size()); ++x) {
    const double i = x;
    ratio *= B * ((i - 1) * (i - 2) + P) / (i * (i - 1) * (i - 2) + R * i);
    CHECK(dist.log_prob_at(state({x})) - dist.log_prob(0) == doctest::Approx(std::log(ratio)).epsilon(1e-12));
  }
  CHECK(dist.tail_mass_bound <= 1e-14);
}

TEST_CASE("balanced cubic rates give a Poisson law") {
  const auto dist = bd_stationary(modified(testing::schlogl(1, 1, 1, 1)), 1.0);
  const auto ref = testing::poisson_pmf(1.0, 60);
  CHECK(testing::tv_to_pmf(dist, ref) <= 1e-13);
  CHECK(dist.log_prob_at(state({0})) == doctest::Approx(-1.0).epsilon(1e-13));
}

TEST_CASE("linear absorbing network: volume-free law") {
  const auto m = linear_absorbing();
  for (double V : {1.0, 10.0, 1000.0}) {
    const auto dist = bd_stationary(m, V);
    CHECK(dist.state(0) == state({1}));
    CHECK_FALSE(dist.index_of(state({0})).has_value());
    // pi(x) = (1/2)^{x-1} / x / (2 ln 2)
    REQUIRE(dist.size() > 30);
    for (int x = 1; x <= 30; ++x) {
      const double expect = (x - 1) * std::log(0.5) - std::log(static_cast<double>(x)) - std::log(2 * std::log(2.0));
      CHECK(std::abs(dist.log_prob_at(state({x})) - expect) <= 1e-12);
    }
  }
}

TEST_CASE("detailed-balance recursion holds in log space") {
  for (double V : {1.0, 10.0, 100.0}) {
    const auto m = cubic();
    const auto dist = bd_stationary(m, V);
    for (std::size_t k = 1; k < dist.size(); ++k) {
      const auto x = dist.state(k)[0];
      const double step = std::log(bd_birth_rate(m, V, x - 1)) - std::log(bd_death_rate(m, V, x));
      CHECK(std::abs(dist.log_prob(k) - dist.log_prob(k - 1) - step) <= 1e-12);
    }
  }
}

TEST_CASE("closed form agrees with the brute-force solver") {
  SUBCASE("cubic") {
    for (double V : {1.0, 10.0, 100.0}) {
      const auto bd = bd_stationary(cubic(), V);
      const auto snet = scale_network(testing::schlogl(6, 11, 6, 1), V);
      const auto gth = solve_stationary_auto(snet, state({static_cast<std::int64_t>(V)}), TruncationPolicy{});
      CHECK(total_variation(bd, gth) <= 1e-9);
    }
  }
  SUBCASE("linear absorbing") {
    const auto snet = scale_network(testing::load("linear_absorbing.crn"), 10.0);
    const auto comp = enumerate_component(snet, state({1}), state({200}));
    const auto gth = solve_stationary_truncated(snet, comp);
    CHECK(total_variation(bd_stationary(linear_absorbing(), 10.0), gth) <= 1e-9);
  }
}

TEST_CASE("integrand of the limit") {
  CHECK(g_integrand(cubic(), 2.0) == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
  CHECK(g_integrand(cubic(), 1.0) == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
  const auto la = linear_absorbing();
  for (double u : {1e-8, 0.3, 5.0, 1e4}) CHECK(g_integrand(la, u) == doctest::Approx(std::log(0.5)).epsilon(1e-14));
  // near zero it grows like -ln u
  const double a = g_integrand(cubic(), 1e-6), b = g_integrand(cubic(), 1e-8);
  CHECK(b - a == doctest::Approx(std::log(100.0)).epsilon(1e-4));
  CHECK_THROWS(g_integrand(cubic(), 0.0));
  CHECK_THROWS(g_integrand(cubic(), -1.0));
}

TEST_CASE("anchor point of the limit") {
  CHECK(find_x_max(cubic()) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(find_x_max(modified(testing::schlogl(1, 1, 1, 1))) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(find_x_max(linear_absorbing()) == 0.0);
  CHECK_THROWS_AS(find_x_max(cubic(), 2.5), std::domain_error);
}

TEST_CASE("integrand roots are the deterministic equilibria") {
  const auto net = testing::schlogl(6, 11, 6, 1);
  const auto roots = integrand_roots(cubic(), default_search_cap(cubic()));
  REQUIRE(roots.size() == 3);
  const std::array<double, 3> starts{0.5, 1.9, 2.5};
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(std::abs(roots[k] - static_cast<double>(k + 1)) <= 1e-8);
    // 2 is unstable, so start on it; the others are attractors
    const double x0 = k == 1 ? 2.0 : starts[k];
    const auto eq = find_equilibrium(net, testing::conc({x0}));
    CHECK(std::abs(roots[k] - eq.point[0]) <= 1e-8);
  }
}

TEST_CASE("quadrature limit matches the arctan formula") {
  const GLimit g = g_limit(cubic());
  CHECK(g.x_max() == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(std::abs(g(g.x_max())) <= 1e-12);
  for (double x : {0.5, 1.0, 2.0, 3.0}) CHECK(std::abs(g(x) - reference_g("cubic-bistable", {}, x)) <= 1e-8);
  for (int i = 0; i < 20; ++i) {
    const double x = 0.5 + 3.5 * i / 19.0;
    CHECK(std::abs(g(x) - reference_g("cubic-bistable", {}, x)) <= 1e-8);
  }
  CHECK(std::abs(reference_g("cubic-bistable", {}, 1.0)) <= 1e-14);
  CHECK(g_limit(cubic(), 3.0) == doctest::Approx(g(3.0)).epsilon(1e-15));
}

TEST_CASE("Poisson case of the cubic network") {
  const double B = 1.0;
  const GLimit g = g_limit(modified(testing::schlogl(1, 1, 1, 1)));
  const std::array<double, 1> p{B};
  for (double x : {0.1, 0.5, 1.0, 2.0, 3.7}) CHECK(std::abs(g(x) - reference_g("cubic-poisson", p, x)) <= 1e-9);
}

TEST_CASE("linear absorbing limit is linear") {
  const GLimit g = g_limit(linear_absorbing());
  const std::array<double, 1> ratio{0.5};
  for (double x : {0.0, 0.25, 1.0, 4.0}) {
    CHECK(std::abs(g(x) - x * std::log(2.0)) <= 1e-12);
    CHECK(std::abs(reference_g("linear-absorbing", ratio, x) - x * std::log(2.0)) <= 1e-14);
  }
}

TEST_CASE("derivative sign opposes the flow") {
  const auto net = testing::schlogl(6, 11, 6, 1);
  const GLimit g = g_limit(cubic());
  const double cap = default_search_cap(cubic());
  double g_max_interior = -INFINITY;
  for (int i = 1; i <= 500; ++i) {
    const double x = cap * i / 501.0;
    const double flow = mass_action_rhs(net, testing::conc({x}))[0];
    const double dg = g.derivative(x);
    CAPTURE(x);
    CHECK(dg * flow <= 0.0);
    if (std::min({std::abs(x - 1), std::abs(x - 2), std::abs(x - 3)}) > 1e-3) {
      CHECK((dg > 0) == (flow < 0));
    }
    g_max_interior = std::max(g_max_interior, g(x));
  }
  CHECK(g(cap) > g_max_interior);
}

TEST_CASE("limit needs a stationary distribution") {
  CHECK_THROWS_AS(g_limit(modified(testing::load("no_stationary.crn"))), NoStationaryDistribution);
}

TEST_CASE("reference limits of the non birth-death examples") {
  const std::array<double, 1> a1{1.0};
  SUBCASE("dimerization is convex") {
    for (double x : {0.5, 1.0, 2.0}) CHECK(reference_g_second_derivative("dimerization", a1, x) > 0.0);
    // minimum at the equilibrium of 1 = 2 x^2
    CHECK(std::abs(reference_g_derivative("dimerization", a1, std::sqrt(0.5))) <= 1e-14);
    const double h = 1e-5;
    for (double x : {0.5, 1.7, 3.0}) {
      const double fd = (reference_g("dimerization", a1, x + h) - reference_g("dimerization", a1, x - h)) / (2 * h);
      CHECK(fd == doctest::Approx(reference_g_derivative("dimerization", a1, x)).epsilon(1e-7));
    }
  }
  SUBCASE("pair birth turns at four times a") {
    CHECK(std::abs(reference_g_derivative("pair-birth", a1, 4.0)) <= 1e-14);
    for (double x : {0.5, 1.0, 3.9}) CHECK(reference_g_derivative("pair-birth", a1, x) < 0.0);
    for (double x : {4.1, 6.0, 20.0}) CHECK(reference_g_derivative("pair-birth", a1, x) > 0.0);
    for (double x : {0.5, 4.0, 10.0}) CHECK(reference_g_second_derivative("pair-birth", a1, x) > 0.0);
    CHECK(std::abs(reference_g("pair-birth", a1, 4.0)) <= 1e-9);
    const double h = 1e-5;
    for (double x : {0.7, 2.0, 7.5}) {
      const double fd = (reference_g("pair-birth", a1, x + h) - reference_g("pair-birth", a1, x - h)) / (2 * h);
      CHECK(fd == doctest::Approx(reference_g_derivative("pair-birth", a1, x)).epsilon(1e-6));
    }
  }
  SUBCASE("bad requests") {
    CHECK_THROWS_AS(reference_g("no-such-example", a1, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(reference_g("dimerization", {}, 1.0), std::invalid_argument);
    const std::array<double, 1> neg{-1.0};
    CHECK_THROWS_AS(reference_g("pair-birth", neg, 1.0), std::invalid_argument);
  }
}

TEST_CASE("pair birth distribution by convolution") {
  const double a = 0.5;
  for (double V : {1.0, 10.0}) {
    const auto dist = pair_birth_pi(a, V);
    CHECK(dist.method() == "closed-form");
    CHECK(dist.log_prob_at(state({0})) == doctest::Approx(-3 * V * a).epsilon(1e-14));
    CHECK(dist.log_prob_at(state({1})) == doctest::Approx(-3 * V * a + std::log(2 * V * a)).epsilon(1e-14));
    double s = 0.0;
    for (std::size_t i = 0; i < dist.size(); ++i) s += dist.prob(i);
    CHECK(s == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(dist.tail_mass_bound <= 1e-14);
  }
  const auto d1 = pair_birth_pi(a, 1.0);
  CHECK(testing::tv_to_pmf(d1, testing::pair_convolution(1.0, 0.5, 80)) <= 1e-13);
  CHECK(pair_birth_pi(a, 1.0, 200).size() >= 201);
}
