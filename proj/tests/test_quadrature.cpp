#include "crnlyap/quadrature.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace crnlyap;

TEST_CASE("low-degree polynomials are exact on one segment") {
  const auto r = integrate_adaptive([](double x) { return 3 * x * x - 2 * x + 5; }, -1.0, 2.0, 1e-12);
  CHECK(r.converged);
  CHECK(r.intervals == 1);
  CHECK(r.value == doctest::Approx(9.0 - 3.0 + 15.0).epsilon(1e-15));
}

TEST_CASE("smooth integrands") {
  const auto r = integrate_adaptive([](double x) { return std::exp(-x * x); }, 0.0, 3.0, 1e-13);
  CHECK(std::abs(r.value - 0.5 * std::sqrt(std::numbers::pi) * std::erf(3.0)) < 1e-13);

  const auto osc = integrate_adaptive([](double x) { return std::sin(50 * x); }, 0.0, 1.0, 1e-12);
  CHECK(osc.converged);
  CHECK(std::abs(osc.value - (1 - std::cos(50.0)) / 50) < 1e-12);
  CHECK(osc.intervals > 1);
}

TEST_CASE("integrable endpoint singularities") {
  const auto lg = integrate_adaptive([](double x) { return std::log(x); }, 0.0, 1.0, 1e-10);
  CHECK(lg.converged);
  CHECK(std::abs(lg.value + 1.0) < 1e-10);

  const auto rs = integrate_adaptive([](double x) { return 1 / std::sqrt(x); }, 0.0, 4.0, 1e-9);
  CHECK(rs.converged);
  CHECK(std::abs(rs.value - 4.0) < 1e-9);
}

TEST_CASE("orientation and empty ranges") {
  const auto f = [](double x) { return std::cos(x); };
  const double fwd = integrate_or_throw(f, 0.5, 2.0, 1e-13);
  const double rev = integrate_or_throw(f, 2.0, 0.5, 1e-13);
  CHECK(fwd == -rev);
  CHECK(std::abs(fwd - (std::sin(2.0) - std::sin(0.5))) < 1e-13);
  CHECK(integrate_or_throw(f, 1.0, 1.0, 1e-13) == 0.0);
}

TEST_CASE("relative tolerance") {
  const auto r = integrate_adaptive([](double x) { return 1e8 * std::exp(x); }, 0.0, 1.0, 0.0, 1e-13);
  CHECK(r.converged);
  CHECK(std::abs(r.value / (1e8 * (std::exp(1.0) - 1)) - 1) < 1e-13);
}

TEST_CASE("a divergent integral does not converge") {
  const auto f = [](double x) { return 1 / x; };
  const auto r = integrate_adaptive(f, 0.0, 1.0, 1e-10, 0.0, 200);
  CHECK_FALSE(r.converged);
  CHECK(r.intervals <= 200);
  CHECK_THROWS_AS(integrate_or_throw(f, 0.0, 1.0, 1e-10), QuadratureError);
}
