#include <distsynth/quadrature.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace distsynth;

TEST_CASE("single panel is exact on low-degree polynomials") {
  const auto [v, e] = detail::gauss_kronrod_15([](double x) { return x * x * x; }, 0.0, 1.0);
  CHECK(v == Catch::Approx(0.25).margin(1e-15));
  CHECK(e < 1e-14);
}

TEST_CASE("integrate matches closed forms") {
  CHECK(integrate([](double x) { return x * x; }, 0.0, 1.0) ==
        Catch::Approx(1.0 / 3.0).margin(1e-12));
  CHECK(integrate([](double x) { return std::sin(x); }, 0.0, 1.0) ==
        Catch::Approx(1.0 - std::cos(1.0)).margin(1e-12));
  CHECK(integrate([](double x) { return std::sin(x); }, 0.0, 3.14159265358979323846) ==
        Catch::Approx(2.0).margin(1e-10));
  // Narrow Gaussian bump: sqrt(pi)/10 * erf(5).
  CHECK(integrate([](double x) { return std::exp(-100.0 * (x - 0.5) * (x - 0.5)); }, 0.0, 1.0,
                  1e-12) == Catch::Approx(0.1772453850902791).margin(1e-10));
}

TEST_CASE("integrate handles empty and invalid ranges") {
  CHECK(integrate([](double x) { return x; }, 0.5, 0.5) == 0.0);
  CHECK_THROWS_AS(integrate([](double x) { return x; }, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("integrate reports an unreachable tolerance") {
  CHECK_THROWS_AS(integrate([](double x) { return std::exp(x); }, 0.0, 1.0, 1e-300),
                  std::runtime_error);
}
