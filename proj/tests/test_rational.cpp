#include <distsynth/format.hpp>
#include <distsynth/rational.hpp>
#include <distsynth/rng.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>

using namespace distsynth;

TEST_CASE("parse_rational accepts p/q, integers, decimals, exponents") {
  CHECK(parse_rational("7/10") == Rational(7, 10));
  CHECK(parse_rational("3") == Rational(3));
  CHECK(parse_rational("0.35") == Rational(7, 20));
  CHECK(parse_rational("1e-9") == Rational(1, 1000000000));
  CHECK(parse_rational("2.5e3") == Rational(2500));
  CHECK(parse_rational("1.25e-2") == Rational(1, 80));
  CHECK(parse_rational("0.5") == Rational(1, 2));
  CHECK(parse_rational("10/4") == Rational(5, 2));
  CHECK(parse_rational("0") == Rational(0));
  CHECK(parse_rational(".5") == Rational(1, 2));
  CHECK(parse_rational("2.") == Rational(2));
}

TEST_CASE("parse_rational rejects malformed input") {
  CHECK_THROWS_AS(parse_rational(""), SpecError);
  CHECK_THROWS_AS(parse_rational("abc"), SpecError);
  CHECK_THROWS_AS(parse_rational("1/0"), SpecError);
  CHECK_THROWS_AS(parse_rational("-3"), SpecError);
  CHECK_THROWS_AS(parse_rational("1e9999"), SpecError);
  CHECK_THROWS_AS(parse_rational("."), SpecError);
  CHECK_THROWS_AS(parse_rational("1.2.3"), SpecError);
  CHECK_THROWS_AS(parse_rational("1/"), SpecError);
  CHECK_THROWS_AS(parse_rational("/2"), SpecError);
  CHECK_THROWS_AS(parse_rational("1e"), SpecError);
}

TEST_CASE("format_rational emits lowest terms and round-trips") {
  CHECK(format_rational(Rational(1, 2)) == "1/2");
  CHECK(format_rational(Rational(5)) == "5");
  CHECK(format_rational(Rational(10, 4)) == "5/2");
  CHECK(format_rational(Rational(0)) == "0");

  Stream rng(7);
  for (int i = 0; i < 200; ++i) {
    const Rational r(BigInt(rng.next_below(100000)), BigInt(1 + rng.next_below(100000)));
    CHECK(parse_rational(format_rational(r)) == r);
  }
}

TEST_CASE("pow2 covers both signs") {
  CHECK(pow2(3) == Rational(8));
  CHECK(pow2(0) == Rational(1));
  CHECK(pow2(-2) == Rational(1, 4));
}

TEST_CASE("dyadic_group finds n with 2^n < v <= 2^(n+1)") {
  CHECK(dyadic_group(Rational(1)) == -1);
  CHECK(dyadic_group(Rational(3, 2)) == 0);
  CHECK(dyadic_group(Rational(2)) == 0);
  CHECK(dyadic_group(Rational(7, 10)) == -1);
  CHECK(dyadic_group(Rational(3)) == 1);
  CHECK(dyadic_group(Rational(1, 2)) == -2);
  CHECK(dyadic_group(Rational(4)) == 1);
  CHECK(dyadic_group(Rational(3, 1024)) == -9);
  CHECK(dyadic_group(Rational(BigInt(1) << 100)) == 99);
  CHECK(dyadic_group(Rational(1, BigInt(1) << 50)) == -51);
  CHECK_THROWS_AS(dyadic_group(Rational(0)), SpecError);

  Stream rng(11);
  for (int i = 0; i < 200; ++i) {
    const Rational v(BigInt(1 + rng.next_below(1 << 20)), BigInt(1 + rng.next_below(1 << 20)));
    const int n = dyadic_group(v);
    CHECK(pow2(n) < v);
    CHECK(v <= pow2(n + 1));
  }
}

TEST_CASE("format_double round-trips through strtod") {
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(0.25) == "0.25");
  for (const double x : {0.1, 1.0 / 3.0, 1e-9, 0.806644878374436951, 123456.789}) {
    CHECK(std::strtod(format_double(x).c_str(), nullptr) == x);
  }
}
