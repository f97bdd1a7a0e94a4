#include <distsynth/distributions.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <optional>
#include <variant>

using namespace distsynth;

namespace {

DiscreteSpec three_atom_fixture() {
  return DiscreteSpec::finite({{Rational(0), Rational(2, 5)},
                               {Rational(7, 10), Rational(7, 20)},
                               {Rational(3, 2), Rational(1, 4)}});
}

// Atom k >= 1 at value 3/2^k with probability 1/2^k; one atom per dyadic
// group, total mass 1, nothing at 0.
AtomGenerator geometric_generator() {
  return [](std::size_t i) -> std::optional<TailAtom> {
    const int k = static_cast<int>(i) + 1;
    const Rational p(1, BigInt(1) << k);
    return TailAtom{Rational(3, BigInt(1) << k), p, p};
  };
}

}  // namespace

TEST_CASE("finite specs normalize and validate") {
  const DiscreteSpec s = three_atom_fixture();
  CHECK(s.zero_prob() == Rational(2, 5));
  REQUIRE(s.atoms().size() == 2);
  CHECK(s.atoms()[0].value == Rational(7, 10));
  CHECK(s.atoms()[1].value == Rational(3, 2));
  CHECK_FALSE(s.is_lazy());

  // Input order does not matter; atoms come out ascending.
  const DiscreteSpec shuffled = DiscreteSpec::finite({{Rational(3, 2), Rational(1, 4)},
                                                      {Rational(0), Rational(2, 5)},
                                                      {Rational(7, 10), Rational(7, 20)}});
  CHECK(shuffled == s);
}

TEST_CASE("finite spec validation errors") {
  CHECK_THROWS_AS(DiscreteSpec::finite({{Rational(1), Rational(1)}}), SpecError);  // no mass at 0
  CHECK_THROWS_AS(DiscreteSpec::finite({{Rational(0), Rational(1, 2)},
                                        {Rational(1), Rational(1, 4)}}),
                  SpecError);  // sums to 3/4
  CHECK_THROWS_AS(DiscreteSpec::finite({{Rational(0), Rational(1, 2)},
                                        {Rational(1), Rational(1, 4)},
                                        {Rational(1), Rational(1, 4)}}),
                  SpecError);  // duplicate value
  CHECK_THROWS_AS(DiscreteSpec::finite({{Rational(0), Rational(3, 2)},
                                        {Rational(1), Rational(-1, 2)}}),
                  SpecError);  // negative probability
  CHECK_THROWS_AS(DiscreteSpec::finite({{Rational(0), Rational(1, 2)},
                                        {Rational(-1), Rational(1, 2)}}),
                  SpecError);  // negative value
  CHECK(DiscreteSpec::finite({{Rational(0), Rational(1)}}).atoms().empty());  // delta at 0 is fine
}

TEST_CASE("parse_spec reads discrete targets") {
  const std::string text = R"({"type":"discrete","atoms":[["0","2/5"],["0.7","7/20"],["3/2","0.25"]]})";
  const Spec spec = parse_spec(text);
  REQUIRE(std::holds_alternative<DiscreteSpec>(spec));
  CHECK(std::get<DiscreteSpec>(spec) == three_atom_fixture());
}

TEST_CASE("parse_spec rejects malformed documents") {
  CHECK_THROWS_WITH(parse_spec("{nope"), Catch::Matchers::StartsWith("malformed JSON"));
  CHECK_THROWS_AS(parse_spec("[1,2]"), SpecError);
  CHECK_THROWS_AS(parse_spec(R"({"type":"discrete"})"), SpecError);  // missing atoms
  CHECK_THROWS_AS(parse_spec(R"({"type":"discrete","atoms":[["0","1"]],"extra":1})"),
                  SpecError);  // unknown key
  CHECK_THROWS_AS(parse_spec(R"({"type":"wat","atoms":[]})"), SpecError);
  CHECK_THROWS_AS(parse_spec(R"({"type":"discrete","atoms":[[0,1]]})"),
                  SpecError);  // numbers must be strings
  CHECK_THROWS_AS(
      parse_spec(R"({"type":"discrete","atoms":[["3/2","1/4"],["0","3/4"]]})"),
      SpecError);  // not ascending
  CHECK_THROWS_AS(parse_spec(R"({"type":"discrete","atoms":[["0","1/2"],["1","1/4"]]})"),
                  SpecError);  // mass not 1
}

TEST_CASE("parse_spec reads density targets") {
  const std::string text =
      R"({"type":"density","knots":[["0","3/4"],["1","5/4"]],"c":"7/10","C":"13/10"})";
  const Spec spec = parse_spec(text);
  REQUIRE(std::holds_alternative<DensitySpec>(spec));
  const auto& d = std::get<DensitySpec>(spec);
  CHECK(d.lower() == Rational(7, 10));
  CHECK(d.upper() == Rational(13, 10));
  CHECK(d.epsilon() == Rational(7, 13));
}

TEST_CASE("density validation errors") {
  using Knots = std::vector<std::pair<Rational, Rational>>;
  const Knots linear{{Rational(0), Rational(3, 4)}, {Rational(1), Rational(5, 4)}};
  CHECK_NOTHROW(DensitySpec(linear, Rational(7, 10), Rational(13, 10)));

  CHECK_THROWS_AS(DensitySpec(Knots{{Rational(0), Rational(1)}}, Rational(1, 2), Rational(2)),
                  SpecError);  // one knot
  CHECK_THROWS_AS(DensitySpec(Knots{{Rational(1, 4), Rational(1)}, {Rational(1), Rational(1)}},
                              Rational(1, 2), Rational(2)),
                  SpecError);  // does not start at 0
  CHECK_THROWS_AS(DensitySpec(linear, Rational(3, 4), Rational(13, 10)),
                  SpecError);  // g(0) == c violates strictness
  CHECK_THROWS_AS(DensitySpec(linear, Rational(7, 10), Rational(5, 4)),
                  SpecError);  // g(1) == C violates strictness
  CHECK_THROWS_AS(DensitySpec(linear, Rational(13, 10), Rational(7, 10)), SpecError);  // c >= C
  CHECK_THROWS_AS(DensitySpec(linear, Rational(0), Rational(13, 10)), SpecError);      // c = 0
  CHECK_THROWS_AS(
      DensitySpec(Knots{{Rational(0), Rational(1, 2)}, {Rational(1), Rational(3, 4)}},
                  Rational(1, 4), Rational(1)),
      SpecError);  // integral 5/8 != 1
  CHECK_THROWS_AS(
      DensitySpec(Knots{{Rational(0), Rational(1)}, {Rational(1, 2), Rational(1)},
                        {Rational(1, 2), Rational(1)}, {Rational(1), Rational(1)}},
                  Rational(1, 2), Rational(2)),
      SpecError);  // knots not strictly increasing
}

TEST_CASE("density cdf and quantile invert each other") {
  const DensitySpec d({{Rational(0), Rational(3, 4)}, {Rational(1), Rational(5, 4)}},
                      Rational(7, 10), Rational(13, 10));
  CHECK(d.cdf_exact(Rational(1, 2)) == Rational(7, 16));
  CHECK(d.cdf_exact(Rational(0)) == Rational(0));
  CHECK(d.cdf_exact(Rational(1)) == Rational(1));
  CHECK(d.cdf(0.5) == Catch::Approx(0.4375).margin(1e-15));

  for (int i = 0; i <= 100; ++i) {
    const double u = i / 100.0;
    CHECK(d.cdf(d.quantile(u)) == Catch::Approx(u).margin(1e-12));
  }
  CHECK(d.quantile(0.0) == 0.0);
  CHECK(d.quantile(1.0) == 1.0);
  CHECK_THROWS_AS(d.cdf(1.5), std::invalid_argument);
  CHECK_THROWS_AS(d.quantile(-0.1), std::invalid_argument);

  // Difference quotients of the quantile stay within the declared slope band.
  for (int i = 1; i < 99; ++i) {
    const double u = i / 100.0;
    const double slope = (d.quantile(u + 0.005) - d.quantile(u)) / 0.005;
    CHECK(slope > 10.0 / 13.0 - 1e-6);
    CHECK(slope < 10.0 / 7.0 + 1e-6);
  }

  // Piecewise with a negative slope segment, still exact.
  const DensitySpec tent({{Rational(0), Rational(1, 2)},
                          {Rational(1, 2), Rational(3, 2)},
                          {Rational(1), Rational(1, 2)}},
                         Rational(1, 4), Rational(2));
  CHECK(tent.cdf_exact(Rational(1, 2)) == Rational(1, 2));
  for (int i = 0; i <= 50; ++i) {
    const double u = i / 50.0;
    CHECK(tent.cdf(tent.quantile(u)) == Catch::Approx(u).margin(1e-12));
  }
}

TEST_CASE("lazy specs truncate with exact cut accounting") {
  const DiscreteSpec lazy = DiscreteSpec::lazy(Rational(0), geometric_generator());
  CHECK(lazy.is_lazy());
  CHECK_THROWS_AS(lazy.atoms(), std::logic_error);

  const auto t3 = lazy.truncate(Rational(1, 1000));
  CHECK(t3.spec.atoms().size() == 10);
  CHECK(t3.cut_mass == Rational(1, 1024));
  CHECK(t3.spec.zero_prob() == Rational(1, 1024));
  CHECK(t3.cut_value_bound == Rational(1, 256));  // last kept atom 3/1024, group -9

  const auto t6 = lazy.truncate(Rational(1, 1000000));
  CHECK(t6.spec.atoms().size() == 20);
  CHECK(t6.cut_mass == Rational(1, BigInt(1) << 20));

  const auto t9 = lazy.truncate(Rational(1, 1000000000));
  CHECK(t9.spec.atoms().size() == 30);
  CHECK(t9.cut_mass == Rational(1, BigInt(1) << 30));

  CHECK(t3.cut_mass > t6.cut_mass);
  CHECK(t6.cut_mass > t9.cut_mass);

  // Finite specs truncate to themselves.
  const DiscreteSpec fin = DiscreteSpec::finite({{Rational(0), Rational(1)}});
  const auto id = fin.truncate(Rational(1, 1000));
  CHECK(id.spec == fin);
  CHECK(id.cut_mass == Rational(0));
}

TEST_CASE("lazy truncation rejects broken generators") {
  // Exhausts after one atom of mass 1/2: sums to 1/2, not 1.
  const DiscreteSpec short_gen = DiscreteSpec::lazy(
      Rational(0), [](std::size_t i) -> std::optional<TailAtom> {
        if (i > 0) return std::nullopt;
        return TailAtom{Rational(1), Rational(1, 2), Rational(1, 2)};
      });
  CHECK_THROWS_WITH(short_gen.truncate(Rational(1, 100)),
                    Catch::Matchers::StartsWith("generator exhausted"));

  // Group order increasing: 3/4 (group -1) then 3/2 (group 0).
  const DiscreteSpec bad_order = DiscreteSpec::lazy(
      Rational(0), [](std::size_t i) -> std::optional<TailAtom> {
        if (i == 0) return TailAtom{Rational(3, 4), Rational(1, 2), Rational(1, 2)};
        return TailAtom{Rational(3, 2), Rational(1, 2), Rational(0)};
      });
  CHECK_THROWS_AS(bad_order.truncate(Rational(1, 100)), SpecError);

  // Probability overshoot.
  const DiscreteSpec overshoot = DiscreteSpec::lazy(
      Rational(1, 2), [](std::size_t) -> std::optional<TailAtom> {
        return TailAtom{Rational(1), Rational(3, 4), Rational(0)};
      });
  CHECK_THROWS_AS(overshoot.truncate(Rational(1, 100)), SpecError);

  // Atom budget too small to certify the tail.
  const DiscreteSpec slow = DiscreteSpec::lazy(Rational(0), geometric_generator());
  CHECK_THROWS_WITH(slow.truncate(Rational(1, 1000000), 5),
                    Catch::Matchers::StartsWith("cannot certify tail"));

  CHECK_THROWS_AS(lazy.truncate(Rational(0)), SpecError);
  CHECK_THROWS_AS(lazy.truncate(Rational(2)), SpecError);
}
