#pragma once

#include <distsynth/rational.hpp>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace distsynth {

struct DiscreteAtom {
  Rational value;
  Rational prob;
  bool operator==(const DiscreteAtom&) const = default;
};

// One atom from a lazily enumerated spec. tail_bound is the generator's
// certified upper bound on the total mass of all atoms after this one.
struct TailAtom {
  Rational value;
  Rational prob;
  Rational tail_bound;
};

// Enumerates atoms at positions 0,1,2,... in nonincreasing dyadic-group
// order; returns nullopt when exhausted. Probabilities plus the mass at 0
// must sum to exactly 1 over the full enumeration.
using AtomGenerator = std::function<std::optional<TailAtom>(std::size_t)>;

// A target discrete distribution: mass at 0 plus positive atoms. Finite
// specs hold their atoms sorted ascending by value; lazy specs hold a
// generator and must be truncated before use.
class DiscreteSpec {
 public:
  struct Truncation {
    DiscreteSpec spec;          // finite spec: materialized atoms, cut mass moved to 0
    Rational cut_mass;          // exact total-variation distance to the original target
    Rational cut_value_bound;   // upper bound on the distance values that were cut
  };

  static DiscreteSpec finite(std::vector<DiscreteAtom> atoms) {
    Rational zero = 0;
    std::vector<DiscreteAtom> positive;
    positive.reserve(atoms.size());
    bool saw_zero = false;
    for (auto& a : atoms) {
      if (a.value < 0) throw SpecError("negative atom value: " + format_rational(a.value));
      if (a.value == 0) {
        if (saw_zero) throw SpecError("duplicate atom value: 0");
        saw_zero = true;
        if (a.prob < 0) throw SpecError("negative probability at 0");
        zero = a.prob;
        continue;
      }
      if (a.prob <= 0)
        throw SpecError("atom probability must be positive at value " + format_rational(a.value));
      positive.push_back(std::move(a));
    }
    if (zero == 0) throw SpecError("0 not in support closure (finite spec needs positive mass at 0)");
    std::sort(positive.begin(), positive.end(),
              [](const DiscreteAtom& x, const DiscreteAtom& y) { return x.value < y.value; });
    for (std::size_t i = 1; i < positive.size(); ++i)
      if (positive[i - 1].value == positive[i].value)
        throw SpecError("duplicate atom value: " + format_rational(positive[i].value));
    Rational sum = zero;
    for (const auto& a : positive) sum += a.prob;
    if (sum != 1)
      throw SpecError("probabilities sum to " + format_rational(sum) + ", expected 1");
    DiscreteSpec s;
    s.zero_prob_ = std::move(zero);
    s.atoms_ = std::move(positive);
    return s;
  }

  static DiscreteSpec lazy(Rational zero_prob, AtomGenerator gen) {
    if (zero_prob < 0 || zero_prob >= 1)
      throw SpecError("lazy spec mass at 0 must lie in [0,1)");
    if (!gen) throw SpecError("lazy spec requires a generator");
    DiscreteSpec s;
    s.zero_prob_ = std::move(zero_prob);
    s.gen_ = std::move(gen);
    return s;
  }

  bool is_lazy() const { return static_cast<bool>(gen_); }
  const Rational& zero_prob() const { return zero_prob_; }

  // Positive atoms ascending by value. Finite specs only.
  const std::vector<DiscreteAtom>& atoms() const {
    if (is_lazy()) throw std::logic_error("atoms(): lazy spec must be truncated first");
    return atoms_;
  }

  bool operator==(const DiscreteSpec& o) const {
    if (is_lazy() || o.is_lazy()) return false;
    return zero_prob_ == o.zero_prob_ && atoms_ == o.atoms_;
  }

  // Materializes atoms until the exact unaccounted mass drops to delta or
  // less, then moves that mass to the atom at 0. The result's distance
  // distribution is within total variation delta of this spec's.
  Truncation truncate(const Rational& delta, std::size_t max_atoms = 100000) const {
    if (!is_lazy()) return {*this, Rational(0), Rational(0)};
    if (delta <= 0 || delta >= 1) throw SpecError("truncation budget must lie in (0,1)");

    std::vector<DiscreteAtom> out;
    std::set<Rational> seen;
    Rational remaining = 1 - zero_prob_;
    int last_group = 0;
    bool have_group = false;
    std::size_t i = 0;
    while (remaining > delta) {
      if (i >= max_atoms)
        throw SpecError("cannot certify tail <= " + format_rational(delta) +
                        " within the atom budget");
      auto a = gen_(i++);
      if (!a) {
        // Exhausted with mass unaccounted for: the lazy contract is broken.
        throw SpecError("generator exhausted; probabilities sum to " +
                        format_rational(1 - remaining) + ", expected 1");
      }
      if (a->value <= 0) throw SpecError("lazy atom value must be positive");
      if (a->prob <= 0) throw SpecError("lazy atom probability must be positive");
      if (a->prob > remaining)
        throw SpecError("probabilities sum to more than 1 at atom " +
                        format_rational(a->value));
      if (a->tail_bound < 0) throw SpecError("negative tail bound");
      const int g = dyadic_group(a->value);
      if (have_group && g > last_group)
        throw SpecError("lazy atoms not in decreasing dyadic-group order");
      last_group = g;
      have_group = true;
      if (!seen.insert(a->value).second)
        throw SpecError("duplicate atom value: " + format_rational(a->value));
      out.push_back({a->value, a->prob});
      remaining -= a->prob;
    }

    Rational bound = 0;
    if (remaining > 0) {
      if (have_group) {
        bound = pow2(last_group + 1);
      } else if (auto first = gen_(0)) {
        bound = pow2(dyadic_group(first->value) + 1);
      }
    }
    std::sort(out.begin(), out.end(),
              [](const DiscreteAtom& x, const DiscreteAtom& y) { return x.value < y.value; });
    DiscreteSpec s;
    s.zero_prob_ = zero_prob_ + remaining;
    s.atoms_ = std::move(out);
    if (s.zero_prob_ == 0)
      throw SpecError("0 not in support closure (finite spec needs positive mass at 0)");
    return {std::move(s), std::move(remaining), std::move(bound)};
  }

 private:
  DiscreteSpec() = default;
  Rational zero_prob_ = 0;
  std::vector<DiscreteAtom> atoms_;
  AtomGenerator gen_;
};

// A target density on [0,1]: piecewise linear between rational knots, with
// declared bounds 0 < c < g < C. The CDF is piecewise quadratic and exact.
class DensitySpec {
 public:
  DensitySpec(std::vector<std::pair<Rational, Rational>> knots, Rational c, Rational C)
      : knots_(std::move(knots)), c_(std::move(c)), C_(std::move(C)) {
    if (knots_.size() < 2) throw SpecError("density needs at least two knots");
    if (knots_.front().first != 0 || knots_.back().first != 1)
      throw SpecError("density knots must cover [0,1] with t=0 and t=1 present");
    if (c_ <= 0) throw SpecError("density lower bound c must be positive");
    if (c_ >= C_) throw SpecError("density bounds must satisfy c < C");
    Rational integral = 0;
    for (std::size_t i = 0; i < knots_.size(); ++i) {
      const auto& [t, g] = knots_[i];
      if (g <= c_ || g >= C_)
        throw SpecError("density bound violation: g(" + format_rational(t) + ") = " +
                        format_rational(g) + " not inside (c,C)");
      if (i > 0) {
        const auto& [t0, g0] = knots_[i - 1];
        if (t <= t0) throw SpecError("density knots must be strictly increasing in t");
        integral += (t - t0) * (g0 + g) / 2;
      }
    }
    if (integral != 1)
      throw SpecError("density integrates to " + format_rational(integral) + ", expected 1");

    cdf_.assign(knots_.size(), Rational(0));
    for (std::size_t i = 1; i < knots_.size(); ++i) {
      const auto& [t0, g0] = knots_[i - 1];
      const auto& [t1, g1] = knots_[i];
      cdf_[i] = cdf_[i - 1] + (t1 - t0) * (g0 + g1) / 2;
    }
    t_d_.reserve(knots_.size());
    g_d_.reserve(knots_.size());
    cdf_d_.reserve(knots_.size());
    for (std::size_t i = 0; i < knots_.size(); ++i) {
      t_d_.push_back(to_double(knots_[i].first));
      g_d_.push_back(to_double(knots_[i].second));
      cdf_d_.push_back(to_double(cdf_[i]));
    }
  }

  const std::vector<std::pair<Rational, Rational>>& knots() const { return knots_; }
  const Rational& lower() const { return c_; }
  const Rational& upper() const { return C_; }
  Rational epsilon() const { return c_ / C_; }

  // G(t) as an exact rational, for rational t in [0,1].
  Rational cdf_exact(const Rational& t) const {
    if (t < 0 || t > 1) throw std::invalid_argument("cdf: t outside [0,1]");
    std::size_t i = 1;
    while (i + 1 < knots_.size() && knots_[i].first < t) ++i;
    const auto& [t0, g0] = knots_[i - 1];
    const auto& [t1, g1] = knots_[i];
    const Rational dt = t - t0;
    const Rational slope = (g1 - g0) / (t1 - t0);
    return cdf_[i - 1] + g0 * dt + slope * dt * dt / 2;
  }

  double cdf(double t) const {
    if (t < 0.0 || t > 1.0) throw std::invalid_argument("cdf: t outside [0,1]");
    std::size_t i = piece_by_t(t);
    const double dt = t - t_d_[i - 1];
    const double slope = (g_d_[i] - g_d_[i - 1]) / (t_d_[i] - t_d_[i - 1]);
    return cdf_d_[i - 1] + g_d_[i - 1] * dt + 0.5 * slope * dt * dt;
  }

  // G^{-1}(u) by closed-form inversion of the quadratic piece containing u.
  double quantile(double u) const {
    if (u < 0.0 || u > 1.0) throw std::invalid_argument("quantile: u outside [0,1]");
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    std::size_t i = 1;
    while (i + 1 < cdf_d_.size() && cdf_d_[i] < u) ++i;
    const double du = u - cdf_d_[i - 1];
    const double g0 = g_d_[i - 1];
    const double slope = (g_d_[i] - g0) / (t_d_[i] - t_d_[i - 1]);
    // Root of slope/2·x² + g0·x = du with the sign that is stable for
    // slope of either sign (and exact for slope = 0): x = 2du/(g0 + g(t)).
    const double x = 2.0 * du / (g0 + std::sqrt(g0 * g0 + 2.0 * slope * du));
    const double t = t_d_[i - 1] + x;
    return std::min(std::max(t, 0.0), 1.0);
  }

 private:
  std::size_t piece_by_t(double t) const {
    std::size_t i = 1;
    while (i + 1 < t_d_.size() && t_d_[i] < t) ++i;
    return i;
  }

  std::vector<std::pair<Rational, Rational>> knots_;
  Rational c_, C_;
  std::vector<Rational> cdf_;
  std::vector<double> t_d_, g_d_, cdf_d_;
};

using Spec = std::variant<DiscreteSpec, DensitySpec>;

namespace detail {

inline Rational parse_json_rational(const nlohmann::json& v, const char* what) {
  if (!v.is_string())
    throw SpecError(std::string(what) + " must be a decimal or \"p/q\" string");
  return parse_rational(v.get<std::string>());
}

inline void reject_unknown_keys(const nlohmann::json& j,
                                std::initializer_list<const char*> allowed) {
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* k : allowed)
      if (item.key() == k) ok = true;
    if (!ok) throw SpecError("unknown key: \"" + item.key() + "\"");
  }
  for (const char* k : allowed)
    if (!j.contains(k)) throw SpecError(std::string("missing key: \"") + k + "\"");
}

}  // namespace detail

// Parses and validates the external JSON spec format. Throws SpecError on
// malformed documents, unknown keys, or any invariant violation.
inline Spec parse_spec(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw SpecError(std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw SpecError("spec must be a JSON object");
  if (!j.contains("type") || !j["type"].is_string())
    throw SpecError("spec needs a \"type\" string");
  const std::string type = j["type"].get<std::string>();

  if (type == "discrete") {
    detail::reject_unknown_keys(j, {"type", "atoms"});
    const auto& atoms = j["atoms"];
    if (!atoms.is_array() || atoms.empty())
      throw SpecError("\"atoms\" must be a non-empty array");
    std::vector<DiscreteAtom> parsed;
    parsed.reserve(atoms.size());
    for (const auto& entry : atoms) {
      if (!entry.is_array() || entry.size() != 2)
        throw SpecError("each atom must be a [value, prob] pair");
      parsed.push_back({detail::parse_json_rational(entry[0], "atom value"),
                        detail::parse_json_rational(entry[1], "atom probability")});
    }
    for (std::size_t i = 1; i < parsed.size(); ++i)
      if (parsed[i].value <= parsed[i - 1].value)
        throw SpecError("atoms must be sorted ascending by value");
    return DiscreteSpec::finite(std::move(parsed));
  }
  if (type == "density") {
    detail::reject_unknown_keys(j, {"type", "knots", "c", "C"});
    const auto& knots = j["knots"];
    if (!knots.is_array() || knots.size() < 2)
      throw SpecError("\"knots\" must be an array of at least two [t, g] pairs");
    std::vector<std::pair<Rational, Rational>> parsed;
    parsed.reserve(knots.size());
    for (const auto& entry : knots) {
      if (!entry.is_array() || entry.size() != 2)
        throw SpecError("each knot must be a [t, g] pair");
      parsed.emplace_back(detail::parse_json_rational(entry[0], "knot position"),
                          detail::parse_json_rational(entry[1], "knot density"));
    }
    return DensitySpec(std::move(parsed), detail::parse_json_rational(j["c"], "bound c"),
                       detail::parse_json_rational(j["C"], "bound C"));
  }
  throw SpecError("unknown spec type: \"" + type + "\"");
}

}  // namespace distsynth
