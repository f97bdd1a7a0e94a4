#pragma once

#include <distsynth/bernoulli.hpp>
#include <distsynth/distributions.hpp>
#include <distsynth/format.hpp>
#include <distsynth/rational.hpp>
#include <distsynth/rng.hpp>

#include <json.hpp>

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <utility>
#include <variant>
#include <vector>

namespace distsynth {

// A point of a selection space: sparse nested coordinates, where an absent
// entry is the component's special (all-zeros) point. Leaf coordinates carry
// a Bernoulli symbol. Canonical sparsity makes equality structural.
struct SpacePoint {
  int symbol = 0;
  std::map<int, SpacePoint> coords;

  bool operator==(const SpacePoint&) const = default;
  bool is_special() const { return symbol == 0 && coords.empty(); }
};

class SelectionSpace;

using ComponentSpace = std::variant<BernoulliSpace, std::shared_ptr<const SelectionSpace>>;

struct SelectionComponent {
  int index;             // coordinate index; the largest differing index decides the distance
  Rational select_prob;  // P[two independent coordinates differ here], exact
  ComponentSpace space;
};

// Bias bookkeeping for spaces built from truncated infinite-support targets.
struct TruncationInfo {
  Rational tv_bias = 0;         // exact TV distance between realized and target distribution
  Rational distance_bound = 0;  // upper bound on the cut distance values
};

// Combinator over component spaces: points are coordinate vectors, distance
// is the component distance at the largest differing coordinate, and the
// measure is the product of component measures.
class SelectionSpace {
 public:
  explicit SelectionSpace(std::vector<SelectionComponent> components,
                          TruncationInfo truncation = {})
      : components_(std::move(components)), truncation_(std::move(truncation)) {
    for (std::size_t i = 0; i < components_.size(); ++i) {
      const auto& c = components_[i];
      if (i > 0 && components_[i - 1].index >= c.index)
        throw SpecError("component indices must be strictly ascending");
      if (c.select_prob <= 0 || c.select_prob >= 1)
        throw SpecError("selection probability must lie in (0,1)");
      if (const auto* b = std::get_if<BernoulliSpace>(&c.space)) {
        if (b->m < 2 || b->scale <= 0 || b->alpha < 0.0 || b->alpha > 1.0)
          throw SpecError("invalid component alphabet");
        if (b->match_prob != 1 - c.select_prob)
          throw SpecError("component match probability disagrees with its selection probability");
      } else {
        const auto& inner = std::get<std::shared_ptr<const SelectionSpace>>(c.space);
        if (!inner) throw SpecError("null nested component");
        if (inner->zero_prob() != 1 - c.select_prob)
          throw SpecError("nested component zero-probability disagrees with its selection probability");
      }
      zero_prob_ *= 1 - c.select_prob;
    }
  }

  const std::vector<SelectionComponent>& components() const { return components_; }

  // P[two independent points coincide] = prod(1 - select_prob).
  const Rational& zero_prob() const { return zero_prob_; }

  const TruncationInfo& truncation() const { return truncation_; }

  const SelectionComponent* find(int index) const {
    auto it = std::lower_bound(
        components_.begin(), components_.end(), index,
        [](const SelectionComponent& c, int n) { return c.index < n; });
    return it != components_.end() && it->index == index ? &*it : nullptr;
  }

 private:
  std::vector<SelectionComponent> components_;
  Rational zero_prob_ = 1;
  TruncationInfo truncation_;
};

// Smallest and largest positive distance realizable inside a component.
inline std::pair<Rational, Rational> component_distance_range(const ComponentSpace& space) {
  if (const auto* b = std::get_if<BernoulliSpace>(&space)) return {b->scale, b->scale};
  const auto& inner = *std::get<std::shared_ptr<const SelectionSpace>>(space);
  std::pair<Rational, Rational> range{0, 0};
  bool first = true;
  for (const auto& c : inner.components()) {
    auto r = component_distance_range(c.space);
    if (first) {
      range = r;
      first = false;
    } else {
      range.first = std::min(range.first, r.first);
      range.second = std::max(range.second, r.second);
    }
  }
  return range;
}

// Builds the space realizing p0·δ₀ + Σ p_k·δ_{a_k} for atoms within a factor
// 2 of each other: q_k = p_k/(p0+…+p_k) telescopes so that prod(1−q_k) = p0
// and each atom's sampling weight is exactly p_k. Atom order is kept.
inline SelectionSpace build_interval_space(const Rational& p0,
                                           const std::vector<DiscreteAtom>& atoms) {
  if (p0 <= 0 || p0 >= 1) throw SpecError("interval construction needs p0 in (0,1)");
  if (atoms.empty()) throw SpecError("interval construction needs at least one atom");
  Rational lo = atoms.front().value;
  Rational hi = atoms.front().value;
  Rational total = p0;
  std::set<Rational> seen;
  for (const auto& a : atoms) {
    if (a.value <= 0) throw SpecError("interval atom values must be positive");
    if (a.prob <= 0) throw SpecError("interval atom probabilities must be positive");
    if (!seen.insert(a.value).second)
      throw SpecError("duplicate atom value: " + format_rational(a.value));
    lo = std::min(lo, a.value);
    hi = std::max(hi, a.value);
    total += a.prob;
  }
  if (hi > 2 * lo)
    throw SpecError("atom " + format_rational(hi) + " outside [a,2a] for a = " +
                    format_rational(lo));
  if (total != 1)
    throw SpecError("probabilities sum to " + format_rational(total) + ", expected 1");

  std::vector<SelectionComponent> components;
  components.reserve(atoms.size());
  Rational cum = p0;
  int index = 1;
  for (const auto& a : atoms) {
    cum += a.prob;
    const Rational q = a.prob / cum;
    auto [m, alpha] = solve_bernoulli_params(1 - q);
    components.push_back({index++, q, BernoulliSpace{m, alpha, a.value, 1 - q}});
  }
  return SelectionSpace(std::move(components));
}

// Builds the full construction for a discrete target: positive atoms are
// grouped by dyadic interval (2^n, 2^(n+1)], group n differs with probability
// β_n = p_n/(1 − Σ_{i>n} p_i), and carries an interval construction for the
// conditional distribution within the group. Lazy targets are truncated to
// TV budget delta first; the bias is recorded on the result.
inline SelectionSpace build_dyadic_space(const DiscreteSpec& spec,
                                         const Rational& delta = Rational(1, 1000000000),
                                         std::size_t max_atoms = 100000) {
  auto tr = spec.truncate(delta, max_atoms);
  const auto& atoms = tr.spec.atoms();
  TruncationInfo info{tr.cut_mass, tr.cut_value_bound};
  if (atoms.empty()) return SelectionSpace({}, std::move(info));

  struct Group {
    int index;
    Rational mass;
    std::vector<DiscreteAtom> atoms;  // ascending by value
  };
  std::vector<Group> groups;
  for (const auto& a : atoms) {
    const int g = dyadic_group(a.value);
    if (groups.empty() || groups.back().index != g) groups.push_back({g, Rational(0), {}});
    groups.back().mass += a.prob;
    groups.back().atoms.push_back(a);
  }

  std::vector<SelectionComponent> components;
  components.reserve(groups.size());
  Rational above = 0;  // total mass in groups with larger indices
  for (auto it = groups.rbegin(); it != groups.rend(); ++it) {
    const Rational beta = it->mass / (1 - above);
    std::vector<DiscreteAtom> conditional;
    conditional.reserve(it->atoms.size());
    for (const auto& a : it->atoms) conditional.push_back({a.value, beta * a.prob / it->mass});
    auto inner = std::make_shared<const SelectionSpace>(
        build_interval_space(1 - beta, conditional));
    components.push_back({it->index, beta, std::move(inner)});
    above += it->mass;
  }
  std::reverse(components.begin(), components.end());
  return SelectionSpace(std::move(components), std::move(info));
}

// The largest top-level coordinate where x and y differ; nullopt when equal.
inline std::optional<int> split_index(const SpacePoint& x, const SpacePoint& y) {
  auto ix = x.coords.rbegin();
  auto iy = y.coords.rbegin();
  while (ix != x.coords.rend() || iy != y.coords.rend()) {
    if (iy == y.coords.rend() || (ix != x.coords.rend() && ix->first > iy->first)) {
      return ix->first;  // x non-special where y is special
    }
    if (ix == x.coords.rend() || iy->first > ix->first) {
      return iy->first;
    }
    if (!(ix->second == iy->second)) return ix->first;
    ++ix;
    ++iy;
  }
  return std::nullopt;
}

// d(x,y): the component distance at the largest differing coordinate, zero
// iff the points are structurally equal.
inline Rational selection_distance(const SelectionSpace& space, const SpacePoint& x,
                                   const SpacePoint& y) {
  const auto n = split_index(x, y);
  if (!n) return 0;
  const SelectionComponent* c = space.find(*n);
  if (!c) throw std::invalid_argument("point has a coordinate outside the construction");
  static const SpacePoint kSpecial{};
  auto coord = [&](const SpacePoint& p) -> const SpacePoint& {
    auto it = p.coords.find(*n);
    return it == p.coords.end() ? kSpecial : it->second;
  };
  const SpacePoint& cx = coord(x);
  const SpacePoint& cy = coord(y);
  if (const auto* b = std::get_if<BernoulliSpace>(&c->space))
    return bernoulli_distance(*b, cx.symbol, cy.symbol);
  return selection_distance(*std::get<std::shared_ptr<const SelectionSpace>>(c->space), cx, cy);
}

// The exact distribution of d(X,Y): P[d=0] = prod of component match
// probabilities, and each component contributes its positive distance
// distribution weighted by the match probabilities of all higher components.
inline std::vector<DiscreteAtom> exact_distance_distribution(const SelectionSpace& space) {
  std::map<Rational, Rational> acc;
  Rational suffix = 1;
  const auto& comps = space.components();
  for (auto it = comps.rbegin(); it != comps.rend(); ++it) {
    if (const auto* b = std::get_if<BernoulliSpace>(&it->space)) {
      acc[b->scale] += suffix * it->select_prob;
    } else {
      const auto& inner = *std::get<std::shared_ptr<const SelectionSpace>>(it->space);
      for (const auto& a : exact_distance_distribution(inner))
        if (a.value > 0) acc[a.value] += suffix * a.prob;
    }
    suffix *= 1 - it->select_prob;
  }
  acc[Rational(0)] += suffix;

  std::vector<DiscreteAtom> out;
  out.reserve(acc.size());
  Rational total = 0;
  for (auto& [v, p] : acc) {
    total += p;
    out.push_back({v, p});
  }
  if (total != 1) throw std::logic_error("distance distribution does not sum to 1");
  return out;
}

// One draw from the product measure: each coordinate sampled independently.
inline SpacePoint sample_point(const SelectionSpace& space, Stream& rng) {
  SpacePoint p;
  for (const auto& c : space.components()) {
    if (const auto* b = std::get_if<BernoulliSpace>(&c.space)) {
      const int s = sample_symbol(*b, rng);
      if (s != 0) p.coords.emplace(c.index, SpacePoint{s, {}});
    } else {
      SpacePoint q = sample_point(*std::get<std::shared_ptr<const SelectionSpace>>(c.space), rng);
      if (!q.is_special()) p.coords.emplace(c.index, std::move(q));
    }
  }
  return p;
}

inline Rational sample_distance(const SelectionSpace& space, Stream& rng) {
  const SpacePoint x = sample_point(space, rng);
  const SpacePoint y = sample_point(space, rng);
  return selection_distance(space, x, y);
}

namespace detail {

inline std::optional<std::vector<SpacePoint>> component_points(const ComponentSpace& space,
                                                               std::size_t cap);

}  // namespace detail

// All points of the space when there are at most cap of them, else nullopt.
inline std::optional<std::vector<SpacePoint>> enumerate_points(const SelectionSpace& space,
                                                               std::size_t cap = 200) {
  std::vector<SpacePoint> points{SpacePoint{}};
  for (const auto& c : space.components()) {
    auto options = detail::component_points(c.space, cap);
    if (!options) return std::nullopt;
    if (points.size() * options->size() > cap) return std::nullopt;
    std::vector<SpacePoint> next;
    next.reserve(points.size() * options->size());
    for (const auto& base : points) {
      for (const auto& opt : *options) {
        SpacePoint p = base;
        if (!opt.is_special()) p.coords.emplace(c.index, opt);
        next.push_back(std::move(p));
      }
    }
    points = std::move(next);
  }
  return points;
}

namespace detail {

inline std::optional<std::vector<SpacePoint>> component_points(const ComponentSpace& space,
                                                               std::size_t cap) {
  if (const auto* b = std::get_if<BernoulliSpace>(&space)) {
    if (static_cast<std::size_t>(b->m) > cap) return std::nullopt;
    std::vector<SpacePoint> pts;
    pts.reserve(b->m);
    for (int s = 0; s < b->m; ++s) pts.push_back(SpacePoint{s, {}});
    return pts;
  }
  return enumerate_points(*std::get<std::shared_ptr<const SelectionSpace>>(space), cap);
}

}  // namespace detail

// Serialization of the construction record; rationals as "p/q" strings.
inline nlohmann::json construction_to_json(const SelectionSpace& space) {
  nlohmann::json j;
  j["kind"] = "selection_space";
  j["zero_prob"] = format_rational(space.zero_prob());
  j["truncation"] = {{"tv_bias", format_rational(space.truncation().tv_bias)},
                     {"distance_bound", format_rational(space.truncation().distance_bound)}};
  j["components"] = nlohmann::json::array();
  for (const auto& c : space.components()) {
    nlohmann::json jc;
    jc["index"] = c.index;
    jc["select_prob"] = format_rational(c.select_prob);
    if (const auto* b = std::get_if<BernoulliSpace>(&c.space)) {
      jc["space"] = {{"kind", "bernoulli"},
                     {"m", b->m},
                     {"alpha", b->alpha},
                     {"scale", format_rational(b->scale)},
                     {"match_prob", format_rational(b->match_prob)}};
    } else {
      jc["space"] =
          construction_to_json(*std::get<std::shared_ptr<const SelectionSpace>>(c.space));
    }
    j["components"].push_back(std::move(jc));
  }
  return j;
}

}  // namespace distsynth
