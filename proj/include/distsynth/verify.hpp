#pragma once

#include <distsynth/distributions.hpp>
#include <distsynth/format.hpp>
#include <distsynth/rational.hpp>
#include <distsynth/rng.hpp>
#include <distsynth/selection.hpp>
#include <distsynth/subadditive.hpp>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace distsynth {

struct CheckResult {
  std::string name;
  bool pass = false;
  double worst_margin = 0.0;  // distance to the failure boundary; negative on fail
  long samples = 0;           // 0 for exact checks
  std::uint64_t seed = 0;
  std::string tolerance;
  std::string detail;
};

namespace detail {

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 14695981039346656037ull;
  for (const unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

}  // namespace detail

struct VerificationReport {
  std::string construction_id;
  std::vector<CheckResult> checks;
  bool overall = true;

  void add(CheckResult check) {
    overall = overall && check.pass;
    checks.push_back(std::move(check));
  }

  // Canonical order so reports are byte-stable regardless of check order.
  void finalize() {
    std::sort(checks.begin(), checks.end(),
              [](const CheckResult& a, const CheckResult& b) { return a.name < b.name; });
    overall = true;
    for (const auto& c : checks) overall = overall && c.pass;
  }

  nlohmann::json to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : checks) {
      arr.push_back({{"name", c.name},
                     {"pass", c.pass},
                     {"worst_margin", c.worst_margin},
                     {"samples", c.samples},
                     {"seed", c.seed},
                     {"tolerance", c.tolerance},
                     {"detail", c.detail}});
    }
    return nlohmann::json{
        {"construction_id", construction_id}, {"overall", overall}, {"checks", arr}};
  }

  std::string to_text() const {
    std::string out;
    for (const auto& c : checks) {
      out += c.pass ? "[PASS] " : "[FAIL] ";
      out += c.name;
      out += " margin=" + format_double(c.worst_margin);
      out += " samples=" + std::to_string(c.samples);
      out += " seed=" + std::to_string(c.seed);
      if (!c.tolerance.empty()) out += " tol=" + c.tolerance;
      if (!c.detail.empty()) out += " :: " + c.detail;
      out += "\n";
    }
    out += overall ? "OVERALL: PASS\n" : "OVERALL: FAIL\n";
    return out;
  }
};

inline std::string construction_id_of(const nlohmann::json& construction) {
  return detail::hex64(detail::fnv1a64(construction.dump()));
}

// One-sample Kolmogorov-Smirnov statistic; sorts its input.
inline double ks_statistic(std::vector<double>& samples,
                           const std::function<double(double)>& cdf) {
  if (samples.empty()) throw std::invalid_argument("ks_statistic: no samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max(d, (static_cast<double>(i) + 1.0) / n - f);
    d = std::max(d, f - static_cast<double>(i) / n);
  }
  return d;
}

// Pearson chi-square statistic for observed counts against cell probabilities.
inline double chi_square_statistic(const std::vector<long>& counts,
                                   const std::vector<double>& probs) {
  if (counts.size() != probs.size() || counts.empty())
    throw std::invalid_argument("chi_square_statistic: size mismatch");
  long n = 0;
  for (const long c : counts) n += c;
  double stat = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double expected = probs[i] * static_cast<double>(n);
    if (expected <= 0.0) throw std::invalid_argument("chi_square_statistic: zero cell");
    const double diff = static_cast<double>(counts[i]) - expected;
    stat += diff * diff / expected;
  }
  return stat;
}

// ---------------------------------------------------------------------------
// Exact checks on a constructed selection space.

// Law of d(X,Y) must match the target atom for atom, as exact rationals.
inline CheckResult check_distribution_exact(const SelectionSpace& space,
                                            const DiscreteSpec& target) {
  CheckResult r{"distribution_exact", true, 0.0, 0, 0, "exact", ""};
  std::map<Rational, Rational> got;
  for (const auto& a : exact_distance_distribution(space)) got[a.value] = a.prob;
  std::map<Rational, Rational> want;
  want[Rational(0)] = target.zero_prob();
  for (const auto& a : target.atoms()) want[a.value] = a.prob;

  double worst = 0.0;
  for (const auto& [value, prob] : got) {
    const auto it = want.find(value);
    const Rational expected = it == want.end() ? Rational(0) : it->second;
    if (prob != expected) {
      r.pass = false;
      worst = std::max(worst, std::fabs(to_double(prob - expected)));
      if (r.detail.empty())
        r.detail = "P[d=" + format_rational(value) + "] = " + format_rational(prob) +
                   ", target " + format_rational(expected);
    }
  }
  for (const auto& [value, prob] : want) {
    if (got.count(value) == 0 && !prob.is_zero()) {
      r.pass = false;
      worst = std::max(worst, std::fabs(to_double(prob)));
      if (r.detail.empty())
        r.detail = "target atom " + format_rational(value) + " missing from construction";
    }
  }
  r.worst_margin = r.pass ? 0.0 : -worst;
  return r;
}

// The product and per-atom identities behind the construction, recomputed
// from scratch: the selection probabilities telescope so that
//   prod_i (1-q_i) = P[d=0]   and   suffix_i * q_i * (inner telescope) = theta(atom).
inline CheckResult check_telescoping(const SelectionSpace& space, const DiscreteSpec& target) {
  CheckResult r{"telescoping", true, 0.0, 0, 0, "exact", ""};
  auto fail = [&r](std::string why) {
    r.pass = false;
    if (r.detail.empty()) r.detail = std::move(why);
  };

  std::map<Rational, Rational> want;
  for (const auto& a : target.atoms()) want[a.value] = a.prob;
  std::map<Rational, bool> matched;

  Rational zero_product(1);
  for (const auto& c : space.components()) zero_product *= Rational(1) - c.select_prob;
  if (zero_product != space.zero_prob()) fail("prod(1-q) != stored zero probability");
  if (zero_product != target.zero_prob()) fail("prod(1-q) != target P[d=0]");

  // Walk components from the largest index down, tracking the probability
  // that no larger component has been selected.
  Rational suffix(1);
  const auto& comps = space.components();
  for (auto it = comps.rbegin(); it != comps.rend(); ++it) {
    const Rational mass = it->select_prob * suffix;
    if (std::holds_alternative<BernoulliSpace>(it->space)) {
      const auto& b = std::get<BernoulliSpace>(it->space);
      const auto w = want.find(b.scale);
      if (w == want.end() || w->second != mass)
        fail("component at index " + std::to_string(it->index) + " carries mass " +
             format_rational(mass) + ", target disagrees at value " + format_rational(b.scale));
      else
        matched[b.scale] = true;
    } else {
      const auto inner = std::get<std::shared_ptr<const SelectionSpace>>(it->space);
      Rational inner_zero(1);
      for (const auto& ic : inner->components()) inner_zero *= Rational(1) - ic.select_prob;
      if (inner_zero != Rational(1) - it->select_prob)
        fail("inner prod(1-q) != 1 - select at index " + std::to_string(it->index));
      Rational inner_suffix(1);
      const auto& inner_comps = inner->components();
      for (auto jt = inner_comps.rbegin(); jt != inner_comps.rend(); ++jt) {
        if (!std::holds_alternative<BernoulliSpace>(jt->space)) {
          fail("nested component deeper than one level at index " + std::to_string(it->index));
          break;
        }
        const auto& b = std::get<BernoulliSpace>(jt->space);
        const Rational atom_mass = suffix * jt->select_prob * inner_suffix;
        const auto w = want.find(b.scale);
        if (w == want.end() || w->second != atom_mass)
          fail("atom " + format_rational(b.scale) + " telescopes to " +
               format_rational(atom_mass) + ", target disagrees");
        else
          matched[b.scale] = true;
        inner_suffix *= Rational(1) - jt->select_prob;
      }
    }
    suffix *= Rational(1) - it->select_prob;
  }

  for (const auto& [value, prob] : want) {
    (void)prob;
    if (!matched.count(value)) fail("target atom " + format_rational(value) + " not realized");
  }
  if (!r.pass) r.worst_margin = -1.0;
  return r;
}

// Distance ranges must be compatible with evaluation at the largest differing
// index: within a component max <= 2*min, and across components i < j the
// whole range of i sits below twice the minimum of j.
inline CheckResult check_gap_structure(const SelectionSpace& space) {
  CheckResult r{"gap_structure", true, 0.0, 0, 0, "exact", ""};
  double worst = std::numeric_limits<double>::infinity();
  bool any = false;

  const std::function<void(const SelectionSpace&)> walk = [&](const SelectionSpace& s) {
    std::vector<std::pair<Rational, Rational>> ranges;
    ranges.reserve(s.components().size());
    for (const auto& c : s.components()) {
      ranges.push_back(component_distance_range(c.space));
      if (std::holds_alternative<std::shared_ptr<const SelectionSpace>>(c.space))
        walk(*std::get<std::shared_ptr<const SelectionSpace>>(c.space));
    }
    for (std::size_t i = 0; i < ranges.size(); ++i) {
      any = true;
      const Rational within = 2 * ranges[i].first - ranges[i].second;
      worst = std::min(worst, to_double(within));
      if (within < 0) {
        r.pass = false;
        if (r.detail.empty())
          r.detail = "component range wider than a factor 2: [" +
                     format_rational(ranges[i].first) + ", " +
                     format_rational(ranges[i].second) + "]";
      }
      for (std::size_t j = i + 1; j < ranges.size(); ++j) {
        const Rational across = 2 * ranges[j].first - ranges[i].second;
        worst = std::min(worst, to_double(across));
        if (across < 0) {
          r.pass = false;
          if (r.detail.empty())
            r.detail = "component " + std::to_string(i) + " reaches above twice the minimum of " +
                       std::to_string(j);
        }
      }
    }
  };
  walk(space);
  r.worst_margin = any ? worst : 0.0;
  return r;
}

struct MetricCheckOptions {
  std::size_t max_exhaustive = 200;
  long triples = 100000;
  std::uint64_t seed = 42;
};

// Identity, symmetry and the triangle inequality, with exact arithmetic.
// Small spaces are checked exhaustively over all point triples; larger ones
// over mu-sampled triples.
inline CheckResult check_metric_axioms(const SelectionSpace& space,
                                       const MetricCheckOptions& opts = {}) {
  CheckResult r{"metric_axioms", true, 0.0, 0, 0, "exact", ""};
  double worst = std::numeric_limits<double>::infinity();

  const auto points = enumerate_points(space, opts.max_exhaustive);
  if (points) {
    const std::size_t n = points->size();
    std::vector<std::vector<Rational>> d(n, std::vector<Rational>(n));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j)
        d[i][j] = d[j][i] = selection_distance(space, (*points)[i], (*points)[j]);

    for (std::size_t i = 0; i < n && r.pass; ++i) {
      if (!d[i][i].is_zero()) {
        r.pass = false;
        r.detail = "d(x,x) != 0";
      }
      for (std::size_t j = i + 1; j < n && r.pass; ++j) {
        if (d[i][j].is_zero()) {
          r.pass = false;
          r.detail = "d(x,y) = 0 for distinct points";
        }
        if (selection_distance(space, (*points)[j], (*points)[i]) != d[i][j]) {
          r.pass = false;
          r.detail = "d(x,y) != d(y,x)";
        }
      }
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        for (std::size_t k = j + 1; k < n; ++k) {
          const Rational m1 = d[i][j] + d[j][k] - d[i][k];
          const Rational m2 = d[i][j] + d[i][k] - d[j][k];
          const Rational m3 = d[i][k] + d[j][k] - d[i][j];
          const Rational m = std::min({m1, m2, m3});
          worst = std::min(worst, to_double(m));
          if (m < 0) {
            r.pass = false;
            if (r.detail.empty()) r.detail = "triangle violation on exhaustive triple";
          }
        }
    r.detail = r.pass ? "exhaustive over " + std::to_string(n) + " points" : r.detail;
    r.worst_margin = (n >= 3 && worst != std::numeric_limits<double>::infinity()) ? worst : 0.0;
    return r;
  }

  Stream rng(opts.seed);
  r.samples = opts.triples;
  r.seed = opts.seed;
  for (long t = 0; t < opts.triples; ++t) {
    const SpacePoint x = sample_point(space, rng);
    const SpacePoint y = sample_point(space, rng);
    const SpacePoint z = sample_point(space, rng);
    const Rational dxy = selection_distance(space, x, y);
    const Rational dyz = selection_distance(space, y, z);
    const Rational dxz = selection_distance(space, x, z);
    if ((x == y) != dxy.is_zero()) {
      r.pass = false;
      if (r.detail.empty()) r.detail = "identity of indiscernibles violated";
    }
    if (selection_distance(space, y, x) != dxy) {
      r.pass = false;
      if (r.detail.empty()) r.detail = "d(x,y) != d(y,x)";
    }
    const Rational m = std::min({dxy + dyz - dxz, dxy + dxz - dyz, dxz + dyz - dxy});
    worst = std::min(worst, to_double(m));
    if (m < 0) {
      r.pass = false;
      if (r.detail.empty()) r.detail = "triangle violation on sampled triple " + std::to_string(t);
    }
  }
  r.worst_margin = worst == std::numeric_limits<double>::infinity() ? 0.0 : worst;
  return r;
}

// Triangle inequality for f(|x-y|) over triples drawn from the power-law
// base measure (CDF t^alpha) on [0,1]. Points on a line make the largest
// pairwise gap the exact sum of the other two, so this probes f's
// subadditivity where it is tight. Stops at the first violation.
inline CheckResult check_metric_axioms_transformed(const std::function<double(double)>& f,
                                                   double alpha, long triples,
                                                   std::uint64_t seed, double tol = 1e-12) {
  CheckResult r{"metric_axioms_transformed", true, 0.0, triples, seed, format_double(tol), ""};
  if (std::fabs(f(0.0)) > tol) {
    r.pass = false;
    r.detail = "f(0) != 0";
    r.worst_margin = -std::fabs(f(0.0));
    return r;
  }
  const double e = 1.0 / alpha;
  Stream rng(seed);
  double worst = std::numeric_limits<double>::infinity();
  for (long t = 0; t < triples; ++t) {
    const double x = std::pow(rng.next_unit_open(), e);
    const double y = std::pow(rng.next_unit_open(), e);
    const double z = std::pow(rng.next_unit_open(), e);
    const double fa = f(std::fabs(x - y));
    const double fb = f(std::fabs(y - z));
    const double fc = f(std::fabs(x - z));
    const double m = std::min({fa + fb - fc, fa + fc - fb, fb + fc - fa});
    worst = std::min(worst, m);
    if (m < -tol) {
      r.pass = false;
      r.detail = "triangle violation at x=" + format_double(x) + " y=" + format_double(y) +
                 " z=" + format_double(z);
      r.worst_margin = m;
      r.samples = t + 1;
      return r;
    }
  }
  r.worst_margin = worst == std::numeric_limits<double>::infinity() ? 0.0 : worst;
  return r;
}

// ---------------------------------------------------------------------------
// Statistical checks.

inline std::map<Rational, long> sample_distance_counts(const SelectionSpace& space, long n,
                                                       std::uint64_t seed) {
  std::map<Rational, long> counts;
  Stream rng(seed);
  for (long i = 0; i < n; ++i) ++counts[sample_distance(space, rng)];
  return counts;
}

// Total variation distance between empirical frequencies and a target law.
inline double empirical_tv_discrete(const std::map<Rational, long>& counts,
                                    const DiscreteSpec& target, long n) {
  std::map<Rational, Rational> want;
  want[Rational(0)] = target.zero_prob();
  for (const auto& a : target.atoms()) want[a.value] = a.prob;
  double tv = 0.0;
  for (const auto& [value, count] : counts) {
    const auto it = want.find(value);
    const double p = it == want.end() ? 0.0 : to_double(it->second);
    tv += std::fabs(static_cast<double>(count) / static_cast<double>(n) - p);
  }
  for (const auto& [value, prob] : want)
    if (counts.count(value) == 0) tv += to_double(prob);
  return tv / 2.0;
}

// Every atom's empirical frequency must sit within 4*sqrt(p(1-p)/n) of its
// probability (about a 4-sigma band).
inline CheckResult check_distribution_statistical_discrete(const SelectionSpace& space,
                                                           const DiscreteSpec& target, long n,
                                                           std::uint64_t seed) {
  if (n < 10000)
    throw std::invalid_argument("check_distribution_statistical: n must be >= 10000");
  CheckResult r{"distribution_statistical", true, 0.0, n, seed, "4*sqrt(p(1-p)/n)", ""};
  const auto counts = sample_distance_counts(space, n, seed);

  std::map<Rational, Rational> want;
  want[Rational(0)] = target.zero_prob();
  for (const auto& a : target.atoms()) want[a.value] = a.prob;

  double worst = std::numeric_limits<double>::infinity();
  for (const auto& [value, prob] : want) {
    const double p = to_double(prob);
    const auto it = counts.find(value);
    const double freq =
        it == counts.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(n);
    const double bound = 4.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(n));
    const double margin = bound - std::fabs(freq - p);
    if (margin < worst) {
      worst = margin;
      if (margin < 0) {
        r.pass = false;
        if (r.detail.empty())
          r.detail = "atom " + format_rational(value) + " freq " + format_double(freq) +
                     " vs p " + format_double(p);
      }
    }
  }
  for (const auto& [value, count] : counts) {
    if (want.count(value) == 0) {
      r.pass = false;
      r.detail = "sampled value " + format_rational(value) + " outside target support";
      worst = std::min(worst, -static_cast<double>(count) / static_cast<double>(n));
    }
  }
  r.worst_margin = worst;
  if (r.pass)
    r.detail = "tv=" + format_double(empirical_tv_discrete(counts, target, n));
  return r;
}

// Kolmogorov-Smirnov test of a continuous sampler against a target CDF,
// with the fixed threshold 1.95/sqrt(n) (asymptotic 0.999 level).
inline CheckResult check_distribution_statistical_continuous(
    std::string name, const std::function<double(Stream&)>& sampler,
    const std::function<double(double)>& cdf, long n, std::uint64_t seed) {
  if (n < 10000)
    throw std::invalid_argument("check_distribution_statistical: n must be >= 10000");
  CheckResult r{std::move(name), true, 0.0, n, seed, "ks < 1.95/sqrt(n)", ""};
  std::vector<double> xs;
  xs.reserve(n);
  Stream rng(seed);
  for (long i = 0; i < n; ++i) xs.push_back(sampler(rng));
  const double d = ks_statistic(xs, cdf);
  const double threshold = 1.95 / std::sqrt(static_cast<double>(n));
  r.worst_margin = threshold - d;
  r.pass = d < threshold;
  r.detail = "ks=" + format_double(d) + " threshold=" + format_double(threshold);
  return r;
}

// ---------------------------------------------------------------------------
// Analytic bounds on F_W used by the subadditivity argument; valid for
// alpha <= 1/4 on t in (0, 1/2]:
//   F_W(t) >= t^(2*alpha),  F_W'(t) <= 4*alpha*t^(2*alpha-1),  t*F_W'/F_W <= 4*alpha,
// plus concavity of F_W on [0,1].
inline CheckResult check_fw_bounds(double alpha, int grid_n = 500) {
  if (!(alpha > 0.0 && alpha <= 0.25))
    throw std::invalid_argument("check_fw_bounds: bounds certified only for alpha in (0,1/4]");
  CheckResult r{"fw_bounds", true, 0.0, 0, 0, "1e-6 (derivative), 1e-9 (concavity)", ""};

  std::vector<double> f(grid_n + 1);
  f[0] = 0.0;
  for (int i = 1; i <= grid_n; ++i)
    f[i] = fw_eval(alpha, static_cast<double>(i) / grid_n);

  double worst = std::numeric_limits<double>::infinity();
  auto note = [&r](const std::string& why, double t) {
    r.pass = false;
    if (r.detail.empty()) r.detail = why + " at t=" + format_double(t);
  };

  for (int i = 1; i <= grid_n; ++i) {
    const double t = static_cast<double>(i) / grid_n;
    if (t > 0.5) break;
    const double lower = std::pow(t, 2.0 * alpha);
    const double lb_margin = f[i] - lower;
    worst = std::min(worst, lb_margin);
    if (lb_margin < -1e-9) note("F_W below t^(2a)", t);

    const double h = t / 100.0;
    const double deriv = (fw_eval(alpha, t + h) - fw_eval(alpha, t - h)) / (2.0 * h);
    const double cap = 4.0 * alpha * std::pow(t, 2.0 * alpha - 1.0);
    const double d_margin = cap + 1e-6 - deriv;
    worst = std::min(worst, d_margin);
    if (d_margin < 0) note("F_W' above 4a*t^(2a-1)", t);

    const double ratio_margin = 4.0 * alpha + 1e-6 - t * deriv / f[i];
    worst = std::min(worst, ratio_margin);
    if (ratio_margin < 0) note("t*F_W'/F_W above 4a", t);
  }
  for (int i = 1; i < grid_n; ++i) {
    const double second = f[i + 1] - 2.0 * f[i] + f[i - 1];
    const double c_margin = 1e-9 - second;
    worst = std::min(worst, c_margin);
    if (c_margin < 0) note("convex second difference", static_cast<double>(i) / grid_n);
  }
  r.worst_margin = worst;
  if (r.pass) r.detail = "grid " + std::to_string(grid_n);
  return r;
}

// Negative-control helper: nudges the first selection probability of a flat
// construction by +1/1000000 (keeping the component internally consistent),
// which makes the exact distribution checks fail.
inline SelectionSpace perturb_first_select_prob(const SelectionSpace& space,
                                                const Rational& delta = Rational(1, 1000000)) {
  auto comps = space.components();
  if (comps.empty())
    throw std::invalid_argument("perturb_first_select_prob: empty construction");
  auto& c = comps.front();
  if (!std::holds_alternative<BernoulliSpace>(c.space))
    throw std::invalid_argument("perturb_first_select_prob: requires a flat construction");
  const Rational q = c.select_prob + delta;
  if (!(q > 0 && q < 1))
    throw std::invalid_argument("perturb_first_select_prob: perturbed probability leaves (0,1)");
  c.select_prob = q;
  auto b = std::get<BernoulliSpace>(c.space);
  b.match_prob = Rational(1) - q;
  c.space = b;
  return SelectionSpace(std::move(comps));
}

}  // namespace distsynth
