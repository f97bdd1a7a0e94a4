#pragma once

#include <distsynth/rational.hpp>
#include <distsynth/rng.hpp>

#include <cmath>
#include <stdexcept>
#include <utility>

namespace distsynth {

// Finite space realizing the two-point distance distribution
// p·δ₀ + (1−p)·δ_a: symbols {0,…,m−1} under the discrete metric scaled by a,
// measured so that two independent samples coincide with probability p.
struct BernoulliSpace {
  int m;                // alphabet size, ≥ 2
  double alpha;         // measure of symbol 0; symbols 1,…,m−1 share the rest uniformly
  Rational scale;       // distance between distinct symbols
  Rational match_prob;  // target p = P[two independent symbols coincide], exact
};

// P[X = Y] for independent symbols X, Y: symbol 0 matches with probability
// alpha², and each of the m−1 other symbols with ((1−alpha)/(m−1))².
inline double bernoulli_equal_prob(int m, double alpha) {
  const double rest = 1.0 - alpha;
  return alpha * alpha + rest * rest / (m - 1);
}

// Finds the smallest alphabet m ≥ 2 whose match probability can reach p,
// and the root alpha ∈ [p,1] of equal_prob(m, alpha) = p. The minimum of
// the match probability over alpha is 1/m, so m is minimal iff m ≥ 1/p,
// tested exactly as m−1 ≥ (1−p)/p. The quadratic
//   m·α² − 2α + 1 − p(m−1) = 0
// has discriminant/4 = (m−1)(mp−1) ≥ 0 by that choice; the larger root
// lands in [p,1] and is polished by Newton steps to |equal_prob − p| ≤ 1e−14.
inline std::pair<int, double> solve_bernoulli_params(const Rational& p) {
  if (p <= 0 || p >= 1) throw std::invalid_argument("solve_bernoulli_params: p must lie in (0,1)");
  // Smallest m ≥ 2 with (m−1) ≥ (1−p)/p, i.e. m = max(2, ceil(1/p)).
  const BigInt num = numer(p);
  const BigInt den = denom(p);
  BigInt m_big = (den + num - 1) / num;
  if (m_big < 2) m_big = 2;
  if (m_big > (BigInt(1) << 30)) throw std::invalid_argument("solve_bernoulli_params: p too small");
  const int m = m_big.template convert_to<int>();

  const Rational disc4 = Rational(m - 1) * (Rational(m) * p - 1);
  const double pd = to_double(p);
  double alpha = (1.0 + std::sqrt(to_double(disc4))) / m;
  // equal_prob is convex in alpha with positive slope at the larger root,
  // so Newton from it converges monotonically.
  for (int it = 0; it < 64; ++it) {
    const double f = bernoulli_equal_prob(m, alpha) - pd;
    if (std::fabs(f) <= 1e-15) break;
    const double df = 2.0 * alpha - 2.0 * (1.0 - alpha) / (m - 1);
    if (df <= 0.0) break;
    alpha -= f / df;
  }
  if (alpha > 1.0) alpha = 1.0;
  if (alpha < pd) alpha = pd;
  if (std::fabs(bernoulli_equal_prob(m, alpha) - pd) > 1e-14)
    throw std::runtime_error("solve_bernoulli_params: residual above 1e-14");
  return {m, alpha};
}

// Symbol 0 with probability alpha, otherwise uniform over {1,…,m−1}.
inline int sample_symbol(const BernoulliSpace& space, Stream& rng) {
  if (rng.next_unit() < space.alpha) return 0;
  return 1 + static_cast<int>(rng.next_below(static_cast<uint64_t>(space.m - 1)));
}

inline Rational bernoulli_distance(const BernoulliSpace& space, int x, int y) {
  if (x < 0 || x >= space.m || y < 0 || y >= space.m)
    throw std::out_of_range("bernoulli_distance: symbol out of range");
  return x == y ? Rational(0) : space.scale;
}

}  // namespace distsynth
