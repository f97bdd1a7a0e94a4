#pragma once

#include <distsynth/distributions.hpp>
#include <distsynth/quadrature.hpp>
#include <distsynth/rational.hpp>
#include <distsynth/rng.hpp>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

namespace distsynth {

// F_W is the CDF of W = |X−Y| for independent X, Y on [0,1] with CDF t^alpha:
//   F_W(t) = 2·∫₀¹ h(x)·(H(min(x+t,1)) − H(x)) dx,  H(t) = t^alpha, h = H'.

namespace detail {

inline void require_fw_args(double alpha, double t) {
  if (!(alpha > 0.0 && alpha < 0.5))
    throw std::invalid_argument("F_W: alpha must lie in (0,1/2)");
  if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("F_W: t must lie in [0,1]");
}

}  // namespace detail

// Quadrature evaluator. The substitution u = x^alpha absorbs the x^(alpha-1)
// endpoint singularity of h into du, leaving a bounded smooth integrand:
//   F_W(t) = 2·∫₀^{u*} ((u^{1/alpha}+t)^alpha − u) du + 2(1−u*) − (1−u*²),
// with u* = (1−t)^alpha; the x > 1−t part integrates in closed form.
inline double fw_quadrature(double alpha, double t, double abs_tol = 1e-10) {
  detail::require_fw_args(alpha, t);
  if (t == 0.0) return 0.0;
  if (t == 1.0) return 1.0;
  const double ustar = std::pow(1.0 - t, alpha);
  const double inv_alpha = 1.0 / alpha;
  auto integrand = [=](double u) {
    return std::pow(std::pow(u, inv_alpha) + t, alpha) - u;
  };
  const double head = integrate(integrand, 0.0, ustar, abs_tol / 2.0);
  return 2.0 * head + 2.0 * (1.0 - ustar) - (1.0 - ustar * ustar);
}

struct FwSeriesResult {
  double value;
  bool converged;
  long terms;
};

// Series evaluator via the closed form
//   F_W(t) = 1 + 2(1−t)^alpha·(h2f1(−alpha, 1; 1+alpha; 1−t) − 1),
// where the Gauss series at z = 1−t has term ratio z(k−alpha)/(k+1+alpha).
// The ratio tends to z, so the tail after a term is below |term|·z/(1−z);
// iteration stops once that certified tail drops under 1e−14.
inline FwSeriesResult fw_hypergeometric(double alpha, double t) {
  detail::require_fw_args(alpha, t);
  if (t == 0.0) throw std::invalid_argument("fw_hypergeometric: t must be positive");
  const double z = 1.0 - t;
  if (z == 0.0) return {1.0, true, 0};

  constexpr long kMaxTerms = 1000000;
  const double tail_factor = z / (1.0 - z);
  double term = 1.0;  // k = 0 term of the Gauss series
  double sum = 0.0;   // series minus its leading 1
  long k = 0;
  bool converged = false;
  while (k < kMaxTerms) {
    term *= z * (k - alpha) / (k + 1 + alpha);
    sum += term;
    ++k;
    if (std::fabs(term) * tail_factor < 1e-14) {
      converged = true;
      break;
    }
  }
  return {1.0 + 2.0 * std::pow(z, alpha) * sum, converged, k};
}

// Preferred evaluator: the series everywhere it certifies convergence
// cheaply, quadrature for t near 0 where the series needs too many terms.
inline double fw_eval(double alpha, double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  if (t >= 0.002) {
    const FwSeriesResult r = fw_hypergeometric(alpha, t);
    if (r.converged) return r.value;
  }
  return fw_quadrature(alpha, t);
}

// The transformed continuous space: base points on [0,1] with CDF t^alpha
// under |x−y|, pushed through phi = G⁻¹∘F_W so that phi(|X−Y|) has CDF G.
// alpha = min(1/8, epsilon/8) with epsilon = c/C keeps phi subadditive.
class TransformRecord {
 public:
  explicit TransformRecord(DensitySpec density)
      : density_(std::move(density)),
        epsilon_(density_.epsilon()),
        alpha_(std::min(Rational(1, 8), epsilon_ / 8)),
        alpha_d_(to_double(alpha_)) {}

  const DensitySpec& density() const { return density_; }
  const Rational& epsilon() const { return epsilon_; }
  const Rational& alpha() const { return alpha_; }
  double alpha_value() const { return alpha_d_; }

  // phi(t) = G⁻¹(F_W(t)) on [0,1], extended flat at 1 beyond the base
  // space's diameter (never reached by sampling).
  double phi(double t) const {
    if (t <= 0.0) return 0.0;
    if (t > 1.0) return 1.0;
    return density_.quantile(fw_eval(alpha_d_, t));
  }

  // One draw of W = |X−Y| from the base space.
  double sample_w(Stream& rng) const {
    const double e = 1.0 / alpha_d_;
    const double x = std::pow(rng.next_unit_open(), e);
    const double y = std::pow(rng.next_unit_open(), e);
    return std::fabs(x - y);
  }

  // One draw of phi(W); has CDF G up to evaluator error.
  double sample(Stream& rng) const { return phi(sample_w(rng)); }

 private:
  DensitySpec density_;
  Rational epsilon_;
  Rational alpha_;
  double alpha_d_;
};

inline TransformRecord build_transform(DensitySpec spec) {
  return TransformRecord(std::move(spec));
}

// Serialization of the transform record; rationals as "p/q" strings.
inline nlohmann::json transform_to_json(const TransformRecord& record) {
  nlohmann::json knots = nlohmann::json::array();
  for (const auto& [t, g] : record.density().knots())
    knots.push_back({format_rational(t), format_rational(g)});
  return nlohmann::json{{"kind", "transform"},
                        {"alpha", format_rational(record.alpha())},
                        {"epsilon", format_rational(record.epsilon())},
                        {"density", {{"kind", "piecewise_linear"},
                                     {"knots", knots},
                                     {"c", format_rational(record.density().lower())},
                                     {"C", format_rational(record.density().upper())}}}};
}

// Tabulates f on the uniform grid i/n, i = 0..n.
inline std::vector<std::pair<double, double>> uniform_grid_table(
    const std::function<double(double)>& f, int n) {
  if (n < 1) throw std::invalid_argument("uniform_grid_table: n must be >= 1");
  std::vector<std::pair<double, double>> table;
  table.reserve(n + 1);
  for (int i = 0; i <= n; ++i) {
    const double t = static_cast<double>(i) / n;
    table.emplace_back(t, f(t));
  }
  return table;
}

struct PinchCertificate {
  bool pass;
  double worst_margin;  // min over pairs of (m/M)·f(x) + f(y) − f(x+y)
  double worst_x, worst_y;
  long pairs;
};

// Certifies the pinched subadditivity hypothesis f(x+y) ≤ (m/M)f(x) + f(y)
// on every grid pair x ≤ y with x+y inside the grid. With psi_lo = m and
// psi_hi = M the bounds on Ψ's derivative, a pass implies Ψ∘f is
// subadditive. f_grid must be a uniform grid starting at 0 so sums land on
// grid points exactly.
inline PinchCertificate check_pinched_composition(
    double psi_lo, double psi_hi, const std::vector<std::pair<double, double>>& f_grid,
    double tol = 1e-12) {
  if (!(psi_lo > 0.0) || psi_lo > psi_hi)
    throw std::invalid_argument("check_pinched_composition: need 0 < psi_lo <= psi_hi");
  const std::size_t n = f_grid.size();
  if (n < 2) throw std::invalid_argument("check_pinched_composition: grid too small");
  if (f_grid.front().first != 0.0)
    throw std::invalid_argument("check_pinched_composition: grid must start at 0");
  const double h = f_grid[1].first;
  for (std::size_t i = 0; i < n; ++i)
    if (std::fabs(f_grid[i].first - static_cast<double>(i) * h) > 1e-12)
      throw std::invalid_argument("check_pinched_composition: grid must be uniform");

  const double ratio = psi_lo / psi_hi;
  PinchCertificate cert{true, std::numeric_limits<double>::infinity(), 0.0, 0.0, 0};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; i + j < n; ++j) {
      const double margin = ratio * f_grid[i].second + f_grid[j].second - f_grid[i + j].second;
      ++cert.pairs;
      if (margin < cert.worst_margin) {
        cert.worst_margin = margin;
        cert.worst_x = f_grid[i].first;
        cert.worst_y = f_grid[j].first;
      }
    }
  }
  cert.pass = cert.worst_margin >= -tol;
  return cert;
}

}  // namespace distsynth
