#include "medshift/effects.hpp"

#include <cmath>
#include <string>

#include "medshift/dist.hpp"
#include "medshift/error.hpp"

namespace medshift {
namespace {

void check_shift(double xi) {
  if (!std::isfinite(xi)) {
    throw Error(ErrorCode::invalid_argument, "shift must be finite");
  }
}

}  // namespace

double expected_outcome_under_shift(const AdjustedParams& adj, const Alpha& alpha,
                                    const CommonCauseDist& pc, double xi) {
  check_shift(xi);
  const double scale = std::sqrt(1.0 + adj.beta1 * adj.beta1 * adj.sigma_m2);
  double total = 0.0;
  for (int c = 0; c <= 1; ++c) {
    if (pc.p[c] == 0.0) continue;
    const double lin =
        adj.beta0 + adj.beta1 * (alpha[0] + alpha[1] * c - xi) + adj.beta2 * c;
    total += std_normal_cdf(lin / scale) * pc.p[c];
  }
  return total;
}

double expected_outcome_under_shift_star(const StarParams& star, double sigma_u2,
                                         const CommonCauseDist& pc, double xi) {
  check_shift(xi);
  const double lambda = reliability(star.sigma_mstar2, sigma_u2);
  const double b1 = star.beta1_star;
  const double denom = lambda * std::sqrt(1.0 + b1 * b1 * star.sigma_mstar2);
  double total = 0.0;
  for (int c = 0; c <= 1; ++c) {
    if (pc.p[c] == 0.0) continue;
    const double num = star.beta0_star * lambda +
                       b1 * (lambda * star.alpha0 + lambda * star.alpha1 * c - xi) +
                       star.beta2_star * lambda * c;
    total += std_normal_cdf(num / denom) * pc.p[c];
  }
  return total;
}

EffectPoint indirect_effect(const AdjustedParams& adj, const Alpha& alpha,
                            const CommonCauseDist& pc, double xi) {
  EffectPoint e;
  e.ey0_shifted = expected_outcome_under_shift(adj, alpha, pc, xi);
  e.ey0 = expected_outcome_under_shift(adj, alpha, pc, 0.0);
  e.indirect = e.ey0_shifted - e.ey0;
  return e;
}

EffectPoint indirect_effect_unadjusted(const StarParams& star,
                                       const CommonCauseDist& pc, double xi) {
  if (!(star.sigma_mstar2 > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "sigma_mstar2 must be > 0");
  }
  AdjustedParams as_is;
  as_is.beta0 = star.beta0_star;
  as_is.beta1 = star.beta1_star;
  as_is.beta2 = star.beta2_star;
  as_is.sigma_m2 = star.sigma_mstar2;
  as_is.lambda = 1.0;
  return indirect_effect(as_is, alpha_of(star), pc, xi);
}

EffectPoint indirect_effect_from_star(const StarParams& star, double sigma_u2,
                                      const CommonCauseDist& pc, double xi) {
  if (sigma_u2 == 0.0) return indirect_effect_unadjusted(star, pc, xi);
  return indirect_effect(adjust(star, sigma_u2), alpha_of(star), pc, xi);
}

}  // namespace medshift
