#pragma once

#include "medshift/data.hpp"
#include "medshift/likelihood.hpp"
#include "medshift/me_adjust.hpp"

namespace medshift {

/// Counterfactual outcome means under a leftward mediator shift xi (log10
/// scale) and under no shift, and their difference.
struct EffectPoint {
  double ey0_shifted = 0.0;
  double ey0 = 0.0;
  double indirect = 0.0;
};

/// E[Y^(0, I=1)]: sum over c of
/// Phi((b0 + b1 (a0 + a1 c - xi) + b2 c) / sqrt(1 + b1^2 sigma_m^2)) P(C = c).
/// xi = 0 gives E[Y^(0)].
double expected_outcome_under_shift(const AdjustedParams& adj, const Alpha& alpha,
                                    const CommonCauseDist& pc, double xi);

/// Same quantity written directly in the observed-scale parameters and the
/// error variance (measurement-error correction folded in).
double expected_outcome_under_shift_star(const StarParams& star, double sigma_u2,
                                         const CommonCauseDist& pc, double xi);

EffectPoint indirect_effect(const AdjustedParams& adj, const Alpha& alpha,
                            const CommonCauseDist& pc, double xi);

/// Pure indirect effect ignoring measurement error: the closed form with
/// beta* and sigma_mstar2 in place of beta and sigma_m2.
EffectPoint indirect_effect_unadjusted(const StarParams& star,
                                       const CommonCauseDist& pc, double xi);

/// Full pipeline from a fit: adjust (unless sigma_u2 == 0) then indirect_effect.
EffectPoint indirect_effect_from_star(const StarParams& star, double sigma_u2,
                                      const CommonCauseDist& pc, double xi);

inline Alpha alpha_of(const StarParams& s) { return {s.alpha0, s.alpha1}; }

}  // namespace medshift
