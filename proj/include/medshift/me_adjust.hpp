#pragma once

#include <array>

#include "medshift/likelihood.hpp"

namespace medshift {

/// Coefficients of the outcome model on the true (error-free) mediator,
/// together with the true-mediator variance and the reliability ratio.
struct AdjustedParams {
  double beta0 = 0.0;
  double beta1 = 0.0;
  double beta2 = 0.0;
  double sigma_m2 = 1.0;
  double lambda = 1.0;
};

using Beta = std::array<double, 3>;
using Alpha = std::array<double, 2>;

/// lambda = (sigma_mstar2 - sigma_u2) / sigma_mstar2. Throws
/// infeasible_error_variance when sigma_mstar2 <= sigma_u2.
double reliability(double sigma_mstar2, double sigma_u2);

/// Attenuated probit coefficients on the observed mediator implied by
/// true-mediator coefficients beta.
Beta forward_star(const Beta& beta, const Alpha& alpha, double lambda,
                  double sigma_u2);

/// Inverts forward_star at the fitted observed-scale parameters. Throws
/// identifiability_boundary when lambda^2 - beta1*^2 lambda sigma_u2 is not
/// safely positive (no real beta1 exists there).
AdjustedParams adjust(const StarParams& star, double sigma_u2);

/// P(Y = 1 | M* = m_star, C = c) under the true-mediator probit model.
double outcome_prob_given_measurement(double m_star, int c,
                                      const AdjustedParams& adj,
                                      const Alpha& alpha, double sigma_u2);

}  // namespace medshift
