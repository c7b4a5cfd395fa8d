#include "medshift/me_adjust.hpp"

#include <cmath>
#include <string>

#include "medshift/dist.hpp"
#include "medshift/error.hpp"

namespace medshift {
namespace {
constexpr double kBoundaryTol = 1e-10;
}

double reliability(double sigma_mstar2, double sigma_u2) {
  if (!(sigma_u2 >= 0.0) || !std::isfinite(sigma_mstar2)) {
    throw Error(ErrorCode::invalid_argument, "reliability: invalid variances");
  }
  if (!(sigma_mstar2 > sigma_u2)) {
    throw Error(ErrorCode::infeasible_error_variance,
                "observed mediator variance " + std::to_string(sigma_mstar2) +
                    " does not exceed the error variance " +
                    std::to_string(sigma_u2));
  }
  return (sigma_mstar2 - sigma_u2) / sigma_mstar2;
}

Beta forward_star(const Beta& beta, const Alpha& alpha, double lambda,
                  double sigma_u2) {
  if (!(lambda > 0.0 && lambda <= 1.0)) {
    throw Error(ErrorCode::invalid_argument, "forward_star: lambda outside (0, 1]");
  }
  const double r = 1.0 / std::sqrt(1.0 + beta[1] * beta[1] * lambda * sigma_u2);
  return {r * (beta[0] + beta[1] * (1.0 - lambda) * alpha[0]),
          r * lambda * beta[1],
          r * (beta[1] * (1.0 - lambda) * alpha[1] + beta[2])};
}

AdjustedParams adjust(const StarParams& star, double sigma_u2) {
  const double lambda = reliability(star.sigma_mstar2, sigma_u2);
  const double b1s = star.beta1_star;
  const double disc = lambda * lambda - b1s * b1s * lambda * sigma_u2;
  if (!(disc > kBoundaryTol)) {
    throw Error(ErrorCode::identifiability_boundary,
                "lambda^2 - beta1*^2 lambda sigma_u^2 = " + std::to_string(disc) +
                    " <= 0: no true-mediator slope reproduces beta1* = " +
                    std::to_string(b1s));
  }
  AdjustedParams a;
  a.lambda = lambda;
  a.sigma_m2 = lambda * star.sigma_mstar2;
  a.beta1 = b1s / std::sqrt(disc);
  const double scale = std::sqrt(1.0 + a.beta1 * a.beta1 * lambda * sigma_u2);
  a.beta0 = star.beta0_star * scale - a.beta1 * (1.0 - lambda) * star.alpha0;
  a.beta2 = star.beta2_star * scale - a.beta1 * (1.0 - lambda) * star.alpha1;
  return a;
}

double outcome_prob_given_measurement(double m_star, int c,
                                      const AdjustedParams& adj,
                                      const Alpha& alpha, double sigma_u2) {
  const NormalMoments cond = conditional_mediator_given_measurement(
      m_star, c, alpha[0], alpha[1], adj.lambda, sigma_u2);
  const double mu = adj.beta0 + adj.beta1 * cond.mean + adj.beta2 * c;
  return probit_normal_integral(mu, std::abs(adj.beta1) * std::sqrt(cond.variance));
}

}  // namespace medshift
