#include "medshift/dist.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "medshift/error.hpp"

namespace medshift {
namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kLogSqrt2Pi = 0.91893853320467274178;

// Acklam's rational approximation, used as a starting point only.
constexpr double kA[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                         -2.759285104469687e+02, 1.383577518672690e+02,
                         -3.066479806614716e+01, 2.506628277459239e+00};
constexpr double kB[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                         -1.556989798598866e+02, 6.680131188771972e+01,
                         -1.328068155288572e+01};
constexpr double kC[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                         -2.400758277161838e+00, -2.549732539343734e+00,
                         4.374664141464968e+00, 2.938163982698783e+00};
constexpr double kD[] = {7.784695709041462e-03, 3.224671290700398e-01,
                         2.445134137142996e+00, 3.754408661907416e+00};
constexpr double kPLow = 0.02425;

double log_std_normal_pdf(double x) { return -0.5 * x * x - kLogSqrt2Pi; }

// Lower-tail quantile from log p, valid for log p < log(kPLow).
double lower_tail_quantile_from_log(double log_p) {
  const double q = std::sqrt(-2.0 * log_p);
  double x = (((((kC[0] * q + kC[1]) * q + kC[2]) * q + kC[3]) * q + kC[4]) * q +
              kC[5]) /
             ((((kD[0] * q + kD[1]) * q + kD[2]) * q + kD[3]) * q + 1.0);
  // Newton on log Phi(x) = log_p; the log form stays finite past underflow.
  for (int it = 0; it < 3; ++it) {
    const double lphi = log_std_normal_cdf(x);
    const double slope = std::exp(log_std_normal_pdf(x) - lphi);
    x -= (lphi - log_p) / slope;
  }
  return x;
}

double central_quantile(double p) {
  const double q = p - 0.5;
  const double r = q * q;
  double x = (((((kA[0] * r + kA[1]) * r + kA[2]) * r + kA[3]) * r + kA[4]) * r +
              kA[5]) *
             q /
             (((((kB[0] * r + kB[1]) * r + kB[2]) * r + kB[3]) * r + kB[4]) * r +
              1.0);
  for (int it = 0; it < 2; ++it) {
    const double e = std_normal_cdf(x) - p;
    const double u = e / std_normal_pdf(x);
    x -= u / (1.0 + 0.5 * x * u);
  }
  return x;
}

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

double std_normal_pdf(double x) { return std::exp(log_std_normal_pdf(x)); }

double std_normal_cdf(double x) {
  if (!std::isfinite(x)) {
    throw Error(ErrorCode::invalid_argument,
                "std_normal_cdf: non-finite argument " + std::to_string(x));
  }
  return 0.5 * std::erfc(-x * kInvSqrt2);
}

double log_std_normal_cdf(double x) {
  if (x > -37.0) {
    if (x > 5.0) return std::log1p(-0.5 * std::erfc(x * kInvSqrt2));
    return std::log(std_normal_cdf(x));
  }
  // Asymptotic series for the Mills ratio.
  const double r = 1.0 / (x * x);
  const double series =
      1.0 - r * (1.0 - 3.0 * r * (1.0 - 5.0 * r * (1.0 - 7.0 * r * (1.0 - 9.0 * r))));
  return log_std_normal_pdf(x) - std::log(-x) + std::log(series);
}

double std_normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw Error(ErrorCode::invalid_argument,
                "std_normal_quantile: p outside (0,1): " + std::to_string(p));
  }
  if (p < kPLow) return lower_tail_quantile_from_log(std::log(p));
  if (p > 1.0 - kPLow) return -lower_tail_quantile_from_log(std::log1p(-p));
  return central_quantile(p);
}

double probit_normal_integral(double mu, double sigma) {
  if (!(sigma >= 0.0)) {
    throw Error(ErrorCode::invalid_argument,
                "probit_normal_integral: sigma must be >= 0");
  }
  return std_normal_cdf(mu / std::sqrt(1.0 + sigma * sigma));
}

NormalMoments conditional_mediator_given_measurement(double m_star, int c,
                                                     double alpha0,
                                                     double alpha1,
                                                     double lambda,
                                                     double sigma_u2) {
  if (!(lambda > 0.0 && lambda <= 1.0)) {
    throw Error(ErrorCode::invalid_argument,
                "reliability ratio must lie in (0, 1], got " +
                    std::to_string(lambda));
  }
  if (!(sigma_u2 >= 0.0)) {
    throw Error(ErrorCode::invalid_argument, "sigma_u2 must be >= 0");
  }
  const double mu = alpha0 + alpha1 * c;
  return {(1.0 - lambda) * mu + lambda * m_star, lambda * sigma_u2};
}

double Rng::uniform() {
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

std::size_t Rng::index(std::size_t n) {
  const std::uint64_t range = n;
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() -
      std::numeric_limits<std::uint64_t>::max() % range;
  std::uint64_t v;
  do {
    v = engine_();
  } while (v >= limit);
  return static_cast<std::size_t>(v % range);
}

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t a,
                             std::uint64_t b) {
  return splitmix64(splitmix64(splitmix64(seed) ^ a) ^ (b * 0xd1b54a32d192ed03ULL));
}

double truncated_normal_sample(const NormalSpec& spec, double upper, Rng& rng) {
  if (!std::isfinite(upper)) {
    throw Error(ErrorCode::invalid_argument,
                "truncated_normal_sample: upper bound must be finite");
  }
  if (!(spec.sd > 0.0)) {
    throw Error(ErrorCode::invalid_argument,
                "truncated_normal_sample: sd must be > 0");
  }
  const double z_up = (upper - spec.mean) / spec.sd;
  const double log_mass = log_std_normal_cdf(z_up);
  if (std::exp(log_mass) < std::numeric_limits<double>::min()) {
    throw Error(ErrorCode::far_tail,
                "truncated_normal_sample: Phi((upper - mean)/sd) underflows "
                "(z = " + std::to_string(z_up) + ")");
  }
  const double log_target = std::log(rng.uniform()) + log_mass;
  const double z = log_target < std::log(kPLow)
                       ? lower_tail_quantile_from_log(log_target)
                       : std_normal_quantile(std::exp(log_target));
  return std::min(spec.mean + spec.sd * z, upper);
}

}  // namespace medshift
