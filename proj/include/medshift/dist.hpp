#pragma once

#include <cstdint>
#include <random>

namespace medshift {

/// Normal law on the log10 mediator scale. sd must be strictly positive.
struct NormalSpec {
  double mean = 0.0;
  double sd = 1.0;
};

/// Mean and variance of a normal law whose variance may be zero.
struct NormalMoments {
  double mean = 0.0;
  double variance = 0.0;
};

double std_normal_pdf(double x);

/// Phi(x). Throws invalid_argument on non-finite input.
double std_normal_cdf(double x);

/// log Phi(x), accurate deep in the lower tail where Phi underflows.
double log_std_normal_cdf(double x);

/// Phi^{-1}(p) for p in (0, 1); rational start plus one Halley step.
double std_normal_quantile(double p);

/// Integral of Phi(mu + x*sigma) * phi(x) over the real line,
/// which equals Phi(mu / sqrt(1 + sigma^2)).
double probit_normal_integral(double mu, double sigma);

/// Law of the true mediator M given the error-prone measurement M* = m_star
/// and common cause c, when M | c ~ N(a0 + a1 c, sigma_m^2) and
/// M* = M + U with U ~ N(0, sigma_u^2).  lambda is the reliability ratio.
NormalMoments conditional_mediator_given_measurement(double m_star, int c,
                                                     double alpha0,
                                                     double alpha1,
                                                     double lambda,
                                                     double sigma_u2);

/// Caller-owned random stream. All variates are produced by inverse CDF
/// from 53-bit uniforms, so draws are reproducible across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on the open interval (0, 1).
  double uniform();
  double normal() { return std_normal_quantile(uniform()); }
  std::uint64_t next_u64() { return engine_(); }
  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n);

 private:
  std::mt19937_64 engine_;
};

/// Seed for an independent substream keyed by (seed, a, b).
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t a,
                             std::uint64_t b = 0);

/// Draw from spec restricted to (-inf, upper] by inverse CDF on a uniform
/// rescaled to [0, Phi((upper - mean) / sd)]. Throws far_tail when that
/// probability underflows.
double truncated_normal_sample(const NormalSpec& spec, double upper, Rng& rng);

}  // namespace medshift
