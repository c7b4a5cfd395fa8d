#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "medshift/data.hpp"
#include "medshift/link.hpp"
#include "medshift/quadrature.hpp"

namespace medshift {

using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

/// Fixed parameter order used by gradients and information matrices.
enum ParamIndex : int {
  kAlpha0 = 0,
  kAlpha1 = 1,
  kSigmaMstar2 = 2,
  kBeta0Star = 3,
  kBeta1Star = 4,
  kBeta2Star = 5,
};
inline constexpr std::array<std::string_view, 6> kParamNames{
    "alpha0", "alpha1", "sigma_mstar2", "beta0_star", "beta1_star", "beta2_star"};

/// Observed-scale parameters: M* | c ~ N(alpha0 + alpha1 c, sigma_mstar2)
/// and P(Y = 1 | M*, c) = F(beta0* + beta1* M* + beta2* c).
struct StarParams {
  double alpha0 = 0.0;
  double alpha1 = 0.0;
  double sigma_mstar2 = 1.0;
  double beta0_star = 0.0;
  double beta1_star = 0.0;
  double beta2_star = 0.0;

  Vec6 to_vector() const;
  static StarParams from_vector(const Vec6& v);
};

struct LikelihoodOptions {
  Link link = Link::probit;
  std::size_t quad_nodes = 64;
  /// Lower end of the standardized integration window.
  double window = 8.0;
};

struct LoglikValue {
  double value = 0.0;
  /// Censored integrals that underflowed and were clamped to 1e-300.
  std::size_t n_floored = 0;
};

/// Observed-data log-likelihood for a censored-mediator dataset. Censored
/// records integrate the outcome model against the mediator density over
/// the censored region with fixed-order Gauss-Legendre quadrature.
class CensoredLikelihood {
 public:
  explicit CensoredLikelihood(const Dataset& d, LikelihoodOptions opt = {});

  /// OpenMP kernel. Censored records sharing (y, c, assay limit) share one
  /// quadrature; per-record terms are reduced by fixed-order pairwise sum,
  /// so the value does not depend on the thread count.
  LoglikValue evaluate(const StarParams& p) const;

  /// Serial reference: one quadrature per censored record.
  LoglikValue evaluate_reference(const StarParams& p) const;

  /// Contribution of record i.
  double record_term(std::size_t i, const StarParams& p,
                     std::size_t* n_floored = nullptr) const;

  /// log of the integral over m* <= assay_limit of F(+-eta(m*)) times the
  /// N(mean, sd^2) density of m*.
  double log_censored_integral(int y, int c, double assay_limit,
                               const StarParams& p,
                               std::size_t* n_floored = nullptr) const;

  const Dataset& dataset() const { return data_; }
  const LikelihoodOptions& options() const { return opt_; }

 private:
  struct CensoredGroup {
    int y;
    int c;
    double assay_limit;
  };

  const Dataset& data_;
  LikelihoodOptions opt_;
  GaussLegendreRule rule_;
  std::vector<CensoredGroup> groups_;
  std::vector<std::ptrdiff_t> group_of_;  // -1 for detected records
};

double log_likelihood(const Dataset& d, const StarParams& p,
                      const LikelihoodOptions& opt = {});

struct FitOptions {
  Link link = Link::probit;
  std::size_t quad_nodes = 64;
  int max_iterations = 500;
  double grad_tol = 1e-6;
  double rel_tol = 1e-10;
};

struct FitResult {
  StarParams params;
  double loglik = 0.0;
  /// Negative Hessian of the per-record mean log-likelihood, in the order
  /// (alpha0, alpha1, sigma_mstar2, beta0*, beta1*, beta2*).
  Mat6 info_matrix = Mat6::Zero();
  bool converged = false;
  bool info_psd = false;
  std::size_t n_used = 0;
  int iterations = 0;
  int evaluations = 0;
  /// Max |gradient| of the mean log-likelihood on the unconstrained scale.
  double grad_max = 0.0;
  std::size_t n_floored = 0;
  Link link = Link::probit;
  std::string message;
};

/// Unconstrained coordinates (alpha0, alpha1, log sigma, beta0*, beta1*, beta2*).
Vec6 to_unconstrained(const StarParams& p);
StarParams from_unconstrained(const Vec6& u);

/// Starting values from detected-record moments and a binary regression
/// with censored mediators imputed at their assay limit.
StarParams default_init(const Dataset& d, Link link = Link::probit);

/// Maximum-likelihood fit by BFGS on the unconstrained scale.
FitResult fit_mle(const Dataset& d, std::optional<StarParams> init = std::nullopt,
                  const FitOptions& opt = {});

/// Observed information at p (negative Hessian of the mean log-likelihood)
/// in natural coordinates; exposed for testing.
Mat6 observed_information(const CensoredLikelihood& lik, const StarParams& p);

}  // namespace medshift
