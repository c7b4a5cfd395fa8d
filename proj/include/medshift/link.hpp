#pragma once

#include <Eigen/Dense>
#include <string>
#include <string_view>

namespace medshift {

/// Binary-outcome link. Both links are symmetric: 1 - F(eta) = F(-eta).
enum class Link { probit, logit };

std::string_view link_name(Link link);
Link parse_link(std::string_view name);

double link_cdf(Link link, double eta);
double log_link_cdf(Link link, double eta);
double link_pdf(Link link, double eta);

/// Maximum-likelihood binary regression by Fisher scoring.
/// X holds one row per observation (including the intercept column).
/// Returns coefficients; `converged` reports whether the step size
/// dropped below 1e-12 within max_iter.
struct BinaryRegressionFit {
  Eigen::VectorXd coef;
  bool converged = false;
  int iterations = 0;
};
BinaryRegressionFit fit_binary_regression(const Eigen::MatrixXd& X,
                                          const Eigen::VectorXd& y, Link link,
                                          int max_iter = 100);

}  // namespace medshift
