#include "medshift/link.hpp"

#include <algorithm>
#include <cmath>

#include "medshift/dist.hpp"
#include "medshift/error.hpp"

namespace medshift {

std::string_view link_name(Link link) {
  return link == Link::probit ? "probit" : "logit";
}

Link parse_link(std::string_view name) {
  if (name == "probit") return Link::probit;
  if (name == "logit") return Link::logit;
  throw Error(ErrorCode::invalid_argument,
              "unknown link '" + std::string(name) + "' (expected probit|logit)");
}

double link_cdf(Link link, double eta) {
  if (link == Link::probit) return std_normal_cdf(eta);
  if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

double log_link_cdf(Link link, double eta) {
  if (link == Link::probit) return log_std_normal_cdf(eta);
  if (eta >= 0.0) return -std::log1p(std::exp(-eta));
  return eta - std::log1p(std::exp(eta));
}

double link_pdf(Link link, double eta) {
  if (link == Link::probit) return std_normal_pdf(eta);
  const double p = link_cdf(Link::logit, eta);
  return p * (1.0 - p);
}

BinaryRegressionFit fit_binary_regression(const Eigen::MatrixXd& X,
                                          const Eigen::VectorXd& y, Link link,
                                          int max_iter) {
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();
  BinaryRegressionFit out;
  out.coef = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd w(n);
  Eigen::VectorXd z(n);
  for (int it = 0; it < max_iter; ++it) {
    out.iterations = it + 1;
    const Eigen::VectorXd eta = X * out.coef;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double mu = std::clamp(link_cdf(link, eta[i]), 1e-12, 1.0 - 1e-12);
      const double dens = std::max(link_pdf(link, eta[i]), 1e-300);
      w[i] = dens * dens / (mu * (1.0 - mu));
      z[i] = eta[i] + (y[i] - mu) / dens;
    }
    Eigen::MatrixXd xtwx = X.transpose() * w.asDiagonal() * X;
    xtwx.diagonal().array() += 1e-10;
    const Eigen::VectorXd next =
        xtwx.ldlt().solve(X.transpose() * (w.array() * z.array()).matrix());
    if (!next.allFinite()) break;
    const double step = (next - out.coef).cwiseAbs().maxCoeff();
    out.coef = next;
    if (step < 1e-12) {
      out.converged = true;
      break;
    }
  }
  return out;
}

}  // namespace medshift
