#include "medshift/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "medshift/bfgs.hpp"
#include "medshift/dist.hpp"
#include "medshift/error.hpp"
#include "medshift/parallel.hpp"

namespace medshift {
namespace {

constexpr double kLogTwoPi = 1.83787706640934548356;
constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kIntegralFloor = 1e-300;

// Non-throwing link CDF for use inside parallel regions.
double cdf_kernel(Link link, double eta) {
  if (link == Link::probit) return 0.5 * std::erfc(-eta * kInvSqrt2);
  return link_cdf(Link::logit, eta);
}

double detected_term(Link link, int y, double m, int c, const StarParams& p) {
  const double eta = p.beta0_star + p.beta1_star * m + p.beta2_star * c;
  const double outcome = log_link_cdf(link, y == 1 ? eta : -eta);
  const double resid = m - (p.alpha0 + p.alpha1 * c);
  return outcome - 0.5 * (kLogTwoPi + std::log(p.sigma_mstar2)) -
         0.5 * resid * resid / p.sigma_mstar2;
}

void check_params(const StarParams& p) {
  if (!p.to_vector().allFinite() || !(p.sigma_mstar2 > 0.0)) {
    throw Error(ErrorCode::evaluation_error,
                "log-likelihood: parameters not finite or sigma_mstar2 <= 0");
  }
}

}  // namespace

Vec6 StarParams::to_vector() const {
  Vec6 v;
  v << alpha0, alpha1, sigma_mstar2, beta0_star, beta1_star, beta2_star;
  return v;
}

StarParams StarParams::from_vector(const Vec6& v) {
  return {v[0], v[1], v[2], v[3], v[4], v[5]};
}

Vec6 to_unconstrained(const StarParams& p) {
  Vec6 u = p.to_vector();
  u[kSigmaMstar2] = 0.5 * std::log(p.sigma_mstar2);
  return u;
}

StarParams from_unconstrained(const Vec6& u) {
  Vec6 v = u;
  v[kSigmaMstar2] = std::exp(2.0 * u[kSigmaMstar2]);
  return StarParams::from_vector(v);
}

CensoredLikelihood::CensoredLikelihood(const Dataset& d, LikelihoodOptions opt)
    : data_(d), opt_(opt), rule_(opt.quad_nodes), group_of_(d.size(), -1) {
  std::map<std::tuple<int, int, double>, std::ptrdiff_t> index;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const Record& r = d[i];
    if (r.detected()) continue;
    const auto key = std::make_tuple(r.y, r.c, r.assay_limit);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, static_cast<std::ptrdiff_t>(groups_.size())).first;
      groups_.push_back({r.y, r.c, r.assay_limit});
    }
    group_of_[i] = it->second;
  }
}

double CensoredLikelihood::log_censored_integral(int y, int c, double assay_limit,
                                                 const StarParams& p,
                                                 std::size_t* n_floored) const {
  const double sd = std::sqrt(p.sigma_mstar2);
  const double mu = p.alpha0 + p.alpha1 * c;
  const double upper = std::min((assay_limit - mu) / sd, opt_.window);
  const double lower = std::min(-opt_.window, upper - 2.0 * opt_.window);
  const double sign = y == 1 ? 1.0 : -1.0;
  const double eta0 = p.beta0_star + p.beta1_star * mu + p.beta2_star * c;
  const double slope = p.beta1_star * sd;
  const Link link = opt_.link;
  const double integral = rule_.integrate(
      [&](double t) {
        return cdf_kernel(link, sign * (eta0 + slope * t)) * std_normal_pdf(t);
      },
      lower, upper);
  if (std::isnan(integral)) return integral;
  if (!(integral > kIntegralFloor)) {
    if (n_floored) ++*n_floored;
    return std::log(kIntegralFloor);
  }
  return std::log(integral);
}

double CensoredLikelihood::record_term(std::size_t i, const StarParams& p,
                                       std::size_t* n_floored) const {
  const Record& r = data_[i];
  if (r.detected()) return detected_term(opt_.link, r.y, *r.m_star, r.c, p);
  return log_censored_integral(r.y, r.c, r.assay_limit, p, n_floored);
}

LoglikValue CensoredLikelihood::evaluate(const StarParams& p) const {
  check_params(p);
  const auto n_groups = static_cast<std::ptrdiff_t>(groups_.size());
  std::vector<double> group_log(groups_.size());
  std::vector<unsigned char> group_floored(groups_.size(), 0);

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t g = 0; g < n_groups; ++g) {
    std::size_t fl = 0;
    const CensoredGroup& grp = groups_[static_cast<std::size_t>(g)];
    group_log[g] = log_censored_integral(grp.y, grp.c, grp.assay_limit, p, &fl);
    group_floored[g] = fl > 0 ? 1 : 0;
  }

  const auto n = static_cast<std::ptrdiff_t>(data_.size());
  std::vector<double> terms(data_.size());
  std::size_t floored = 0;
  const Link link = opt_.link;
#pragma omp parallel for schedule(static) reduction(+ : floored)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const Record& r = data_[static_cast<std::size_t>(i)];
    const std::ptrdiff_t g = group_of_[static_cast<std::size_t>(i)];
    if (g < 0) {
      terms[i] = detected_term(link, r.y, *r.m_star, r.c, p);
    } else {
      terms[i] = group_log[g];
      floored += group_floored[g];
    }
  }

  const double total = pairwise_sum(terms);
  if (!std::isfinite(total)) {
    throw Error(ErrorCode::evaluation_error, "log-likelihood is not finite");
  }
  return {total, floored};
}

LoglikValue CensoredLikelihood::evaluate_reference(const StarParams& p) const {
  check_params(p);
  std::vector<double> terms(data_.size());
  std::size_t floored = 0;
  for (std::size_t i = 0; i < data_.size(); ++i) {
    terms[i] = record_term(i, p, &floored);
  }
  const double total = pairwise_sum(terms);
  if (!std::isfinite(total)) {
    throw Error(ErrorCode::evaluation_error, "log-likelihood is not finite");
  }
  return {total, floored};
}

double log_likelihood(const Dataset& d, const StarParams& p,
                      const LikelihoodOptions& opt) {
  return CensoredLikelihood(d, opt).evaluate(p).value;
}

StarParams default_init(const Dataset& d, Link link) {
  std::array<double, 2> sum{0.0, 0.0};
  std::array<std::size_t, 2> cnt{0, 0};
  for (const auto& r : d.records()) {
    if (!r.detected()) continue;
    sum[r.c] += *r.m_star;
    ++cnt[r.c];
  }
  const std::size_t n_det = cnt[0] + cnt[1];
  if (n_det < 3) {
    throw Error(ErrorCode::init_error,
                "default_init: fewer than 3 detected mediator values");
  }
  StarParams p;
  if (cnt[0] > 0 && cnt[1] > 0) {
    p.alpha0 = sum[0] / cnt[0];
    p.alpha1 = sum[1] / cnt[1] - p.alpha0;
  } else {
    p.alpha0 = (sum[0] + sum[1]) / n_det;
    p.alpha1 = 0.0;
  }
  double ss = 0.0;
  for (const auto& r : d.records()) {
    if (!r.detected()) continue;
    const double e = *r.m_star - (p.alpha0 + p.alpha1 * r.c);
    ss += e * e;
  }
  p.sigma_mstar2 = ss / n_det;
  if (!(p.sigma_mstar2 > 1e-12)) {
    throw Error(ErrorCode::init_error,
                "default_init: detected mediator values have zero variance");
  }

  Eigen::MatrixXd X(d.size(), 3);
  Eigen::VectorXd y(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    const Record& r = d[i];
    X(i, 0) = 1.0;
    X(i, 1) = r.detected() ? *r.m_star : r.assay_limit;
    X(i, 2) = r.c;
    y[i] = r.y;
  }
  const auto glm = fit_binary_regression(X, y, link);
  if (glm.coef.allFinite() && glm.coef.cwiseAbs().maxCoeff() < 50.0) {
    p.beta0_star = glm.coef[0];
    p.beta1_star = glm.coef[1];
    p.beta2_star = glm.coef[2];
  } else {
    const double ybar = y.mean();
    p.beta0_star = link == Link::probit ? std_normal_quantile(ybar)
                                        : std::log(ybar / (1.0 - ybar));
  }
  return p;
}

Mat6 observed_information(const CensoredLikelihood& lik, const StarParams& p) {
  const double n = static_cast<double>(lik.dataset().size());
  auto f = [&](const Vec6& u) { return lik.evaluate(from_unconstrained(u)).value / n; };
  const Vec6 u0 = to_unconstrained(p);
  const double f0 = f(u0);
  Vec6 h;
  for (int i = 0; i < 6; ++i) h[i] = 1e-4 * std::max(1.0, std::abs(u0[i]));

  Vec6 grad;
  Mat6 hess;
  for (int i = 0; i < 6; ++i) {
    Vec6 up = u0;
    Vec6 um = u0;
    up[i] += h[i];
    um[i] -= h[i];
    const double fp = f(up);
    const double fm = f(um);
    grad[i] = (fp - fm) / (2.0 * h[i]);
    hess(i, i) = (fp - 2.0 * f0 + fm) / (h[i] * h[i]);
  }
  for (int i = 0; i < 6; ++i) {
    for (int j = i + 1; j < 6; ++j) {
      Vec6 u = u0;
      u[i] += h[i];
      u[j] += h[j];
      const double fpp = f(u);
      u[j] -= 2.0 * h[j];
      const double fpm = f(u);
      u[i] -= 2.0 * h[i];
      const double fmm = f(u);
      u[j] += 2.0 * h[j];
      const double fmp = f(u);
      hess(i, j) = hess(j, i) = (fpp - fpm - fmp + fmm) / (4.0 * h[i] * h[j]);
    }
  }

  // Chain rule from log sigma to sigma^2: s = 0.5 log v.
  const double v = p.sigma_mstar2;
  const double ds = 0.5 / v;
  const double d2s = -0.5 / (v * v);
  Mat6 nat = hess;
  for (int j = 0; j < 6; ++j) {
    if (j == kSigmaMstar2) continue;
    nat(kSigmaMstar2, j) = nat(j, kSigmaMstar2) = hess(kSigmaMstar2, j) * ds;
  }
  nat(kSigmaMstar2, kSigmaMstar2) =
      hess(kSigmaMstar2, kSigmaMstar2) * ds * ds + grad[kSigmaMstar2] * d2s;
  return -nat;
}

FitResult fit_mle(const Dataset& d, std::optional<StarParams> init,
                  const FitOptions& opt) {
  const StarParams start = init ? *init : default_init(d, opt.link);
  const CensoredLikelihood lik(d, {opt.link, opt.quad_nodes});
  const double n = static_cast<double>(d.size());

  BfgsOptions bopt;
  bopt.max_iterations = opt.max_iterations;
  bopt.grad_tol = opt.grad_tol;
  bopt.rel_tol = opt.rel_tol;
  const auto objective = [&](const Eigen::VectorXd& u) {
    return -lik.evaluate(from_unconstrained(Vec6(u))).value / n;
  };
  const BfgsResult br = minimize_bfgs(objective, to_unconstrained(start), bopt);

  FitResult out;
  out.link = opt.link;
  out.n_used = d.size();
  out.params = from_unconstrained(Vec6(br.x));
  out.iterations = br.iterations;
  out.evaluations = br.evaluations;
  out.grad_max = br.grad_max;
  out.converged = br.converged;
  out.message = br.message;
  if (!std::isfinite(br.f)) {
    out.converged = false;
    out.loglik = -std::numeric_limits<double>::infinity();
    return out;
  }
  const LoglikValue lv = lik.evaluate(out.params);
  out.loglik = lv.value;
  out.n_floored = lv.n_floored;
  try {
    Mat6 info = observed_information(lik, out.params);
    info = 0.5 * (info + info.transpose()).eval();
    out.info_matrix = info;
    const Eigen::SelfAdjointEigenSolver<Mat6> es(info);
    const double top = es.eigenvalues().cwiseAbs().maxCoeff();
    out.info_psd = info.allFinite() && es.eigenvalues().minCoeff() > -1e-10 * top;
  } catch (const Error& e) {
    out.info_psd = false;
    out.message += "; information evaluation failed: " + std::string(e.what());
  }
  return out;
}

}  // namespace medshift
