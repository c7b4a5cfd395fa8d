#include "medshift/inference.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <optional>
#include <string>

#include "medshift/dist.hpp"
#include "medshift/error.hpp"

namespace medshift {

std::string_view ci_method_name(CiMethod m) {
  return m == CiMethod::delta ? "delta" : "bootstrap";
}

std::string_view effect_mode_name(EffectMode m) {
  return m == EffectMode::adjusted ? "adjusted" : "ignored";
}

double EffectEstimate::ci_low_clipped() const { return std::clamp(ci_low, -1.0, 1.0); }
double EffectEstimate::ci_high_clipped() const { return std::clamp(ci_high, -1.0, 1.0); }

Vec6 expected_outcome_gradient(const StarParams& star, double sigma_u2,
                               const CommonCauseDist& pc, double xi) {
  const double s = star.sigma_mstar2;
  const double lambda = reliability(s, sigma_u2);
  const double dlambda = sigma_u2 / (s * s);
  const double b1 = star.beta1_star;
  const double root = std::sqrt(1.0 + b1 * b1 * s);
  const double denom = lambda * root;

  Vec6 g = Vec6::Zero();
  for (int c = 0; c <= 1; ++c) {
    const double w = pc.p[c];
    if (w == 0.0) continue;
    // Linear predictor before the measurement-error scaling.
    const double lin = star.beta0_star + b1 * (star.alpha0 + star.alpha1 * c) +
                       star.beta2_star * c;
    const double num = lambda * lin - b1 * xi;
    const double dens = std_normal_pdf(num / denom) * w;

    g[kAlpha0] += dens * b1 / root;
    g[kAlpha1] += dens * b1 * c / root;
    g[kBeta0Star] += dens / root;
    g[kBeta2Star] += dens * c / root;
    g[kBeta1Star] += dens *
                     ((lambda * star.alpha0 + lambda * star.alpha1 * c - xi) -
                      b1 * s * lambda * (star.beta0_star + star.beta2_star * c)) /
                     (lambda * root * root * root);
    const double dnum = lin * dlambda;
    const double dden = dlambda * root + lambda * b1 * b1 / (2.0 * root);
    g[kSigmaMstar2] += dens * (dnum * denom - num * dden) / (denom * denom);
  }
  return g;
}

Vec6 effect_gradient(const StarParams& star, double sigma_u2,
                     const CommonCauseDist& pc, double xi) {
  if (xi == 0.0) {
    reliability(star.sigma_mstar2, sigma_u2);
    return Vec6::Zero();
  }
  return expected_outcome_gradient(star, sigma_u2, pc, xi) -
         expected_outcome_gradient(star, sigma_u2, pc, 0.0);
}

EffectEstimate delta_ci(const FitResult& fit, double sigma_u2,
                        const CommonCauseDist& pc, double xi, double level,
                        EffectMode mode) {
  if (!(level > 0.0 && level < 1.0)) {
    throw Error(ErrorCode::invalid_argument, "confidence level must lie in (0, 1)");
  }
  if (!fit.converged) {
    throw Error(ErrorCode::non_convergence,
                "delta_ci: fit did not converge (" + fit.message + ")");
  }
  const double su2 = mode == EffectMode::adjusted ? sigma_u2 : 0.0;
  EffectEstimate est;
  est.xi = xi;
  est.level = level;
  est.method = CiMethod::delta;
  est.point = indirect_effect_from_star(fit.params, su2, pc, xi).indirect;

  const Vec6 g = effect_gradient(fit.params, su2, pc, xi);
  if (g.isZero(0.0)) {
    est.se = 0.0;
  } else {
    const Mat6 total = fit.info_matrix * static_cast<double>(fit.n_used);
    const Eigen::SelfAdjointEigenSolver<Mat6> es(total);
    const auto& ev = es.eigenvalues();
    const double top = ev.cwiseAbs().maxCoeff();
    if (!fit.info_psd || !total.allFinite() || !(ev[0] > 1e-12 * top)) {
      Eigen::Index k = 0;
      es.eigenvectors().col(0).cwiseAbs().maxCoeff(&k);
      throw Error(ErrorCode::singular_information,
                  "information matrix is singular or not positive definite "
                  "(smallest eigenvalue " + std::to_string(ev[0]) +
                      ", null direction dominated by " +
                      std::string(kParamNames[static_cast<std::size_t>(k)]) + ")");
    }
    const Vec6 proj = es.eigenvectors().transpose() * g;
    const double var = (proj.array().square() / ev.array()).sum();
    est.se = std::sqrt(std::max(var, 0.0));
  }
  const double z = std_normal_quantile(1.0 - 0.5 * (1.0 - level));
  est.ci_low = est.point - z * est.se;
  est.ci_high = est.point + z * est.se;
  return est;
}

double sorted_quantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) {
    throw Error(ErrorCode::invalid_argument, "quantile of an empty sample");
  }
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

ResampleEstimator closed_form_estimator(double sigma_u2, std::vector<double> shifts,
                                        const BootstrapOptions& opt) {
  return [sigma_u2, shifts = std::move(shifts), mode = opt.mode, fopt = opt.fit](
             const Dataset& resample, const CommonCauseDist& pc, std::uint64_t) {
    const FitResult fit = fit_mle(resample, std::nullopt, fopt);
    if (!fit.converged) {
      throw Error(ErrorCode::non_convergence, "bootstrap refit did not converge");
    }
    const double su2 = mode == EffectMode::adjusted ? sigma_u2 : 0.0;
    std::vector<double> out;
    out.reserve(shifts.size());
    for (double xi : shifts) {
      out.push_back(indirect_effect_from_star(fit.params, su2, pc, xi).indirect);
    }
    return out;
  };
}

std::vector<EffectEstimate> bootstrap_ci(const Dataset& d,
                                         std::span<const double> shifts,
                                         std::span<const double> point_estimates,
                                         const ResampleEstimator& estimator,
                                         const BootstrapOptions& opt) {
  if (opt.reps < 100) {
    throw Error(ErrorCode::invalid_argument, "bootstrap needs at least 100 replicates");
  }
  if (!(opt.level > 0.0 && opt.level < 1.0)) {
    throw Error(ErrorCode::invalid_argument, "confidence level must lie in (0, 1)");
  }
  if (point_estimates.size() != shifts.size()) {
    throw Error(ErrorCode::invalid_argument, "one point estimate per shift required");
  }
  const CommonCauseDist full_pc = empirical_common_cause_dist(d);
  const auto reps = static_cast<std::ptrdiff_t>(opt.reps);
  std::vector<std::optional<std::vector<double>>> results(opt.reps);
  std::exception_ptr fatal;

#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t r = 0; r < reps; ++r) {
    try {
      const auto rep = static_cast<std::uint64_t>(r);
      Rng rng(substream_seed(opt.seed, rep, 0));
      std::vector<Record> picked;
      picked.reserve(d.size());
      for (std::size_t i = 0; i < d.size(); ++i) picked.push_back(d[rng.index(d.size())]);
      const Dataset resample(std::move(picked), d.sigma_u(), d.label());
      const CommonCauseDist pc = opt.pc_policy == PcPolicy::fixed
                                     ? full_pc
                                     : empirical_common_cause_dist(resample);
      auto values = estimator(resample, pc, substream_seed(opt.seed, rep, 1));
      bool finite = values.size() == shifts.size();
      for (double v : values) finite = finite && std::isfinite(v);
      if (finite) results[static_cast<std::size_t>(r)] = std::move(values);
    } catch (const Error&) {
      // counted as a failed replicate below
    } catch (...) {
#pragma omp critical(medshift_bootstrap_fatal)
      if (!fatal) fatal = std::current_exception();
    }
  }
  if (fatal) std::rethrow_exception(fatal);

  std::size_t failed = 0;
  for (const auto& r : results) failed += r ? 0 : 1;
  if (static_cast<double>(failed) > opt.max_failed_fraction * static_cast<double>(opt.reps)) {
    throw Error(ErrorCode::too_many_failures,
                std::to_string(failed) + " of " + std::to_string(opt.reps) +
                    " bootstrap replicates failed; use the delta method");
  }

  const double alpha = 1.0 - opt.level;
  std::vector<EffectEstimate> out;
  for (std::size_t k = 0; k < shifts.size(); ++k) {
    std::vector<double> vals;
    vals.reserve(opt.reps - failed);
    for (const auto& r : results) {
      if (r) vals.push_back((*r)[k]);
    }
    std::sort(vals.begin(), vals.end());
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= static_cast<double>(vals.size());
    double ss = 0.0;
    for (double v : vals) ss += (v - mean) * (v - mean);

    EffectEstimate e;
    e.xi = shifts[k];
    e.point = point_estimates[k];
    e.se = vals.size() > 1 ? std::sqrt(ss / static_cast<double>(vals.size() - 1)) : 0.0;
    e.ci_low = sorted_quantile(vals, 0.5 * alpha);
    e.ci_high = sorted_quantile(vals, 1.0 - 0.5 * alpha);
    e.method = CiMethod::bootstrap;
    e.level = opt.level;
    e.n_boot = opt.reps;
    e.n_boot_failed = failed;
    out.push_back(e);
  }
  return out;
}

EffectEstimate bootstrap_ci(const Dataset& d, double sigma_u2, double xi,
                            const BootstrapOptions& opt) {
  const FitResult fit = fit_mle(d, std::nullopt, opt.fit);
  if (!fit.converged) {
    throw Error(ErrorCode::non_convergence, "full-data fit did not converge");
  }
  const double su2 = opt.mode == EffectMode::adjusted ? sigma_u2 : 0.0;
  const double point =
      indirect_effect_from_star(fit.params, su2, empirical_common_cause_dist(d), xi)
          .indirect;
  const double shifts[] = {xi};
  const double points[] = {point};
  return bootstrap_ci(d, shifts, points, closed_form_estimator(sigma_u2, {xi}, opt),
                      opt)
      .front();
}

}  // namespace medshift
