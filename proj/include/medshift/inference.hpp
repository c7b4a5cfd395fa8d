#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "medshift/effects.hpp"
#include "medshift/likelihood.hpp"

namespace medshift {

enum class CiMethod { delta, bootstrap };
std::string_view ci_method_name(CiMethod m);

/// Whether the measurement-error correction is applied to the fit.
enum class EffectMode { adjusted, ignored };
std::string_view effect_mode_name(EffectMode m);

struct EffectEstimate {
  double xi = 0.0;
  double point = 0.0;
  double se = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  CiMethod method = CiMethod::delta;
  double level = 0.95;
  std::size_t n_boot = 0;
  std::size_t n_boot_failed = 0;

  double ci_low_clipped() const;
  double ci_high_clipped() const;
};

/// Analytic gradient of E[Y^(0, I=1)] at shift xi with respect to
/// (alpha0, alpha1, sigma_mstar2, beta0*, beta1*, beta2*), with the
/// measurement-error correction folded in. sigma_u2 = 0 gives the gradient
/// of the uncorrected closed form.
Vec6 expected_outcome_gradient(const StarParams& star, double sigma_u2,
                               const CommonCauseDist& pc, double xi);

/// Gradient of the indirect effect: expected_outcome_gradient at xi minus
/// the same at 0. P(C = c) is treated as a fixed constant.
Vec6 effect_gradient(const StarParams& star, double sigma_u2,
                     const CommonCauseDist& pc, double xi);

/// Delta-method interval using V = (n * info)^{-1}. The interval is the
/// symmetric normal one and is not clipped to [-1, 1].
EffectEstimate delta_ci(const FitResult& fit, double sigma_u2,
                        const CommonCauseDist& pc, double xi, double level = 0.95,
                        EffectMode mode = EffectMode::adjusted);

/// P(C = c) per bootstrap resample: held at the full-data value or
/// re-estimated from the resample.
enum class PcPolicy { fixed, resample };

struct BootstrapOptions {
  std::size_t reps = 2000;
  std::uint64_t seed = 1;
  PcPolicy pc_policy = PcPolicy::fixed;
  double level = 0.95;
  EffectMode mode = EffectMode::adjusted;
  FitOptions fit;
  double max_failed_fraction = 0.2;
};

/// Estimator evaluated on each resample: returns one effect per shift, or
/// throws medshift::Error to mark the replicate failed.
using ResampleEstimator = std::function<std::vector<double>(
    const Dataset& resample, const CommonCauseDist& pc, std::uint64_t rep_seed)>;

/// Default estimator: probit MLE, adjustment per opt.mode, closed-form effect.
ResampleEstimator closed_form_estimator(double sigma_u2, std::vector<double> shifts,
                                        const BootstrapOptions& opt);

/// Efron percentile bootstrap over records. Replicates run in parallel with
/// per-replicate RNG substreams; results do not depend on thread count.
/// Throws too_many_failures when more than max_failed_fraction fail.
std::vector<EffectEstimate> bootstrap_ci(const Dataset& d,
                                         std::span<const double> shifts,
                                         std::span<const double> point_estimates,
                                         const ResampleEstimator& estimator,
                                         const BootstrapOptions& opt);

/// Closed-form estimator bootstrap for a single shift.
EffectEstimate bootstrap_ci(const Dataset& d, double sigma_u2, double xi,
                            const BootstrapOptions& opt);

/// Type-7 (linear interpolation) quantile of sorted values.
double sorted_quantile(std::span<const double> sorted, double q);

}  // namespace medshift
