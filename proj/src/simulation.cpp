#include "medshift/simulation.hpp"

#include <cmath>
#include <exception>
#include <limits>
#include <optional>

#include "medshift/dist.hpp"
#include "medshift/error.hpp"
#include "medshift/likelihood.hpp"

namespace medshift {

void SimScenario::validate() const {
  if (!(sigma_m > 0.0)) throw Error(ErrorCode::validation, "scenario: sigma_m must be > 0");
  if (!(sigma_u >= 0.0)) throw Error(ErrorCode::validation, "scenario: sigma_u must be >= 0");
  if (!(p_c1 >= 0.0 && p_c1 <= 1.0)) {
    throw Error(ErrorCode::validation, "scenario: p_c1 must lie in [0, 1]");
  }
  if (n < 10) throw Error(ErrorCode::validation, "scenario: n must be >= 10");
  for (double xi : shifts) {
    if (!std::isfinite(xi)) throw Error(ErrorCode::validation, "scenario: shift not finite");
  }
}

double SimScenario::true_effect(double xi) const {
  AdjustedParams truth;
  truth.beta0 = beta[0];
  truth.beta1 = beta[1];
  truth.beta2 = beta[2];
  truth.sigma_m2 = sigma_m * sigma_m;
  truth.lambda = truth.sigma_m2 / (truth.sigma_m2 + sigma_u * sigma_u);
  return indirect_effect(truth, alpha, CommonCauseDist::from_p_c1(p_c1), xi).indirect;
}

SimScenario carna_scenario(std::size_t n) {
  SimScenario s;
  s.alpha = {1.57, 0.88};
  s.sigma_m = 0.58;
  s.sigma_u = 0.29;
  s.beta = {1.36, -1.11, 0.84};
  s.p_c1 = 0.69;
  s.n = n;
  s.assay_limit = std::log10(92.0);
  s.label = "caRNA";
  return s;
}

SimScenario sca_scenario(std::size_t n) {
  SimScenario s;
  s.alpha = {-0.02, 0.10};
  s.sigma_m = 0.65;
  s.sigma_u = 0.47;
  s.beta = {-0.22, -0.34, -0.16};
  s.p_c1 = 0.72;
  s.n = n;
  s.assay_limit = 0.0;
  s.label = "SCA";
  return s;
}

Dataset generate_dataset(const SimScenario& s, std::uint64_t seed) {
  s.validate();
  Rng rng(seed);
  const auto n_c1 = static_cast<std::size_t>(std::llround(static_cast<double>(s.n) * s.p_c1));
  const double limit = std::isfinite(s.assay_limit)
                           ? s.assay_limit
                           : std::numeric_limits<double>::lowest();
  std::vector<Record> records(s.n);
  for (std::size_t i = 0; i < s.n; ++i) {
    Record& r = records[i];
    r.c = i < n_c1 ? 1 : 0;
    const double m = s.alpha[0] + s.alpha[1] * r.c + s.sigma_m * rng.normal();
    const double m_star = m + s.sigma_u * rng.normal();
    const double prob = std_normal_cdf(s.beta[0] + s.beta[1] * m + s.beta[2] * r.c);
    r.y = rng.uniform() < prob ? 1 : 0;
    r.assay_limit = limit;
    if (m_star > limit) r.m_star = m_star;
  }
  return Dataset(std::move(records), s.sigma_u, s.label);
}

const SimCell& SimStudyResult::cell(const std::string& label, double shift,
                                    EffectMode mode) const {
  for (const auto& c : cells) {
    if (c.label == label && c.shift == shift && c.mode == mode) return c;
  }
  throw Error(ErrorCode::invalid_argument, "no study cell for " + label);
}

namespace {

struct RepOutcome {
  // [mode][shift]
  std::vector<std::vector<SimEstimate>> est;
};

RepOutcome run_replicate(const SimScenario& s, std::size_t rep, std::uint64_t seed,
                         const SimStudyOptions& opt) {
  RepOutcome out;
  out.est.assign(opt.modes.size(), std::vector<SimEstimate>(s.shifts.size()));
  for (std::size_t m = 0; m < opt.modes.size(); ++m) {
    for (std::size_t k = 0; k < s.shifts.size(); ++k) {
      SimEstimate& e = out.est[m][k];
      e.label = s.label;
      e.n = s.n;
      e.rep = rep;
      e.mode = opt.modes[m];
      e.shift = s.shifts[k];
    }
  }
  std::optional<FitResult> fit;
  CommonCauseDist pc;
  try {
    const Dataset d = generate_dataset(s, seed);
    pc = empirical_common_cause_dist(d);
    fit = fit_mle(d, std::nullopt, opt.fit);
  } catch (const Error&) {
    return out;
  }
  if (!fit->converged) return out;

  for (std::size_t m = 0; m < opt.modes.size(); ++m) {
    try {
      for (std::size_t k = 0; k < s.shifts.size(); ++k) {
        const EffectEstimate ci =
            delta_ci(*fit, s.sigma_u * s.sigma_u, pc, s.shifts[k], opt.level, opt.modes[m]);
        SimEstimate& e = out.est[m][k];
        e.estimate = ci.point;
        e.se = ci.se;
        e.ci_low = ci.ci_low;
        e.ci_high = ci.ci_high;
        e.ok = std::isfinite(ci.point) && std::isfinite(ci.se);
      }
    } catch (const Error&) {
      for (auto& e : out.est[m]) e.ok = false;
    }
  }
  return out;
}

}  // namespace

SimStudyResult run_study(const std::vector<SimScenario>& scenarios, std::size_t reps,
                         std::uint64_t seed, const SimStudyOptions& opt) {
  if (reps < 1) throw Error(ErrorCode::invalid_argument, "reps must be >= 1");
  if (opt.modes.empty()) throw Error(ErrorCode::invalid_argument, "no effect modes");
  SimStudyResult result;
  for (std::size_t si = 0; si < scenarios.size(); ++si) {
    const SimScenario& s = scenarios[si];
    s.validate();
    std::vector<RepOutcome> outcomes(reps);
    std::exception_ptr fatal;
    const auto n_reps = static_cast<std::ptrdiff_t>(reps);
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t r = 0; r < n_reps; ++r) {
      try {
        const auto rep = static_cast<std::size_t>(r);
        outcomes[rep] = run_replicate(s, rep, substream_seed(seed, si, rep), opt);
      } catch (...) {
#pragma omp critical(medshift_study_fatal)
        if (!fatal) fatal = std::current_exception();
      }
    }
    if (fatal) std::rethrow_exception(fatal);

    for (std::size_t m = 0; m < opt.modes.size(); ++m) {
      for (std::size_t k = 0; k < s.shifts.size(); ++k) {
        SimCell cell;
        cell.label = s.label;
        cell.n = s.n;
        cell.shift = s.shifts[k];
        cell.mode = opt.modes[m];
        cell.true_effect = s.true_effect(s.shifts[k]);
        double sum = 0.0;
        double sq = 0.0;
        std::size_t covered = 0;
        for (const auto& o : outcomes) {
          const SimEstimate& e = o.est[m][k];
          if (!e.ok) continue;
          ++cell.n_ok;
          const double err = e.estimate - cell.true_effect;
          sum += e.estimate;
          sq += err * err;
          if (e.ci_low <= cell.true_effect && cell.true_effect <= e.ci_high) ++covered;
        }
        cell.n_failed = reps - cell.n_ok;
        if (cell.n_ok == 0) {
          throw Error(ErrorCode::too_many_failures,
                      "every replicate failed for scenario " + s.label + " (" +
                          std::string(effect_mode_name(cell.mode)) + ")");
        }
        const double n_ok = static_cast<double>(cell.n_ok);
        cell.mean_estimate = sum / n_ok;
        cell.mean_bias = cell.mean_estimate - cell.true_effect;
        cell.rmse = std::sqrt(sq / n_ok);
        cell.coverage = static_cast<double>(covered) / n_ok;
        result.cells.push_back(cell);
      }
    }
    if (opt.keep_estimates) {
      for (const auto& o : outcomes) {
        for (const auto& per_mode : o.est) {
          result.estimates.insert(result.estimates.end(), per_mode.begin(), per_mode.end());
        }
      }
    }
  }
  return result;
}

}  // namespace medshift
