#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "medshift/data.hpp"
#include "medshift/effects.hpp"
#include "medshift/inference.hpp"

namespace medshift {

/// Data-generating design: C with a fixed share of ones,
/// M | c ~ N(a0 + a1 c, sigma_m^2), M* = M + U with U ~ N(0, sigma_u^2),
/// Y ~ Bernoulli(Phi(b0 + b1 M + b2 c)) on the true mediator, and M*
/// left-censored at assay_limit (non-finite means no censoring).
struct SimScenario {
  Alpha alpha{0.0, 0.0};
  double sigma_m = 1.0;
  double sigma_u = 0.0;
  Beta beta{0.0, 0.0, 0.0};
  double p_c1 = 0.5;
  std::size_t n = 100;
  double assay_limit = 0.0;
  std::vector<double> shifts{0.5, 1.0, 1.5, 2.0};
  std::string label;

  void validate() const;
  /// Indirect effect at the scenario's true parameters.
  double true_effect(double xi) const;
};

/// Cell-associated RNA design; assay limit defaults to log10(92).
SimScenario carna_scenario(std::size_t n = 104);
/// Single-copy plasma RNA design; assay limit defaults to log10(1) = 0.
SimScenario sca_scenario(std::size_t n = 88);

Dataset generate_dataset(const SimScenario& s, std::uint64_t seed);

struct SimStudyOptions {
  std::vector<EffectMode> modes{EffectMode::ignored, EffectMode::adjusted};
  double level = 0.95;
  FitOptions fit;
  bool keep_estimates = false;
};

struct SimCell {
  std::string label;
  std::size_t n = 0;
  double shift = 0.0;
  EffectMode mode = EffectMode::adjusted;
  double true_effect = 0.0;
  double mean_estimate = 0.0;
  double mean_bias = 0.0;
  double rmse = 0.0;
  double coverage = 0.0;
  std::size_t n_ok = 0;
  std::size_t n_failed = 0;
};

struct SimEstimate {
  std::string label;
  std::size_t n = 0;
  std::size_t rep = 0;
  EffectMode mode = EffectMode::adjusted;
  double shift = 0.0;
  bool ok = false;
  double estimate = 0.0;
  double se = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

struct SimStudyResult {
  std::vector<SimCell> cells;
  std::vector<SimEstimate> estimates;

  const SimCell& cell(const std::string& label, double shift, EffectMode mode) const;
};

/// Runs reps replicates per scenario: generate, fit, delta CI per mode and
/// shift. Replicates whose fit or interval fails are counted in n_failed
/// and excluded. Replicates run in parallel with per-replicate substreams;
/// aggregation is in replicate order, so results do not depend on threads.
SimStudyResult run_study(const std::vector<SimScenario>& scenarios, std::size_t reps,
                         std::uint64_t seed, const SimStudyOptions& opt = {});

}  // namespace medshift
