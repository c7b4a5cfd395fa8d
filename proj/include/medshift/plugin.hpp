#pragma once

#include <cstdint>
#include <optional>

#include "medshift/data.hpp"
#include "medshift/likelihood.hpp"

namespace medshift {

/// Comparator estimator: GLM fit by censored MLE (usually logit link, no
/// measurement-error layer), censored mediators imputed by truncated-normal
/// draws, then an empirical plug-in average over records.
struct PluginConfig {
  std::size_t j_draws = 100;
  double xi = 0.0;
  std::uint64_t seed = 1;
};

/// Censored-likelihood fit with the logistic link in the outcome terms.
FitResult fit_logit_censored(const Dataset& d,
                             std::optional<StarParams> init = std::nullopt);

/// (1/N) sum_i (E-hat[Y_i | M_i = m_i - xi, C_i] - y_i). Detected records use
/// their measured mediator; censored records average J draws from the
/// fitted mediator law truncated to (-inf, assay_limit]. Each censored
/// record's draws come from a substream keyed by its content and its rank
/// among identical records, so the estimate does not depend on record order.
double plugin_indirect_effect(const Dataset& d, const FitResult& fit,
                              const PluginConfig& cfg);

}  // namespace medshift
