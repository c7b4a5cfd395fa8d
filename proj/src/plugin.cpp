#include "medshift/plugin.hpp"

#include <bit>
#include <cmath>
#include <exception>
#include <map>
#include <tuple>
#include <vector>

#include "medshift/dist.hpp"
#include "medshift/error.hpp"
#include "medshift/parallel.hpp"

namespace medshift {

FitResult fit_logit_censored(const Dataset& d, std::optional<StarParams> init) {
  FitOptions opt;
  opt.link = Link::logit;
  return fit_mle(d, init, opt);
}

double plugin_indirect_effect(const Dataset& d, const FitResult& fit,
                              const PluginConfig& cfg) {
  if (cfg.j_draws < 1) {
    throw Error(ErrorCode::invalid_argument, "j_draws must be >= 1");
  }
  if (!fit.converged) {
    throw Error(ErrorCode::non_convergence, "plugin estimator needs a converged fit");
  }
  const StarParams& p = fit.params;
  const Link link = fit.link;
  const double sd = std::sqrt(p.sigma_mstar2);

  // Substream key for each censored record: (y, c, limit bits, duplicate rank).
  const auto n = static_cast<std::ptrdiff_t>(d.size());
  std::vector<std::uint64_t> stream(d.size(), 0);
  std::map<std::tuple<int, int, double>, std::uint64_t> seen;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const Record& r = d[i];
    if (r.detected()) continue;
    const std::uint64_t rank = seen[{r.y, r.c, r.assay_limit}]++;
    const std::uint64_t key = std::bit_cast<std::uint64_t>(r.assay_limit) ^
                              (static_cast<std::uint64_t>(r.y) << 1) ^
                              static_cast<std::uint64_t>(r.c);
    stream[i] = substream_seed(cfg.seed, key, rank);
  }

  std::vector<double> terms(d.size());
  std::exception_ptr err;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < n; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    const Record& r = d[i];
    try {
      auto predict = [&](double m) {
        return link_cdf(link, p.beta0_star + p.beta1_star * (m - cfg.xi) +
                                  p.beta2_star * r.c);
      };
      double expected = 0.0;
      if (r.detected()) {
        expected = predict(*r.m_star);
      } else {
        Rng rng(stream[i]);
        const NormalSpec law{p.alpha0 + p.alpha1 * r.c, sd};
        std::vector<double> draws(cfg.j_draws);
        for (auto& v : draws) v = predict(truncated_normal_sample(law, r.assay_limit, rng));
        expected = pairwise_sum(draws) / static_cast<double>(cfg.j_draws);
      }
      terms[i] = expected - r.y;
    } catch (...) {
#pragma omp critical(medshift_plugin_error)
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
  return pairwise_sum(terms) / static_cast<double>(d.size());
}

}  // namespace medshift
