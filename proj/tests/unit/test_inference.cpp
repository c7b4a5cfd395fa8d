#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <random>

#include "medshift/error.hpp"
#include "medshift/inference.hpp"
#include "medshift/parallel.hpp"
#include "oracles.hpp"

using namespace medshift;

namespace {

const StarParams kTruth{1.57, 0.88, 0.58 * 0.58 + 0.29 * 0.29, 1.2, -0.95, 0.7};
constexpr double kSu2 = 0.29 * 0.29;

std::vector<StarParams> random_points(int n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<StarParams> out;
  while (static_cast<int>(out.size()) < n) {
    StarParams p{1.5 + u(gen), 0.9 * u(gen), 0.2 + 0.4 * (u(gen) + 1), u(gen), 0.8 * u(gen), u(gen)};
    // Stay inside the region where the correction is defined.
    const double lambda = (p.sigma_mstar2 - kSu2) / p.sigma_mstar2;
    if (lambda * lambda - p.beta1_star * p.beta1_star * lambda * kSu2 > 0.05) out.push_back(p);
  }
  return out;
}

}  // namespace

TEST_CASE("effect gradient matches five-point differences") {
  for (double p1 : {0.31, 0.69}) {
    const CommonCauseDist pc = CommonCauseDist::from_p_c1(p1);
    for (const StarParams& p : random_points(20, 3)) {
      for (double su2 : {0.0, kSu2}) {
        for (double xi : {0.5, 1.0, 2.0}) {
          const Vec6 g = effect_gradient(p, su2, pc, xi);
          auto f = [&](const Vec6& v) {
            return indirect_effect_from_star(StarParams::from_vector(v), su2, pc, xi).indirect;
          };
          for (int k = 0; k < 6; ++k) {
            const double fd = oracle::five_point(f, p.to_vector(), k, 1e-4);
            CHECK(std::abs(g[k] - fd) <= 1e-7 * std::max(1.0, std::abs(fd)));
          }
        }
      }
    }
  }
  CHECK(effect_gradient(kTruth, kSu2, CommonCauseDist::from_p_c1(0.5), 0.0).isZero(0.0));
}

TEST_CASE("delta interval is g'(nI)^{-1}g around the point estimate") {
  const Dataset d = oracle::simulate(800, kTruth, 1.9, 0.69, 11, 0.29);
  const FitResult fit = fit_mle(d);
  REQUIRE(fit.converged);
  const CommonCauseDist pc = empirical_common_cause_dist(d);
  for (EffectMode mode : {EffectMode::adjusted, EffectMode::ignored}) {
    const double su2 = mode == EffectMode::adjusted ? kSu2 : 0.0;
    const EffectEstimate e = delta_ci(fit, kSu2, pc, 1.0, 0.9, mode);
    const Vec6 g = effect_gradient(fit.params, su2, pc, 1.0);
    const Mat6 v = (800.0 * fit.info_matrix).inverse();
    const double se = std::sqrt(g.dot(v * g));
    CHECK(e.se == doctest::Approx(se).epsilon(1e-9));
    CHECK(e.point == doctest::Approx(indirect_effect_from_star(fit.params, su2, pc, 1.0).indirect));
    const double z = 1.6448536269514722;
    CHECK(e.ci_high - e.point == doctest::Approx(z * se).epsilon(1e-9));
    CHECK(e.point - e.ci_low == doctest::Approx(z * se).epsilon(1e-9));
    CHECK(e.method == CiMethod::delta);
  }
  const EffectEstimate zero = delta_ci(fit, kSu2, pc, 0.0);
  CHECK(zero.point == 0.0);
  CHECK(zero.se == 0.0);
}

TEST_CASE("delta interval refuses unusable fits") {
  FitResult fit;
  fit.params = kTruth;
  fit.n_used = 100;
  fit.info_matrix = Mat6::Identity();
  fit.info_psd = true;
  fit.converged = false;
  const CommonCauseDist pc = CommonCauseDist::from_p_c1(0.5);
  try {
    delta_ci(fit, kSu2, pc, 1.0);
    FAIL("expected non_convergence");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::non_convergence);
  }
  fit.converged = true;
  fit.info_matrix(4, 4) = 0.0;
  try {
    delta_ci(fit, kSu2, pc, 1.0);
    FAIL("expected singular_information");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::singular_information);
    CHECK(std::string(e.what()).find("beta1_star") != std::string::npos);
  }
}

TEST_CASE("clipping only touches the reported copy") {
  EffectEstimate e;
  e.ci_low = -1.3;
  e.ci_high = 1.02;
  CHECK(e.ci_low_clipped() == -1.0);
  CHECK(e.ci_high_clipped() == 1.0);
  CHECK(e.ci_high == 1.02);
}

TEST_CASE("type-7 quantiles") {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  CHECK(sorted_quantile(v, 0.25) == doctest::Approx(1.75));
  CHECK(sorted_quantile(v, 0.5) == doctest::Approx(2.5));
  CHECK(sorted_quantile(v, 0.0) == 1.0);
  CHECK(sorted_quantile(v, 1.0) == 4.0);
  const std::vector<double> one{7.0};
  CHECK(sorted_quantile(one, 0.3) == 7.0);
}

namespace {

// Share of y = 1 in the resample: cheap, and its bootstrap law is known.
struct Recording {
  std::mutex mu;
  std::vector<double> seen;
  ResampleEstimator estimator() {
    return [this](const Dataset& r, const CommonCauseDist&, std::uint64_t) {
      double s = 0.0;
      for (const auto& rec : r.records()) s += rec.y;
      const double v = s / static_cast<double>(r.size());
      std::lock_guard<std::mutex> lock(mu);
      seen.push_back(v);
      return std::vector<double>{v};
    };
  }
};

}  // namespace

TEST_CASE("percentile interval uses the replicate quantiles") {
  const Dataset d = oracle::simulate(300, kTruth, 1.9, 0.69, 12);
  BootstrapOptions opt;
  opt.reps = 999;
  opt.seed = 5;
  opt.level = 0.9;
  Recording rec;
  const double shifts[] = {1.0};
  const double points[] = {0.5};
  const auto out = bootstrap_ci(d, shifts, points, rec.estimator(), opt);
  REQUIRE(rec.seen.size() == 999);
  std::sort(rec.seen.begin(), rec.seen.end());
  // numpy.quantile(default) on the same values
  auto q7 = [&](double q) {
    const double h = (rec.seen.size() - 1) * q;
    const auto lo = static_cast<std::size_t>(h);
    return rec.seen[lo] + (h - lo) * (rec.seen[std::min(lo + 1, rec.seen.size() - 1)] - rec.seen[lo]);
  };
  CHECK(out[0].ci_low == q7(0.05));
  CHECK(out[0].ci_high == q7(0.95));
  CHECK(out[0].point == 0.5);
  CHECK(out[0].n_boot == 999);
  CHECK(out[0].n_boot_failed == 0);
  double ybar = 0.0;
  for (const auto& r : d.records()) ybar += r.y;
  ybar /= d.size();
  // bootstrap SE of a proportion
  CHECK(out[0].se == doctest::Approx(std::sqrt(ybar * (1 - ybar) / d.size())).epsilon(0.1));
}

TEST_CASE("bootstrap is reproducible and thread-count independent") {
  const Dataset d = oracle::simulate(200, kTruth, 1.9, 0.69, 13, 0.29);
  BootstrapOptions opt;
  opt.reps = 120;
  opt.seed = 77;
  set_threads(1);
  const EffectEstimate a = bootstrap_ci(d, kSu2, 1.0, opt);
  set_threads(3);
  const EffectEstimate b = bootstrap_ci(d, kSu2, 1.0, opt);
  set_threads(0);
  CHECK(a.ci_low == b.ci_low);
  CHECK(a.ci_high == b.ci_high);
  CHECK(a.se == b.se);
  CHECK(a.n_boot_failed == b.n_boot_failed);
  opt.seed = 78;
  const EffectEstimate c = bootstrap_ci(d, kSu2, 1.0, opt);
  CHECK(c.ci_low != a.ci_low);
  CHECK(a.ci_low < a.point);
  CHECK(a.point < a.ci_high);
}

TEST_CASE("common-cause policy") {
  const Dataset d = oracle::simulate(150, kTruth, 1.9, 0.4, 14);
  const double full = empirical_common_cause_dist(d).p_c1();
  for (PcPolicy policy : {PcPolicy::fixed, PcPolicy::resample}) {
    BootstrapOptions opt;
    opt.reps = 100;
    opt.pc_policy = policy;
    std::mutex mu;
    std::vector<double> seen;
    ResampleEstimator est = [&](const Dataset&, const CommonCauseDist& pc, std::uint64_t) {
      std::lock_guard<std::mutex> lock(mu);
      seen.push_back(pc.p_c1());
      return std::vector<double>{pc.p_c1()};
    };
    const double shifts[] = {1.0};
    const double points[] = {full};
    bootstrap_ci(d, shifts, points, est, opt);
    const bool all_fixed = std::all_of(seen.begin(), seen.end(), [&](double v) { return v == full; });
    CHECK(all_fixed == (policy == PcPolicy::fixed));
  }
}

TEST_CASE("failed replicates are counted, and too many are an error") {
  const Dataset d = oracle::simulate(100, kTruth, 1.9, 0.69, 15);
  const double shifts[] = {1.0};
  const double points[] = {0.0};
  auto failing = [](double share) {
    return ResampleEstimator([share](const Dataset&, const CommonCauseDist&, std::uint64_t seed) {
      if (static_cast<double>(seed % 1000) < 1000 * share) {
        throw Error(ErrorCode::non_convergence, "synthetic");
      }
      return std::vector<double>{static_cast<double>(seed % 17)};
    });
  };
  BootstrapOptions opt;
  opt.reps = 400;
  const auto ok = bootstrap_ci(d, shifts, points, failing(0.1), opt);
  CHECK(ok[0].n_boot_failed > 10);
  CHECK(ok[0].n_boot_failed < 80);
  try {
    bootstrap_ci(d, shifts, points, failing(0.5), opt);
    FAIL("expected too_many_failures");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::too_many_failures);
  }
  opt.reps = 99;
  CHECK_THROWS_AS(bootstrap_ci(d, shifts, points, failing(0.0), opt), Error);
}
