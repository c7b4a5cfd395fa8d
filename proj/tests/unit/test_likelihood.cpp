#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <random>

#include "medshift/error.hpp"
#include "medshift/likelihood.hpp"
#include "medshift/parallel.hpp"
#include "oracles.hpp"

using namespace medshift;

namespace {

const StarParams kTruth{1.57, 0.88, 0.58 * 0.58 + 0.29 * 0.29, 1.2, -0.95, 0.7};

nlohmann::json expected() {
  std::ifstream in(oracle::data_path("uncensored_expected.json"));
  return nlohmann::json::parse(in);
}

double loglik(const Dataset& d, const Vec6& v, Link link = Link::probit) {
  LikelihoodOptions opt;
  opt.link = link;
  return log_likelihood(d, StarParams::from_vector(v), opt);
}

}  // namespace

TEST_CASE("censored term matches adaptive quadrature of the joint probability") {
  const std::vector<StarParams> settings{
      kTruth,
      {0.0, 0.5, 1.0, 0.3, 1.4, -0.2},
      {2.0, -0.6, 0.05, -1.0, 3.0, 0.5},
      {-0.02, 0.10, 0.65 * 0.65 + 0.47 * 0.47, -0.22, -0.34, -0.16},
  };
  const Dataset d = oracle::simulate(50, kTruth, 1.9, 0.7, 1);
  for (Link link : {Link::probit, Link::logit}) {
    LikelihoodOptions opt;
    opt.link = link;
    const CensoredLikelihood lik(d, opt);
    for (const auto& p : settings) {
      for (int y : {0, 1}) {
        for (int c : {0, 1}) {
          for (double limit : {-1.0, 0.0, 1.9, 2.6, 4.0}) {
            const double ref = oracle::censored_probability(y, c, limit, p, link == Link::logit);
            const double got = lik.log_censored_integral(y, c, limit, p);
            CHECK(got == doctest::Approx(std::log(ref)).epsilon(1e-10));
          }
        }
      }
    }
  }
}

TEST_CASE("detected term is the binary log-likelihood plus the normal log-density") {
  std::vector<Record> recs{{1, 2.3, 1.0, 1}, {0, 1.4, 1.0, 0}};
  const Dataset d(recs, 0.0);
  const CensoredLikelihood lik(d);
  const StarParams& p = kTruth;
  for (std::size_t i = 0; i < 2; ++i) {
    const Record& r = d[i];
    const double eta = p.beta0_star + p.beta1_star * *r.m_star + p.beta2_star * r.c;
    const double ref = std::log(oracle::cdf(r.y ? eta : -eta)) +
                       std::log(oracle::normal_density(*r.m_star, p.alpha0 + p.alpha1 * r.c,
                                                       std::sqrt(p.sigma_mstar2)));
    CHECK(lik.record_term(i, p) == doctest::Approx(ref).epsilon(1e-13));
  }
}

TEST_CASE("grouped parallel kernel equals the serial reference") {
  const Dataset d = oracle::simulate(2000, kTruth, 1.9, 0.69, 2);
  const CensoredLikelihood lik(d);
  const LoglikValue ref = lik.evaluate_reference(kTruth);
  for (int threads : {1, 2, 5}) {
    set_threads(threads);
    const LoglikValue got = lik.evaluate(kTruth);
    CHECK(got.value == ref.value);
    CHECK(got.n_floored == ref.n_floored);
  }
  set_threads(0);
}

TEST_CASE("log-likelihood is invariant to record order") {
  const Dataset d = oracle::simulate(500, kTruth, 1.9, 0.69, 3);
  std::vector<Record> shuffled = d.records();
  std::mt19937_64 gen(4);
  std::shuffle(shuffled.begin(), shuffled.end(), gen);
  const Dataset e(shuffled, 0.0);
  CHECK(log_likelihood(e, kTruth) == doctest::Approx(log_likelihood(d, kTruth)).epsilon(1e-13));
}

TEST_CASE("doubling the quadrature nodes changes nothing") {
  const Dataset d = oracle::simulate(400, kTruth, 2.2, 0.69, 5);
  for (const StarParams& p : {kTruth, StarParams{1.0, 0.3, 0.2, 2.0, -2.5, 0.1}}) {
    LikelihoodOptions a, b;
    a.quad_nodes = 64;
    b.quad_nodes = 128;
    CHECK(std::abs(log_likelihood(d, p, a) - log_likelihood(d, p, b)) < 1e-8);
  }
}

TEST_CASE("vanishing censored mass is floored and counted") {
  std::vector<Record> recs{{1, 2.0, 1.0, 0}, {0, 1.5, 1.0, 1}, {1, std::nullopt, -60.0, 0}};
  const Dataset d(recs, 0.0);
  const CensoredLikelihood lik(d);
  const LoglikValue v = lik.evaluate(StarParams{1.5, 0.5, 0.25, 0.0, 1.0, 0.0});
  CHECK(std::isfinite(v.value));
  CHECK(v.n_floored == 1);
}

TEST_CASE("unconstrained coordinates round trip") {
  const Vec6 u = to_unconstrained(kTruth);
  const StarParams back = from_unconstrained(u);
  CHECK(back.sigma_mstar2 == doctest::Approx(kTruth.sigma_mstar2).epsilon(1e-15));
  CHECK(back.beta1_star == kTruth.beta1_star);
  CHECK(StarParams::from_vector(kTruth.to_vector()).alpha1 == kTruth.alpha1);
}

TEST_CASE("fully detected data reproduces the frozen OLS and GLM fits") {
  const auto ex = expected();
  const Dataset d = load_csv(oracle::data_path("uncensored.csv"), 0.0);
  const auto alpha = ex["alpha"].get<std::vector<double>>();
  const auto beta = ex["probit"].get<std::vector<double>>();

  const StarParams init = default_init(d);
  CHECK(init.alpha0 == doctest::Approx(alpha[0]).epsilon(1e-10));
  CHECK(init.alpha1 == doctest::Approx(alpha[1]).epsilon(1e-10));
  CHECK(init.sigma_mstar2 == doctest::Approx(ex["sigma_mstar2_mle"].get<double>()).epsilon(1e-10));
  CHECK(init.beta1_star == doctest::Approx(beta[1]).epsilon(1e-7));

  // Start away from the optimum so the optimizer does the work.
  StarParams start{0.0, 0.0, 1.0, 0.0, 0.0, 0.0};
  const FitResult fit = fit_mle(d, start);
  REQUIRE(fit.converged);
  const Vec6 v = fit.params.to_vector();
  const std::vector<double> ref{alpha[0], alpha[1], ex["sigma_mstar2_mle"].get<double>(),
                                beta[0], beta[1], beta[2]};
  for (int k = 0; k < 6; ++k) CHECK(v[k] == doctest::Approx(ref[k]).epsilon(1e-5));
  CHECK(fit.loglik == doctest::Approx(ex["probit_loglik"].get<double>() +
                                      ex["ols_loglik"].get<double>()).epsilon(1e-9));
  CHECK(fit.n_used == 300);

  FitOptions lo;
  lo.link = Link::logit;
  const FitResult lf = fit_mle(d, std::nullopt, lo);
  REQUIRE(lf.converged);
  const auto lb = ex["logit"].get<std::vector<double>>();
  CHECK(lf.params.beta0_star == doctest::Approx(lb[0]).epsilon(1e-5));
  CHECK(lf.params.beta1_star == doctest::Approx(lb[1]).epsilon(1e-5));
  CHECK(lf.params.beta2_star == doctest::Approx(lb[2]).epsilon(1e-5));
}

TEST_CASE("observed information matches a finite-difference Hessian") {
  const Dataset d = oracle::simulate(600, kTruth, 1.9, 0.69, 6);
  const FitResult fit = fit_mle(d);
  REQUIRE(fit.converged);
  CHECK(fit.info_psd);
  const Vec6 x = fit.params.to_vector();
  const double n = static_cast<double>(d.size());
  for (int a = 0; a < 6; ++a) {
    for (int b = a; b < 6; ++b) {
      const double h = 1e-3 * std::max(1.0, std::abs(x[b]));
      auto da = [&](Vec6 v) { return oracle::five_point([&](const Vec6& w) { return loglik(d, w); }, v, a, h); };
      const double hess = oracle::five_point(da, x, b, h) / n;
      const double got = fit.info_matrix(a, b);
      CHECK(std::abs(got + hess) < 2e-4 * std::max(1.0, std::abs(hess)));
      CHECK(fit.info_matrix(a, b) == fit.info_matrix(b, a));
    }
  }
}

TEST_CASE("maximum likelihood recovers the generating parameters") {
  const Dataset d = oracle::simulate(20000, kTruth, 1.9, 0.69, 7);
  CHECK(d.n_censored() > 2000);
  const FitResult fit = fit_mle(d);
  REQUIRE(fit.converged);
  const Mat6 cov = (static_cast<double>(d.size()) * fit.info_matrix).inverse();
  const Vec6 est = fit.params.to_vector();
  const Vec6 truth = kTruth.to_vector();
  for (int k = 0; k < 6; ++k) {
    CHECK(std::abs(est[k] - truth[k]) < 4.0 * std::sqrt(cov(k, k)));
  }
}

TEST_CASE("initialization needs detected mediators") {
  std::vector<Record> recs{{1, std::nullopt, 1.0, 0}, {0, 2.0, 1.0, 1}, {1, std::nullopt, 1.0, 1},
                           {0, 1.5, 1.0, 0}};
  const Dataset d(recs, 0.0);
  try {
    default_init(d);
    FAIL("expected init_error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::init_error);
  }
}
