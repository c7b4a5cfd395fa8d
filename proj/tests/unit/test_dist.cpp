#include <doctest.h>

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <set>
#include <vector>

#include "medshift/dist.hpp"
#include "medshift/error.hpp"
#include "oracles.hpp"

using namespace medshift;

TEST_CASE("normal cdf matches 50-digit reference") {
  for (double x = -37.0; x <= 8.0; x += 0.37) {
    const double ref = oracle::cdf(x);
    CHECK(std_normal_cdf(x) == doctest::Approx(ref).epsilon(1e-13));
  }
  CHECK(std_normal_cdf(0.0) == 0.5);
  CHECK_THROWS_AS(std_normal_cdf(std::nan("")), Error);
  CHECK_THROWS_AS(std_normal_cdf(INFINITY), Error);
}

TEST_CASE("log cdf stays accurate where the cdf underflows") {
  std::vector<double> xs;
  for (double x = -300.0; x <= 6.0; x += 3.7) xs.push_back(x);
  xs.insert(xs.end(), {-37.5, -38.0, -36.9, -40.0, -1e3});
  for (double x : xs) {
    const double ref = oracle::log_cdf(x);
    CHECK(log_std_normal_cdf(x) == doctest::Approx(ref).epsilon(1e-12));
  }
  CHECK(log_std_normal_cdf(-INFINITY) == -INFINITY);
  CHECK(log_std_normal_cdf(INFINITY) == 0.0);
}

TEST_CASE("pdf") {
  for (double x : {-5.0, -1.0, 0.0, 0.3, 2.5}) {
    CHECK(std_normal_pdf(x) == doctest::Approx(oracle::pdf(x)).epsilon(1e-14));
  }
}

TEST_CASE("quantile inverts the cdf across the whole range") {
  for (double lp = -700.0; lp < -1e-3; lp += 7.3) {
    const double p = std::exp(lp);
    const double z = std_normal_quantile(p);
    CHECK(oracle::log_cdf(z) == doctest::Approx(lp).epsilon(1e-12));
  }
  for (double p : {1e-10, 0.02425, 0.1, 0.5, 0.7, 0.97575, 0.999, 1.0 - 1e-12}) {
    CHECK(oracle::cdf(std_normal_quantile(p)) == doctest::Approx(p).epsilon(1e-13));
  }
  CHECK(std_normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(std_normal_quantile(0.3) == doctest::Approx(-std_normal_quantile(0.7)).epsilon(1e-14));
  CHECK_THROWS_AS(std_normal_quantile(0.0), Error);
  CHECK_THROWS_AS(std_normal_quantile(1.0), Error);
}

TEST_CASE("probit-normal integral agrees with adaptive quadrature") {
  for (double mu : {-3.0, -0.4, 0.0, 1.1, 2.7}) {
    for (double sigma : {0.1, 0.5, 1.0, 2.2, 4.0}) {
      auto f = [&](double t) { return oracle::cdf_d(mu + sigma * t) * oracle::normal_density(t, 0, 1); };
      const double ref = oracle::integrate(f, -INFINITY, 0.0) + oracle::integrate(f, 0.0, INFINITY);
      CHECK(std::abs(probit_normal_integral(mu, sigma) - ref) < 1e-10);
    }
  }
  CHECK(probit_normal_integral(0.8, 0.0) == doctest::Approx(std_normal_cdf(0.8)));
  CHECK_THROWS_AS(probit_normal_integral(0.0, -1.0), Error);
}

TEST_CASE("conditional mediator law matches the posterior by quadrature") {
  const double a0 = 1.5, a1 = 0.8;
  for (double sm2 : {0.3, 0.5}) {
    for (double su2 : {0.04, 0.2}) {
      for (int c : {0, 1}) {
        for (double ms : {0.4, 2.1}) {
          const double lambda = sm2 / (sm2 + su2);
          const NormalMoments got =
              conditional_mediator_given_measurement(ms, c, a0, a1, lambda, su2);
          const double mu = a0 + a1 * c;
          auto post = [&](double m) {
            return oracle::normal_density(m, mu, std::sqrt(sm2)) *
                   oracle::normal_density(ms, m, std::sqrt(su2));
          };
          const double z = oracle::integrate(post, -INFINITY, INFINITY);
          const double mean =
              oracle::integrate([&](double m) { return m * post(m); }, -INFINITY, INFINITY) / z;
          const double var = oracle::integrate([&](double m) { return (m - mean) * (m - mean) * post(m); },
                                               -INFINITY, INFINITY) / z;
          CHECK(got.mean == doctest::Approx(mean).epsilon(1e-10));
          CHECK(got.variance == doctest::Approx(var).epsilon(1e-9));
        }
      }
    }
  }
  const NormalMoments exact = conditional_mediator_given_measurement(1.9, 1, a0, a1, 1.0, 0.0);
  CHECK(exact.mean == 1.9);
  CHECK(exact.variance == 0.0);
}

TEST_CASE("rng streams are reproducible and well spread") {
  Rng a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) {
    const double u = a.uniform();
    CHECK(u == b.uniform());
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
  CHECK(a.next_u64() != c.next_u64());

  Rng r(7);
  const int n = 200000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    sum += z;
    sq += z * z;
  }
  const double mean = sum / n;
  CHECK(std::abs(mean) < 4.0 / std::sqrt(n));
  CHECK(std::abs(sq / n - mean * mean - 1.0) < 4.0 * std::sqrt(2.0 / n));

  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) ++counts[r.index(7)];
  for (int k : counts) CHECK(std::abs(k - 10000) < 450);
}

TEST_CASE("substream seeds differ across keys") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t a = 0; a < 50; ++a) {
    for (std::uint64_t b = 0; b < 4; ++b) seen.insert(substream_seed(9, a, b));
  }
  CHECK(seen.size() == 200);
  CHECK(substream_seed(9, 3, 1) == substream_seed(9, 3, 1));
  CHECK(substream_seed(9, 3, 1) != substream_seed(10, 3, 1));
}

TEST_CASE("truncated normal draws respect the bound and the truncated mean") {
  const NormalSpec law{1.2, 0.6};
  for (double upper : {0.3, 1.2, 2.5}) {
    Rng rng(11);
    const int n = 100000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
      const double v = truncated_normal_sample(law, upper, rng);
      REQUIRE(v <= upper);
      sum += v;
      sq += v * v;
    }
    const double b = (upper - law.mean) / law.sd;
    const double ratio = oracle::pdf(b) / oracle::cdf(b);
    const double mean = law.mean - law.sd * ratio;
    const double var = law.sd * law.sd * (1.0 - b * ratio - ratio * ratio);
    CHECK(std::abs(sum / n - mean) < 4.0 * std::sqrt(var / n));
    CHECK(std::abs(sq / n - (sum / n) * (sum / n) - var) < 0.02 * var);
  }
}

TEST_CASE("truncated normal deep in the tail") {
  const NormalSpec law{0.0, 1.0};
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const double v = truncated_normal_sample(law, -30.0, rng);
    CHECK(v <= -30.0);
    CHECK(v > -30.5);
  }
  try {
    truncated_normal_sample(law, -40.0, rng);
    FAIL("expected far_tail");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::far_tail);
  }
  CHECK_THROWS_AS(truncated_normal_sample(NormalSpec{0.0, 0.0}, 1.0, rng), Error);
  CHECK_THROWS_AS(truncated_normal_sample(law, INFINITY, rng), Error);
}
