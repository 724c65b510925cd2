#include <cmath>
#include <random>

#include "doctest.h"
#include "hjflow/error.hpp"
#include "hjflow/laplace.hpp"
#include "hjflow/tataru.hpp"
#include "support.hpp"

using namespace hjflow;
using namespace hjflow::testing;

TEST_CASE("discrete exponential measure examples") {
  const DiscreteMeasure one = discrete_exp_measure(1, 1);
  REQUIRE(one.size() == 1);
  CHECK(one.times()[0] == 1.0);
  CHECK(one.weights()[0] == doctest::Approx(1.0));
  CHECK(std::exp(log_exp_normalizer(1, 1)) == doctest::Approx(std::exp(1.0)));

  const DiscreteMeasure two = discrete_exp_measure(1, 2);
  REQUIRE(two.size() == 4);
  double z = 0.0;
  for (int i = 1; i <= 4; ++i) z += std::exp(-0.5 * i);
  for (int i = 1; i <= 4; ++i) {
    CHECK(two.times()[i - 1] == doctest::Approx(0.5 * i));
    CHECK(two.weights()[i - 1] == doctest::Approx(std::exp(-0.5 * i) / z).epsilon(1e-14));
  }
  for (auto [m, n] : {std::pair{3, 7}, {50, 40}, {1, 30}}) {
    const DiscreteMeasure mu = discrete_exp_measure(m, n);
    double s = 0.0;
    for (double w : mu.weights()) s += w;
    CHECK(std::abs(s - 1.0) <= 1e-12);
  }
  CHECK_THROWS_AS(discrete_exp_measure(0, 3), Error);
}

TEST_CASE("constant integrands are exact") {
  for (int m : {1, 10, 100, 1000, 10000}) {
    const double c = 0.375;
    const auto h = [c](double) { return c; };
    CHECK(std::abs(laplace_discrete(h, m, 10).neg_log - c) <= 1e-10);
    CHECK(std::abs(laplace_continuous(h, m, 3.0).neg_log - c) <= 1e-10);
    const auto zero = [](double) { return 0.0; };
    CHECK(std::abs(laplace_discrete(zero, m, 7).log_lambda) <= 1e-12);
    CHECK(std::abs(laplace_continuous(zero, m, 2.0).log_lambda) <= 1e-12);
  }
  CHECK_THROWS_AS(laplace_discrete([](double) { return -1.0; }, 2, 2), Error);
}

TEST_CASE("lambda on a critical point") {
  const SpacePoint o = pt(0);
  for (int m : {1, 7, 300}) {
    const LaplaceValue d = lambda_discrete(ou(), 0.5, m, 5, o, o);
    CHECK(d.neg_log == doctest::Approx(0.375).epsilon(1e-12));
    CHECK(d.log_lambda == doctest::Approx(-m * 0.375).epsilon(1e-12));
    CHECK(lambda_continuous(ou(), 0.5, m, o, o).neg_log ==
          doctest::Approx(0.375).epsilon(1e-12));
  }
}

TEST_CASE("continuous quadrature against a closed form") {
  // h(t) = t: int (m+1) e^{-(m+1)t} e^{-m t} dt = (m+1)/(2m+1).
  for (int m : {1, 20, 2000}) {
    const LaplaceValue v = laplace_continuous([](double t) { return t; }, m, 4.0);
    const double r = (m + 1.0) / (2.0 * m + 1.0);
    const double cut = std::exp(-(2.0 * m + 1) * 4.0);
    const double quad = r * (1 - cut);
    // estimated tail is e^{-(m+1)T} e^{-m h(T)} = cut
    CHECK(v.log_lambda == doctest::Approx(std::log(quad + cut)).epsilon(1e-12));
    CHECK(v.log_tail_estimate == doctest::Approx(-(2.0 * m + 1) * 4.0));
    CHECK(v.log_tail_bound == doctest::Approx(-(m + 1.0) * 4.0));
    // the true integral lies in the bracket [quad, quad + bound]
    CHECK(std::log(r) >= std::log(quad));
    CHECK(std::log(r) <= std::log(quad + std::exp(v.log_tail_bound)));
  }
}

TEST_CASE("OU instance against the smoothed Tataru distance") {
  const SpacePoint pi = pt(0), mu = pt(3);
  const double target = tataru_eps(ou(), 0.1, pi, mu).value;
  CHECK(std::abs(lambda_discrete(ou(), 0.1, 50, 40, pi, mu).neg_log - target) < 0.15);

  double prev = INFINITY;
  for (int m : {10, 100, 1000}) {
    const double err = std::abs(lambda_continuous(ou(), 0.1, m, pi, mu).neg_log - target);
    CHECK(err < prev);
    prev = err;
  }
}

TEST_CASE("Laplace sandwich") {
  std::mt19937_64 rng(21);
  for (const ModelSpace& s : {ou(), quartic(), double_well(), quantile_ou(8)}) {
    for (int k = 0; k < 5; ++k) {
      const SpacePoint pi = s.sample(rng, {-2, 2}), mu = s.sample(rng, {-2, 2});
      const double eps = 0.05;
      const double inf = tataru_eps(s, eps, pi, mu).value;
      for (int m : {5, 50}) {
        const int n = 20;
        // Continuous: Lambda <= (m+1) e^{-m inf} int e^{-t} dt.
        const double cont = lambda_continuous(s, eps, m, pi, mu).neg_log;
        CHECK(cont >= inf - std::log(m + 1.0) / m - 1e-9);
        // Discrete: Lambda <= e^{-m inf} c_{m+1,n} sum_i e^{-i/n}.
        const double slack = log_exp_normalizer(m + 1, n) - log_exp_normalizer(1, n);
        const double disc = lambda_discrete(s, eps, m, n, pi, mu).neg_log;
        CHECK(disc >= inf - slack / m - 1e-9);
        // Upper: any single atom bounds Lambda from below.
        FlowPath path(s, mu);
        for (int i : {1, 10, 25}) {
          const double t = double(i) / n;
          const double h = tataru_tail(s, eps, s.kappa_hat(), pi, path, t);
          const double log_w = log_exp_normalizer(m + 1, n) - (m + 1.0) * t;
          CHECK(disc <= h - log_w / m + 1e-9);
        }
      }
    }
  }
}

TEST_CASE("Riemann refinement approaches the continuous integral") {
  const SpacePoint pi = pt(0), mu = pt(3);
  const double cont = lambda_continuous(ou(), 0.1, 20, pi, mu).log_lambda;
  double prev = INFINITY;
  for (int n : {10, 40, 160, 640}) {
    const double gap = std::abs(lambda_discrete(ou(), 0.1, 20, n, pi, mu).log_lambda - cont);
    // first-order Riemann sum: quadrupling n cuts the gap at least threefold
    CHECK(gap < prev / 3);
    prev = gap;
  }
}

TEST_CASE("tilted measure") {
  const auto c = [](double) { return 0.4; };
  const DiscreteMeasure flat = tilted_measure(c, 9, 3.2);
  const DiscreteMeasure base = tilted_measure([](double) { return 0.0; }, 9, 3.2);
  REQUIRE(flat.size() == base.size());
  for (std::size_t i = 0; i < flat.size(); ++i)
    CHECK(flat.weights()[i] == doctest::Approx(base.weights()[i]).epsilon(1e-12));
  // Untilted: the normalized quadrature of (m+1) e^{-(m+1)t} on [0, 3].
  CHECK(base.mass_where([](double t) { return t <= 0.5; }) ==
        doctest::Approx((1 - std::exp(-5.0)) / (1 - std::exp(-32.0))).epsilon(1e-10));

  const DiscreteMeasure tilt = tilted_measure(ou(), 1e-3, 1000, pt(0), pt(3));
  double total = 0.0;
  for (double w : tilt.weights()) total += w;
  CHECK(std::abs(total - 1.0) <= 1e-12);
  const double ln3 = std::log(3.0);
  CHECK(tilt.mass_where([&](double t) { return std::abs(t - ln3) <= 0.1; }) >= 0.95);
}

TEST_CASE("tilted mass concentrates on near-minimizers") {
  const ModelSpace s = quartic();
  const SpacePoint pi = pt(-0.3), mu = pt(1.7);
  const double eps = 1e-2;
  FlowPath path(s, mu);
  const TataruResult tr = tataru_eps(s, eps, pi, path);
  const auto h = [&](double t) { return tataru_tail(s, eps, 0.0, pi, path, t); };
  for (double delta : {0.05, 0.1}) {
    double prev = -1.0;
    for (int m : {10, 100, 1000}) {
      const DiscreteMeasure nu =
          tilted_measure(h, m, tr.grid.t_cap + 5.0 / (m + 1), tr.minimizers);
      const double mass =
          nu.mass_where([&](double t) { return t + h(t) <= tr.value + delta; });
      CHECK(mass > prev);
      prev = mass;
    }
    CHECK(prev > 0.9);
  }
}

TEST_CASE("mean weight converges to h at the minimizer") {
  const SpacePoint pi = pt(0), mu = pt(3);
  const double eps = 1e-3;
  const ModelSpace s = ou();
  FlowPath path(s, mu);
  const TataruResult tr = tataru_eps(s, eps, pi, path);
  REQUIRE(tr.minimizers.size() == 1);
  const auto h = [&](double t) { return tataru_tail(s, eps, 0.0, pi, path, t); };
  const double target = h(tr.minimizers[0]);
  double prev = INFINITY;
  for (int m : {10, 100, 1000, 10000}) {
    const DiscreteMeasure nu =
        tilted_measure(h, m, tr.grid.t_cap + 5.0 / (m + 1), tr.minimizers);
    const double err = std::abs(nu.expectation(h) - target);
    CHECK(err < prev);
    prev = err;
  }
  CHECK(prev < 1e-2);
}

TEST_CASE("Varadhan error curve") {
  const auto curve = varadhan_error_curve(ou(), 0.1, pt(0), pt(3), {10, 100, 1000, 10000});
  REQUIRE(curve.size() == 4);
  CHECK(curve.back().abs_error < 0.05);
  CHECK(curve.back().abs_error < curve.front().abs_error);
  CHECK_THROWS_AS(varadhan_error_curve(ou(), 0.1, pt(0), pt(3), {10, 5}), Error);

  const auto flat = varadhan_error_curve(ou(), 0.5, pt(0), pt(0), {1, 10, 100}, {5});
  REQUIRE(flat.size() == 6);
  for (const auto& p : flat) CHECK(p.abs_error <= 1e-10);
}
