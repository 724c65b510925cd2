#include <cmath>
#include <random>

#include "doctest.h"
#include "hjflow/error.hpp"
#include "hjflow/viscosity.hpp"
#include "support.hpp"

using namespace hjflow;
using namespace hjflow::testing;

namespace {

double clip5(double x) { return std::clamp(x, -5.0, 5.0); }

// Closed-form value function of the linear-quadratic instance.
double lq_exact(double x) { return x / 2 + 1.0 / 8; }

const ResolventResult& lq_solution() {
  static const ResolventResult r = solve_resolvent(ou(), 1.0, clip5);
  return r;
}

HamiltonianPair random_dagger(std::mt19937_64& rng, int k) {
  std::uniform_real_distribution<double> a(0.2, 2.0), c(0.1, 1.0), p(-2.0, 2.0);
  const ModelSpace s = ou();
  if (k % 3 == 2)
    return build_tataru_pair(s, Side::Dagger, a(rng), c(rng), 0.0, pt(p(rng)), pt(p(rng)));
  CylindricalTestFunction phi;
  std::vector<double> coef;
  for (int j = 0; j <= k % 2; ++j) {
    phi.anchors.push_back(pt(p(rng)));
    coef.push_back(c(rng));
  }
  phi.phi = affine(coef);
  return build_cyl_dagger(s, a(rng), phi, pt(p(rng)));
}

HamiltonianPair random_ddagger(std::mt19937_64& rng, int k) {
  std::uniform_real_distribution<double> a(0.2, 2.0), c(0.1, 1.0), p(-2.0, 2.0);
  const ModelSpace s = ou();
  if (k % 3 == 2)
    return build_tataru_pair(s, Side::Ddagger, a(rng), c(rng), 0.0, pt(p(rng)), pt(p(rng)));
  CylindricalTestFunction phi;
  std::vector<double> coef;
  for (int j = 0; j <= k % 2; ++j) {
    phi.anchors.push_back(pt(p(rng)));
    coef.push_back(c(rng));
  }
  phi.phi = affine(coef);
  return build_cyl_ddagger(s, a(rng), phi, pt(p(rng)));
}

}  // namespace

TEST_CASE("grid helpers") {
  const Grid1D g = Grid1D::with_spacing(5.0, 0.005);
  CHECK(g.points == 2001);
  CHECK(g.x(0) == -5.0);
  CHECK(g.x(2000) == doctest::Approx(5.0));
  const GridFunction f = GridFunction::sample(g, [](double x) { return 2 * x; });
  CHECK(f(0.0012) == doctest::Approx(0.0024));
  CHECK(f(7.0) == doctest::Approx(10.0));
  CHECK(f(-9.0) == doctest::Approx(-10.0));
}

TEST_CASE("resolvent errors") {
  ResolventOptions o;
  o.dt = 1.5;
  CHECK_THROWS_WITH_AS(solve_resolvent(ou(), 1.0, clip5, o), "time step too large", Error);
  CHECK_THROWS_AS(solve_resolvent(ou(2), 1.0, clip5), Error);
  ResolventOptions few;
  few.max_iterations = 3;
  CHECK_THROWS_AS(solve_resolvent(ou(), 1.0, clip5, few), NumericalError);
}

TEST_CASE("linear-quadratic oracle") {
  const ResolventResult& r = lq_solution();
  CHECK(r.last_increment <= 1e-10);
  // the linear instance contracts at exactly beta, so allow round-off on top
  CHECK(r.worst_increment_ratio <= r.contraction * (1 + 1e-6));
  double scale = 0.0, err = 0.0;
  for (std::size_t i = 0; i < r.u.grid.points; ++i) {
    const double x = r.u.grid.x(i);
    if (std::abs(x) > 2.0) continue;
    scale = std::max(scale, std::abs(lq_exact(x)));
    err = std::max(err, std::abs(r.u.values[i] - lq_exact(x)));
  }
  CHECK(err / scale < 1e-2);
}

TEST_CASE("constant data and shifts") {
  ResolventOptions o;
  o.half_width = 2.0;
  o.dx = 0.01;
  const ResolventResult c = solve_resolvent(ou(), 0.5, [](double) { return 0.7; }, o);
  for (double v : c.u.values) CHECK(std::abs(v - 0.7) <= 1e-8);

  auto h = [](double x) { return std::sin(2 * x); };
  const ResolventResult a = solve_resolvent(ou(), 1.0, h, o);
  const ResolventResult b =
      solve_resolvent(ou(), 1.0, [&](double x) { return h(x) - 0.3; }, o);
  for (std::size_t i = 0; i < a.u.values.size(); ++i)
    CHECK(std::abs(a.u.values[i] - b.u.values[i] - 0.3) <= 1e-8);

  // monotone in h
  const ResolventResult up =
      solve_resolvent(ou(), 1.0, [&](double x) { return h(x) + 0.1 * x * x; }, o);
  for (std::size_t i = 0; i < a.u.values.size(); ++i)
    CHECK(a.u.values[i] <= up.u.values[i] + 1e-10);
}

TEST_CASE("value function passes the viscosity checks") {
  const ResolventResult& r = lq_solution();
  const double tol = 5 * r.u.grid.dx();
  std::mt19937_64 rng(4);
  for (int k = 0; k < 20; ++k) {
    const ViscosityReport sub =
        check_subsolution(r.u, ou(), random_dagger(rng, k), clip5, 1.0, tol);
    CHECK(sub.pass);
    CHECK(!sub.optimizers.empty());
    const ViscosityReport sup =
        check_supersolution(r.u, ou(), random_ddagger(rng, k), clip5, 1.0, tol);
    CHECK(sup.pass);
  }
}

TEST_CASE("designed failures") {
  const Grid1D g = Grid1D::with_spacing(5.0, 0.005);
  const GridFunction one = GridFunction::sample(g, [](double) { return 1.0; });
  const GridFunction minus = GridFunction::sample(g, [](double) { return -1.0; });
  const auto zero = [](double) { return 0.0; };
  const double x0 = g.x(1200);
  const CylindricalTestFunction phi{affine({1.0}), {pt(x0)}};
  const ViscosityReport sub = check_subsolution(
      one, ou(), build_cyl_dagger(ou(), 0.01, phi, pt(x0)), zero, 1.0, 0.025);
  CHECK_FALSE(sub.pass);
  CHECK(sub.verdict == "fail");
  CHECK(sub.slack == doctest::Approx(1.0));
  REQUIRE(sub.optimizers.size() == 1);
  CHECK(sub.optimizers[0] == doctest::Approx(x0));

  const ViscosityReport sup = check_supersolution(
      minus, ou(), build_cyl_ddagger(ou(), 0.01, phi, pt(x0)), zero, 1.0, 0.025);
  CHECK_FALSE(sup.pass);
  CHECK(sup.slack == doctest::Approx(-1.0));

  CHECK_THROWS_AS(check_subsolution(one, ou(), build_cyl_ddagger(ou(), 0.01, phi, pt(x0)),
                                    zero, 1.0, 0.025),
                  Error);
}

TEST_CASE("constant at the minimum of h is a subsolution where g >= 0") {
  const Grid1D g = Grid1D::with_spacing(5.0, 0.005);
  const GridFunction u = GridFunction::sample(g, [](double) { return -5.0; });
  std::mt19937_64 rng(12);
  int checked = 0;
  for (int k = 0; k < 30; ++k) {
    const HamiltonianPair pair = random_dagger(rng, k);
    const ViscosityReport rep = check_subsolution(u, ou(), pair, clip5, 1.0, 0.025);
    bool g_nonneg = true;
    for (double x : rep.optimizers) g_nonneg = g_nonneg && pair.g(pt(x)) >= 0.0;
    if (!g_nonneg) continue;
    ++checked;
    CHECK(rep.pass);
  }
  CHECK(checked > 0);
}

TEST_CASE("shifted supersolution still passes") {
  const ResolventResult& r = lq_solution();
  GridFunction v = r.u;
  for (double& x : v.values) x += 0.5;
  std::mt19937_64 rng(13);
  for (int k = 0; k < 10; ++k)
    CHECK(check_supersolution(v, ou(), random_ddagger(rng, k), clip5, 1.0,
                              5 * v.grid.dx())
              .pass);
}

TEST_CASE("comparison principle") {
  ResolventOptions o;
  o.half_width = 3.0;
  o.dx = 0.01;
  const Grid1D g = Grid1D::with_spacing(o.half_width, o.dx);
  auto h = [](double x) { return std::cos(x) + 0.2 * x; };
  const ResolventResult u = solve_resolvent(ou(), 1.0, h, o);
  const GridFunction hg = GridFunction::sample(g, h);
  const ComparisonResult same = comparison_gap(u.u, u.u, hg, hg);
  CHECK(same.pass);
  CHECK(same.lhs == 0.0);
  CHECK(same.rhs == 0.0);

  auto hs = [&](double x) { return h(x) - 0.3; };
  const ResolventResult v = solve_resolvent(ou(), 1.0, hs, o);
  const ComparisonResult shift = comparison_gap(u.u, v.u, hg, GridFunction::sample(g, hs));
  CHECK(shift.pass);
  CHECK(std::abs(shift.lhs - shift.rhs) <= shift.tolerance);

  const Grid1D other = Grid1D::with_spacing(2.0, 0.01);
  const GridFunction z = GridFunction::sample(other, [](double) { return 0.0; });
  CHECK_THROWS_AS(comparison_gap(u.u, z, hg, hg), Error);
}
