// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 iff all
// pass. Sizes follow the acceptance list (200 / 500 instances, m = 1e4, ...).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hjflow/evi.hpp"
#include "hjflow/experiment.hpp"
#include "hjflow/hamiltonians.hpp"
#include "hjflow/laplace.hpp"
#include "hjflow/tataru.hpp"
#include "hjflow/viscosity.hpp"
#include "support.hpp"

using namespace hjflow;
using namespace hjflow::testing;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Accumulates sub-checks of one criterion.
class Criterion {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok) {
      pass_ = false;
      failures_ << (failures_.tellp() > 0 ? "; " : "") << what;
    }
  }
  void note(const std::string& s) { notes_ << (notes_.tellp() > 0 ? ", " : "") << s; }
  Outcome done() const {
    return {pass_, pass_ ? notes_.str() : failures_.str() + " | " + notes_.str()};
  }

 private:
  bool pass_ = true;
  std::ostringstream failures_, notes_;
};

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

EviSuiteOptions evi_opts(Box box, std::uint64_t seed) {
  EviSuiteOptions o;
  o.instances = 200;
  o.sample_box = box;
  o.seed = seed;
  return o;
}

Outcome c1_evi_quadratic() {
  Criterion c;
  double res = 0, flow = 0;
  std::uint64_t seed = 100;
  for (const ModelSpace& s :
       {ou(), ou(3), quantile_ou(16), ModelSpace::euclidean(2, Potential::quadratic(0.0)),
        ModelSpace::euclidean(1, Potential::quadratic(0.5))}) {
    const EviReport r = run_evi_suite(s, evi_opts({-2.0, 2.0}, seed++));
    res = std::max(res, std::abs(r.max_residual));
    flow = std::max({flow, r.table.at("contraction"), r.table.at("slope_decay")});
    // independent oracle: quadratic flow is x e^{-kappa t}
    const SpacePoint x = s.constant_point(1.3);
    const SpacePoint y = s.flow(x, 0.7);
    c.expect(std::abs(y[0] - 1.3 * std::exp(-s.kappa() * 0.7)) <= 1e-12,
             "closed-form flow mismatch on " + s.describe());
  }
  c.expect(res <= 1e-3, "EVI residual " + num(res));
  c.expect(flow <= 1e-9, "contraction/slope-decay violation " + num(flow));
  c.note("max |residual| " + num(res));
  c.note("max flow violation " + num(flow));
  return c.done();
}

Outcome c2_evi_nonquadratic() {
  Criterion c;
  double worst = -INFINITY;
  std::uint64_t seed = 200;
  for (const ModelSpace& s : {quartic(), quartic(2), double_well(), double_well(1, -0.5),
                              quantile_quartic(16),
                              ModelSpace::quantile(8, Potential::double_well(-0.5))}) {
    const EviReport r = run_evi_suite(s, evi_opts({-1.5, 1.5}, seed++));
    c.expect(r.table.size() == 5, "expected five checks");
    for (const auto& [name, v] : r.table) {
      c.expect(v <= 1e-3, name + " " + num(v) + " on " + s.describe());
      worst = std::max(worst, v);
    }
  }
  c.note("max violation over five checks " + num(worst));
  return c.done();
}

Outcome c3_psi() {
  Criterion c;
  c.expect(psi_eps(0.5, 0.5) == 1.0, "psi_0.5(0.5) != 1");
  c.expect(psi_eps(0.5, 0.0) == 0.375, "psi_0.5(0) != 0.375");
  c.expect(psi_eps(0.5, 2.0) == 2.0, "psi_0.5(2) != 2");
  for (double eps : {1e-4, 1e-2, 0.5}) {
    double gap = 0, prev_d = INFINITY;
    bool pos = true, dec = true;
    for (int k = 0; k <= 10000; ++k) {
      const double r = 4.0 * eps * k / 10000.0;
      gap = std::max(gap, std::abs(psi_eps(eps, r) - std::sqrt(2 * r)));
      const double d = psi_eps_derivative(eps, r);
      pos = pos && d > 0.0;
      dec = dec && d <= prev_d;
      prev_d = d;
    }
    c.expect(gap <= std::sqrt(2 * eps), "gap " + num(gap) + " at eps " + num(eps));
    c.expect(pos, "psi' not positive at eps " + num(eps));
    c.expect(dec, "psi' not decreasing at eps " + num(eps));
    c.note("eps " + num(eps) + ": gap/sqrt(2eps) " + num(gap / std::sqrt(2 * eps)));
  }
  return c.done();
}

Outcome c4_tataru() {
  Criterion c;
  const double v1 = tataru(ou(), pt(0), pt(1)).value;
  const double v3 = tataru(ou(), pt(0), pt(3)).value;
  c.expect(std::abs(v1 - 1.0) <= 1e-6, "d_T(0,1) = " + num(v1));
  c.expect(std::abs(v3 - (1 + std::log(3.0))) <= 1e-6, "d_T(0,3) = " + num(v3));

  const std::vector<ModelSpace> spaces = all_spaces();
  std::mt19937_64 rng(400);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double lip = -INFINITY, tri = -INFINITY, slope = -INFINITY, mono = -INFINITY;
  for (int i = 0; i < 500; ++i) {
    const ModelSpace& s = spaces[std::size_t(i) % spaces.size()];
    const Box box{-2, 2};
    const SpacePoint m = s.sample(rng, box), mh = s.sample(rng, box);
    const SpacePoint n = s.sample(rng, box), nh = s.sample(rng, box);
    const double dmn = tataru(s, m, n).value;
    lip = std::max(lip, dmn - tataru(s, mh, nh).value - s.distance(m, mh) - s.distance(n, nh));
    const double dnnh = tataru(s, n, nh).value;
    tri = std::max(tri, tataru(s, m, nh).value - dmn - dnnh);
    for (double r : {1e-3, 1e-2, 1e-1})
      slope = std::max(slope, (tataru(s, s.flow(n, r), nh).value - dnnh) / r);
    const double k1 = s.kappa() - 1.0 - unit(rng), k2 = k1 + unit(rng);
    mono = std::max(mono, tataru(s, m, n, k1).value - tataru(s, m, n, k2).value);
  }
  c.expect(lip <= 1e-6, "Lipschitz excess " + num(lip));
  c.expect(tri <= 1e-6, "triangle excess " + num(tri));
  c.expect(slope <= 1 + 1e-6, "flow slope " + num(slope));
  c.expect(mono <= 1e-9, "kappa monotonicity excess " + num(mono));
  c.note("d_T errors " + num(std::abs(v1 - 1)) + ", " + num(std::abs(v3 - 1 - std::log(3.0))));
  c.note("max flow slope " + num(slope));
  return c.done();
}

Outcome c5_smoothing() {
  Criterion c;
  const std::vector<ModelSpace> spaces = all_spaces();
  std::mt19937_64 rng(500);
  for (double eps : {1e-4, 1e-2}) {
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const ModelSpace& s = spaces[std::size_t(i) % spaces.size()];
      const SpacePoint a = s.sample(rng, {-2, 2}), b = s.sample(rng, {-2, 2});
      worst = std::max(worst, std::abs(tataru_eps(s, eps, a, b).value - tataru(s, a, b).value));
    }
    c.expect(worst <= std::sqrt(2 * eps), "sup gap " + num(worst) + " at eps " + num(eps));
    c.note("eps " + num(eps) + ": sup gap " + num(worst));
  }
  return c.done();
}

Outcome c6_laplace() {
  Criterion c;
  const std::vector<int> ms{1, 10, 100, 1000, 10000};
  double const_err = 0;
  for (int m : ms) {
    const auto h = [](double) { return 0.375; };
    const_err = std::max({const_err, std::abs(laplace_discrete(h, m, 10).neg_log - 0.375),
                          std::abs(laplace_continuous(h, m, 3.0).neg_log - 0.375)});
  }
  c.expect(const_err <= 1e-10, "constant-h error " + num(const_err));

  const double eps = 1e-2;
  const auto curve = varadhan_error_curve(ou(), eps, pt(0), pt(3), {10, 10000});
  const double e10 = curve.front().abs_error, e4 = curve.back().abs_error;
  c.expect(e4 < 0.05, "error at m=1e4 " + num(e4));
  c.expect(e4 < e10, "error at m=1e4 not below m=10");

  const double cont = lambda_continuous(ou(), eps, 20, pt(0), pt(3)).log_lambda;
  double prev = INFINITY;
  std::string gaps;
  for (int n : {10, 40, 160}) {
    const double gap = std::abs(lambda_discrete(ou(), eps, 20, n, pt(0), pt(3)).log_lambda - cont);
    c.expect(gap < prev, "Riemann gap not decreasing at n=" + std::to_string(n));
    prev = gap;
    gaps += (gaps.empty() ? "" : "/") + num(gap);
  }
  c.note("constant-h err " + num(const_err));
  c.note("error m=10 " + num(e10) + ", m=1e4 " + num(e4));
  c.note("Riemann gaps " + gaps);
  return c.done();
}

Outcome c7_tilt() {
  Criterion c;
  const double eps = 1e-3, ln3 = std::log(3.0);
  const DiscreteMeasure nu = tilted_measure(ou(), eps, 1000, pt(0), pt(3));
  const double mass = nu.mass_where([&](double t) { return std::abs(t - ln3) <= 0.1; });
  c.expect(mass >= 0.95, "mass near ln 3 " + num(mass));
  c.note("mass within 0.1 of ln 3: " + num(mass));
  return c.done();
}

Outcome chain(ChainLink link, double tol) {
  Criterion c;
  double worst = -INFINITY;
  std::uint64_t seed = 800 + std::uint64_t(link) * 10;
  std::size_t total = 0;
  for (const ModelSpace& s : {ou(), quartic(), double_well(), quantile_ou(4)}) {
    ChainOptions o;
    o.samples = 500;
    o.seed = seed++;
    const ChainReport r = chain_inequality_report(s, link, o);
    total += r.samples.size();
    worst = std::max(worst, r.max_violation);
  }
  c.expect(worst <= tol, "max violation " + num(worst));
  c.note(std::to_string(total) + " instances, max violation " + num(worst));
  return c.done();
}

double lq_exact(double x) { return x / 2 + 1.0 / 8; }
double clip5(double x) { return std::clamp(x, -5.0, 5.0); }

const ResolventResult& lq() {
  static const ResolventResult r = solve_resolvent(ou(), 1.0, clip5);
  return r;
}

Outcome c11_resolvent() {
  Criterion c;
  const ResolventResult& r = lq();
  double err = 0, scale = 0;
  for (std::size_t i = 0; i < r.u.grid.points; ++i) {
    const double x = r.u.grid.x(i);
    if (std::abs(x) > 2) continue;
    err = std::max(err, std::abs(r.u.values[i] - lq_exact(x)));
    scale = std::max(scale, std::abs(lq_exact(x)));
  }
  c.expect(err / scale < 1e-2, "LQ relative error " + num(err / scale));

  const ResolventResult k = solve_resolvent(ou(), 1.0, [](double) { return -0.4; });
  double cdev = 0;
  for (double v : k.u.values) cdev = std::max(cdev, std::abs(v + 0.4));
  c.expect(cdev <= 1e-8, "constant-h deviation " + num(cdev));

  const ResolventResult sh = solve_resolvent(ou(), 1.0, [](double x) { return clip5(x) + 0.25; });
  double sdev = 0;
  for (std::size_t i = 0; i < sh.u.values.size(); ++i)
    sdev = std::max(sdev, std::abs(sh.u.values[i] - r.u.values[i] - 0.25));
  c.expect(sdev <= 1e-8, "shift deviation " + num(sdev));
  c.note("LQ rel err " + num(err / scale));
  c.note("constant dev " + num(cdev));
  c.note("shift dev " + num(sdev));
  return c.done();
}

HamiltonianPair random_pair(Side side, std::mt19937_64& rng, int k) {
  std::uniform_real_distribution<double> a(0.2, 2.0), c(0.1, 1.0), p(-2.0, 2.0);
  const ModelSpace s = ou();
  const double aa = a(rng);
  if (k % 3 == 2) {
    const double b = c(rng);
    const double centre = p(rng), anchor = p(rng);
    return build_tataru_pair(s, side, aa, b, 0.0, pt(centre), pt(anchor));
  }
  CylindricalTestFunction phi;
  std::vector<double> coef;
  for (int j = 0; j <= k % 2; ++j) {
    phi.anchors.push_back(pt(p(rng)));
    coef.push_back(c(rng));
  }
  phi.phi = affine(coef);
  const SpacePoint centre = pt(p(rng));
  return side == Side::Dagger ? build_cyl_dagger(s, aa, phi, centre)
                              : build_cyl_ddagger(s, aa, phi, centre);
}

Outcome c12_viscosity() {
  Criterion c;
  const ResolventResult& r = lq();
  const double tol = 5 * r.u.grid.dx();
  std::mt19937_64 rng(1200);
  int sub_ok = 0, sup_ok = 0;
  double worst = -INFINITY;
  for (int k = 0; k < 50; ++k) {
    const ViscosityReport v =
        check_subsolution(r.u, ou(), random_pair(Side::Dagger, rng, k), clip5, 1.0, tol);
    sub_ok += v.pass;
    worst = std::max(worst, v.slack);
  }
  for (int k = 0; k < 50; ++k) {
    const ViscosityReport v =
        check_supersolution(r.u, ou(), random_pair(Side::Ddagger, rng, k), clip5, 1.0, tol);
    sup_ok += v.pass;
    worst = std::max(worst, -v.slack);
  }
  c.expect(sub_ok == 50, std::to_string(sub_ok) + "/50 subsolution passes");
  c.expect(sup_ok == 50, std::to_string(sup_ok) + "/50 supersolution passes");

  // designed failures
  const Grid1D& g = r.u.grid;
  const double x0 = g.x(1200);
  const CylindricalTestFunction phi{affine({1.0}), {pt(x0)}};
  const auto zero = [](double) { return 0.0; };
  const bool f1 = !check_subsolution(GridFunction::sample(g, [](double) { return 1.0; }), ou(),
                                     build_cyl_dagger(ou(), 0.01, phi, pt(x0)), zero, 1.0, tol)
                       .pass;
  const bool f2 = !check_supersolution(GridFunction::sample(g, [](double) { return -1.0; }), ou(),
                                       build_cyl_ddagger(ou(), 0.01, phi, pt(x0)), zero, 1.0, tol)
                       .pass;
  c.expect(f1 && f2, "a designed failure case passed");
  c.note("worst excess " + num(worst) + " vs tol " + num(tol));
  return c.done();
}

std::function<double(double)> random_h(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> a(-1, 1), w(0.3, 3.0), ph(0, 6.283185307179586);
  const double a1 = a(rng), w1 = w(rng), p1 = ph(rng), a2 = a(rng), w2 = w(rng), p2 = ph(rng);
  return [=](double x) { return a1 * std::sin(w1 * x + p1) + a2 * std::cos(w2 * x + p2); };
}

Outcome c13_comparison() {
  Criterion c;
  const Grid1D g = Grid1D::with_spacing(5.0, 1.0 / 200.0);
  std::mt19937_64 rng(1300);
  std::uniform_real_distribution<double> lift(0.0, 0.5);
  int ok = 0;
  for (int k = 0; k < 20; ++k) {
    const auto hd = random_h(rng);
    const double d0 = lift(rng), d1 = lift(rng);
    const auto hu = [=](double x) { return hd(x) - d0 - d1 * std::sin(x) * std::sin(x); };
    const ComparisonResult r =
        comparison_gap(solve_resolvent(ou(), 1.0, hd).u, solve_resolvent(ou(), 1.0, hu).u,
                       GridFunction::sample(g, hd), GridFunction::sample(g, hu));
    ok += r.pass;
  }
  c.expect(ok == 20, std::to_string(ok) + "/20 random pairs pass");

  const auto hd = random_h(rng);
  const auto hu = [&](double x) { return hd(x) - 0.3; };
  const ComparisonResult s =
      comparison_gap(solve_resolvent(ou(), 1.0, hd).u, solve_resolvent(ou(), 1.0, hu).u,
                     GridFunction::sample(g, hd), GridFunction::sample(g, hu));
  const double gap = std::abs(s.lhs - s.rhs);
  c.expect(s.pass && gap <= s.tolerance, "shift pair gap " + num(gap));
  c.note("shift pair lhs " + num(s.lhs) + " rhs " + num(s.rhs));
  return c.done();
}

Outcome c14_determinism() {
  Criterion c;
  std::size_t bytes = 0;
  for (const char* cmd : {"evi-check", "tataru", "laplace-converge", "ham-chain", "resolvent",
                          "comparison"}) {
    nlohmann::json j = {{"schema", 1}, {"command", cmd}, {"seed", 14}};
    j["tataru"] = {{"grid", true}};
    j["laplace"] = {{"n", {10, 40}}};
    j["ham_chain"] = {{"samples", 100}};
    j["resolvent"] = {{"half_width", 3.0}, {"dx", 0.01}, {"pairs", 10}};
    j["comparison"] = {{"half_width", 3.0}, {"dx", 0.01}, {"pairs", 4}};
    const ExperimentConfig cfg = parse_config(j);
    const Report a = run_experiment(cfg), b = run_experiment(cfg);
    std::string sa = report_csv(a), sb = report_csv(b);
    for (const DataTable& t : a.tables) sa += table_csv(t);
    for (const DataTable& t : b.tables) sb += table_csv(t);
    c.expect(sa == sb, std::string(cmd) + " output differs between runs");
    bytes += sa.size();
  }
  c.note(std::to_string(bytes) + " bytes compared per run");
  return c.done();
}

}  // namespace

int main() {
  struct Item {
    int id;
    const char* title;
    std::function<Outcome()> run;
  };
  const std::vector<Item> items{
      {1, "EVI exactness for quadratic potentials", c1_evi_quadratic},
      {2, "EVI checks for quartic and double-well potentials", c2_evi_nonquadratic},
      {3, "psi_eps values, gap and shape", c3_psi},
      {4, "Tataru distance values and invariants", c4_tataru},
      {5, "smoothed Tataru distance convergence", c5_smoothing},
      {6, "Laplace/Varadhan convergence and Riemann refinement", c6_laplace},
      {7, "tilted-measure concentration", c7_tilt},
      {8, "chain inequality 1->2", [] { return chain(ChainLink::OneToTwo, 1e-9); }},
      {9, "chain inequality 4->5", [] { return chain(ChainLink::FourToFive, 1e-6); }},
      {10, "level 5/6 identity", [] { return chain(ChainLink::FiveToSix, 0.0); }},
      {11, "resolvent LQ oracle, constants and shifts", c11_resolvent},
      {12, "viscosity verdicts", c12_viscosity},
      {13, "comparison principle", c13_comparison},
      {14, "seeded determinism", c14_determinism},
  };
  int failed = 0;
  for (const Item& it : items) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = it.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s criterion %2d: %s [%s] (%.1fs)\n", o.pass ? "PASS" : "FAIL", it.id,
                it.title, o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d/%zu criteria passed\n", int(items.size()) - failed, items.size());
  return failed ? 1 : 0;
}
