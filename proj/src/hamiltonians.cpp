#include "hjflow/hamiltonians.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "hjflow/error.hpp"
#include "hjflow/laplace.hpp"
#include "hjflow/tataru.hpp"

namespace hjflow {

std::string to_string(Side s) { return s == Side::Dagger ? "dag" : "ddag"; }

HamiltonianPair::HamiltonianPair(Family family, Side side, int level,
                                 PairParams params, Evaluator eval)
    : family_(family), side_(side), level_(level), params_(std::move(params)),
      eval_(std::move(eval)) {}

std::string HamiltonianPair::name() const {
  switch (family_) {
    case Family::Cylindrical: return "H1_" + to_string(side_);
    case Family::Bounded: return "H0_" + to_string(side_);
    case Family::Tataru: return "Htilde_" + to_string(side_);
    case Family::Chain: return "H" + std::to_string(level_) + "_" + to_string(side_);
  }
  return "?";
}

namespace {

double sign_of(Side s) { return s == Side::Dagger ? 1.0 : -1.0; }

double khat_of(const ModelSpace& space, std::optional<double> override_kappa) {
  return std::min(override_kappa.value_or(space.kappa()), 0.0);
}

void require_positive(double v, const char* field) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(field, "must be positive");
}

// Shared shape of the levels 2..6 and H-tilde pairs:
//   f = s (a/2 d^2 + b D) + c
//   g = s (a [E(centre) - E(x)] - a kappa/2 d^2 + a b d + b^2/2 + b X) + a^2/2 d^2
// with s = +1 (dagger) or -1 (ddagger), D the distance-like term and X the
// flow term (X = 1 for levels 5, 6 and H-tilde).
FG tataru_like(Side side, double a, double b, double c, double kappa,
               double e_centre, double e_x, double d, double D, double X) {
  const double s = sign_of(side);
  FG out;
  out.f = s * (0.5 * a * d * d + b * D) + c;
  out.g = s * (a * (e_centre - e_x) - 0.5 * a * kappa * d * d + a * b * d +
               0.5 * b * b + b * X) +
          0.5 * a * a * d * d;
  return out;
}

struct AnchorEnergies {
  std::vector<double> e;
  AnchorEnergies(const ModelSpace& space, const std::vector<SpacePoint>& pts) {
    for (const auto& p : pts) e.push_back(space.energy(p));
  }
};

}  // namespace

HamiltonianPair build_cyl_dagger(const ModelSpace& space, double a,
                                 CylindricalTestFunction phi, SpacePoint rho) {
  require_positive(a, "a");
  space.check(rho);
  for (const auto& p : phi.anchors) space.check(p);
  const AnchorEnergies en(space, phi.anchors);
  const double e_rho = space.energy(rho);
  PairParams params;
  params.a = a;
  params.centre = rho;
  auto eval = [space, a, phi, rho, e = en.e, e_rho](const SpacePoint& x) {
    const CylinderValue cv = phi.evaluate(space, x);
    const double kappa = space.kappa();
    const double ex = space.energy(x);
    const double d0 = space.distance(x, rho);
    double sum = 0.0, s = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) {
      const double di = cv.dist[i];
      sum += cv.partials[i] * (e[i] - ex - 0.5 * kappa * di * di);
      s += cv.partials[i] * di;
    }
    FG out;
    out.f = 0.5 * a * d0 * d0 + cv.value;
    out.g = a * (e_rho - ex - 0.5 * kappa * d0 * d0) + 0.5 * a * a * d0 * d0 +
            sum + 0.5 * s * s + a * d0 * s;
    return out;
  };
  return {Family::Cylindrical, Side::Dagger, 1, params, eval};
}

HamiltonianPair build_cyl_ddagger(const ModelSpace& space, double a,
                                  CylindricalTestFunction phi, SpacePoint gamma) {
  require_positive(a, "a");
  space.check(gamma);
  for (const auto& p : phi.anchors) space.check(p);
  const AnchorEnergies en(space, phi.anchors);
  const double e_gamma = space.energy(gamma);
  PairParams params;
  params.a = a;
  params.centre = gamma;
  auto eval = [space, a, phi, gamma, e = en.e, e_gamma](const SpacePoint& x) {
    const CylinderValue cv = phi.evaluate(space, x);
    const double kappa = space.kappa();
    const double ex = space.energy(x);
    const double d0 = space.distance(x, gamma);
    double sum = 0.0, s = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) {
      const double di = cv.dist[i];
      sum += cv.partials[i] * (ex - e[i] + 0.5 * kappa * di * di);
      s += cv.partials[i] * di;
    }
    FG out;
    out.f = -0.5 * a * d0 * d0 - cv.value;
    out.g = a * (ex - e_gamma + 0.5 * kappa * d0 * d0) + 0.5 * a * a * d0 * d0 +
            sum - 0.5 * s * s - a * d0 * s;
    return out;
  };
  return {Family::Cylindrical, Side::Ddagger, 1, params, eval};
}

HamiltonianPair build_h0_pair(const ModelSpace& space, Side side,
                              CylindricalTestFunction phi) {
  if (!phi.bounded()) throw Error("requires class T_b");
  for (const auto& p : phi.anchors) space.check(p);
  const AnchorEnergies en(space, phi.anchors);
  auto eval = [space, side, phi, e = en.e](const SpacePoint& x) {
    const CylinderValue cv = phi.evaluate(space, x);
    const double kappa = space.kappa();
    const double ex = space.energy(x);
    double sum = 0.0, s = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) {
      const double di = cv.dist[i];
      const double xi = cv.partials[i] * di;
      if (side == Side::Dagger)
        sum += cv.partials[i] * (e[i] - ex - 0.5 * kappa * di * di);
      else
        sum += cv.partials[i] * (ex - e[i] + 0.5 * kappa * di * di);
      s += xi;
      sq += xi * xi;
    }
    FG out;
    if (side == Side::Dagger) {
      out.f = cv.value;
      out.g = sum + 0.5 * s * s;
    } else {
      // 1/2 sum_i x_i^2 - 1/2 sum_{i != j} x_i x_j = sum_i x_i^2 - 1/2 (sum_i x_i)^2
      out.f = -cv.value;
      out.g = sum + sq - 0.5 * s * s;
    }
    return out;
  };
  return {Family::Bounded, side, 0, PairParams{}, eval};
}

CylindricalTestFunction truncate_cylinder(const CylindricalTestFunction& phi0,
                                          double a, const SpacePoint& rho, int n) {
  require_positive(a, "a");
  CylindricalTestFunction out;
  out.phi = truncate(block_sum({affine({a}), phi0.phi}), n);
  out.anchors.push_back(rho);
  out.anchors.insert(out.anchors.end(), phi0.anchors.begin(), phi0.anchors.end());
  return out;
}

HamiltonianPair build_tataru_pair(const ModelSpace& space, Side side, double a,
                                  double b, double c, SpacePoint centre,
                                  SpacePoint anchor,
                                  std::optional<double> kappa_override) {
  require_positive(a, "a");
  require_positive(b, "b");
  space.check(centre);
  space.check(anchor);
  PairParams params;
  params.a = a;
  params.b = b;
  params.c = c;
  params.centre = centre;
  params.anchor = anchor;
  params.kappa_override = kappa_override;
  const double e_centre = space.energy(centre);
  auto eval = [=](const SpacePoint& x) {
    const double D = tataru(space, x, anchor, kappa_override).value;
    return tataru_like(side, a, b, c, space.kappa(), e_centre, space.energy(x),
                       space.distance(x, centre), D, 1.0);
  };
  return {Family::Tataru, side, 6, params, eval};
}

CylindricalTestFunction laplace_cylinder(const ModelSpace& space, double b,
                                         double c, double eps, int m, int n,
                                         const SpacePoint& anchor,
                                         double kappa_hat) {
  require_positive(b, "b");
  require_positive(eps, "epsilon");
  if (m < 1) throw ConfigError("m", "must be >= 1");
  if (n < 1) throw ConfigError("n", "must be >= 1");
  const double log_c = log_exp_normalizer(m + 1, n);
  const std::size_t count = std::size_t(n) * std::size_t(n);
  CylindricalTestFunction out;
  std::vector<double> scales, lw;
  FlowPath path(space, anchor);
  for (std::size_t i = 1; i <= count; ++i) {
    const double t = double(i) / double(n);
    out.anchors.push_back(path.at(t));
    scales.push_back(std::exp(kappa_hat * t));
    lw.push_back(log_c - (double(m) + 1.0) * t);
  }
  out.phi = soft_min_psi(b, m, eps, std::move(scales), std::move(lw), c);
  return out;
}

double bound_4to5_lhs(const ModelSpace& space, double eps, const SpacePoint& pi,
                      FlowPath& mu_path, double t,
                      std::optional<double> kappa_override) {
  const double kh = khat_of(space, kappa_override);
  const SpacePoint& mt = mu_path.at(t);
  const double r = 0.5 * space.distance_squared(pi, mt);
  const double e = std::exp(kh * t);
  return e * (space.energy(mt) - space.energy(pi)) * psi_eps_derivative(eps, r) -
         0.5 * kh * e * psi_eps(eps, r);
}

namespace {

struct ChainInputs {
  double a, b, c, eps = 0.0;
  int m = 0, n = 0;
  SpacePoint centre, anchor;
};

ChainInputs chain_inputs(const ModelSpace& space, int level, const PairParams& p) {
  if (level < 2 || level > 6) throw ConfigError("level", "must be in 2..6");
  auto need = [](const auto& opt, const char* field) {
    if (!opt) throw ConfigError(field, "missing parameter");
    return *opt;
  };
  ChainInputs in;
  in.a = need(p.a, "a");
  in.b = need(p.b, "b");
  in.c = need(p.c, "c");
  in.centre = need(p.centre, "centre");
  in.anchor = need(p.anchor, "anchor");
  require_positive(in.a, "a");
  require_positive(in.b, "b");
  space.check(in.centre);
  space.check(in.anchor);
  if (level <= 5) {
    in.eps = need(p.eps, "epsilon");
    require_positive(in.eps, "epsilon");
  }
  if (level <= 3) {
    in.m = need(p.m, "m");
    if (in.m < 1) throw ConfigError("m", "must be >= 1");
  }
  if (level == 2) {
    in.n = need(p.n, "n");
    if (in.n < 1) throw ConfigError("n", "must be >= 1");
  }
  return in;
}

struct TiltTerms {
  double D;  // -(1/m) log Lambda
  double X;  // tilted flow term
};

// Tilted averages over weighted atoms (times, log-weights including the tilt).
TiltTerms tilt_terms(double kh, int m, bool regularize, double e_x, double D,
                     const std::vector<double>& times, const std::vector<double>& logw,
                     const std::vector<double>& h, const std::vector<double>& psi_d,
                     const std::vector<double>& e_flow) {
  const double lse = log_sum_exp(logw);
  double flow_term = 0.0, reg_term = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double p = std::exp(logw[i] - lse);
    if (p == 0.0) continue;
    const double e = std::exp(kh * times[i]);
    flow_term += p * psi_d[i] * e * (e_flow[i] - e_x);
    reg_term += p * (regularize ? std::max(1.0 / double(m), h[i]) : h[i]);
  }
  return {D, flow_term - 0.5 * kh * reg_term};
}

}  // namespace

HamiltonianPair build_chain_pair(const ModelSpace& space, int level, Side side,
                                 const PairParams& params) {
  const ChainInputs in = chain_inputs(space, level, params);
  const double kh = khat_of(space, params.kappa_override);
  const double e_centre = space.energy(in.centre);
  const bool regularize = params.regularize;
  const auto kappa_override = params.kappa_override;
  HamiltonianPair::Evaluator eval;

  switch (level) {
    case 2: {
      // Anchor trajectory at the atoms i/n does not depend on x.
      const std::size_t count = std::size_t(in.n) * std::size_t(in.n);
      std::vector<double> times(count), base_lw(count);
      std::vector<SpacePoint> pts;
      std::vector<double> e_flow(count);
      FlowPath path(space, in.anchor);
      const double log_c = log_exp_normalizer(in.m + 1, in.n);
      for (std::size_t i = 1; i <= count; ++i) {
        times[i - 1] = double(i) / double(in.n);
        base_lw[i - 1] = log_c - (double(in.m) + 1.0) * times[i - 1];
        pts.push_back(path.at(times[i - 1]));
        e_flow[i - 1] = space.energy(pts.back());
      }
      eval = [=](const SpacePoint& x) {
        const double m = double(in.m);
        std::vector<double> lw(count), h(count), psi_d(count);
        for (std::size_t i = 0; i < count; ++i) {
          const double r = 0.5 * space.distance_squared(x, pts[i]);
          h[i] = std::exp(kh * times[i]) * psi_eps(in.eps, r);
          psi_d[i] = psi_eps_derivative(in.eps, r);
          lw[i] = base_lw[i] - m * h[i];
        }
        const double e_x = space.energy(x);
        const TiltTerms tt = tilt_terms(kh, in.m, regularize, e_x,
                                        -log_sum_exp(lw) / m, times, lw, h, psi_d,
                                        e_flow);
        return tataru_like(side, in.a, in.b, in.c, space.kappa(), e_centre, e_x,
                           space.distance(x, in.centre), tt.D, tt.X);
      };
      break;
    }
    case 3: {
      eval = [=](const SpacePoint& x) {
        FlowPath path(space, in.anchor);
        const TataruResult tr = tataru_eps(space, in.eps, x, path, kappa_override);
        const auto h_of = [&](double t) {
          return tataru_tail(space, in.eps, kh, x, path, t);
        };
        QuadratureNodes nodes;
        const LaplaceValue lv =
            laplace_continuous(h_of, in.m, tr.grid.t_cap + 5.0 / (in.m + 1.0),
                               tr.minimizers, {}, &nodes);
        const std::size_t k = nodes.times.size();
        std::vector<double> h(k), psi_d(k), e_flow(k);
        for (std::size_t i = 0; i < k; ++i) {
          const SpacePoint& y = path.at(nodes.times[i]);
          const double r = 0.5 * space.distance_squared(x, y);
          h[i] = std::exp(kh * nodes.times[i]) * psi_eps(in.eps, r);
          psi_d[i] = psi_eps_derivative(in.eps, r);
          e_flow[i] = space.energy(y);
        }
        const double e_x = space.energy(x);
        const TiltTerms tt = tilt_terms(kh, in.m, regularize, e_x,
                                        lv.neg_log, nodes.times, nodes.log_weights,
                                        h, psi_d, e_flow);
        return tataru_like(side, in.a, in.b, in.c, space.kappa(), e_centre, e_x,
                           space.distance(x, in.centre), tt.D, tt.X);
      };
      break;
    }
    case 4: {
      eval = [=](const SpacePoint& x) {
        FlowPath path(space, in.anchor);
        const TataruResult tr = tataru_eps(space, in.eps, x, path, kappa_override);
        double X = -INFINITY;
        for (double t : tr.minimizers)
          X = std::max(X, bound_4to5_lhs(space, in.eps, x, path, t, kappa_override));
        return tataru_like(side, in.a, in.b, in.c, space.kappa(), e_centre,
                           space.energy(x), space.distance(x, in.centre), tr.value, X);
      };
      break;
    }
    case 5:
    case 6: {
      eval = [=](const SpacePoint& x) {
        const double D = level == 5
                             ? tataru_eps(space, in.eps, x, in.anchor, kappa_override).value
                             : tataru(space, x, in.anchor, kappa_override).value;
        return tataru_like(side, in.a, in.b, in.c, space.kappa(), e_centre,
                           space.energy(x), space.distance(x, in.centre), D, 1.0);
      };
      break;
    }
  }
  return {Family::Chain, side, level, params, eval};
}

std::string to_string(ChainLink link) {
  switch (link) {
    case ChainLink::OneToTwo: return "1-2";
    case ChainLink::FourToFive: return "4-5";
    case ChainLink::FiveToSix: return "5-6";
    case ChainLink::ZeroToOneOverlap: return "0-1";
  }
  return "?";
}

ChainLink chain_link_from_string(const std::string& s) {
  if (s == "1-2" || s == "1->2" || s == "1to2") return ChainLink::OneToTwo;
  if (s == "4-5" || s == "4->5" || s == "4to5") return ChainLink::FourToFive;
  if (s == "5-6" || s == "5->6" || s == "5to6") return ChainLink::FiveToSix;
  if (s == "0-1" || s == "0->1" || s == "0to1") return ChainLink::ZeroToOneOverlap;
  throw ConfigError("link", "unknown chain link '" + s + "'");
}

namespace {

double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  return std::exp(u(rng));
}

ChainSample one_to_two(const ModelSpace& space, std::mt19937_64& rng, Box box,
                       std::size_t i, double* unregularized) {
  std::uniform_real_distribution<double> ab(0.1, 2.0), cc(-1.0, 1.0);
  std::uniform_int_distribution<int> mm(1, 40), nn(1, 6);
  PairParams p;
  p.a = ab(rng);
  p.b = ab(rng);
  p.c = cc(rng);
  p.eps = log_uniform(rng, 1e-3, 0.5);
  p.m = mm(rng);
  p.n = nn(rng);
  const SpacePoint centre = space.sample(rng, box);
  const SpacePoint anchor = space.sample(rng, box);
  const SpacePoint x = space.sample(rng, box);
  p.centre = centre;
  p.anchor = anchor;
  const double kh = space.kappa_hat();

  ChainSample worst{i, 0.0, 0.0, -INFINITY};
  for (Side side : {Side::Dagger, Side::Ddagger}) {
    const double s = sign_of(side);
    const CylindricalTestFunction phi =
        laplace_cylinder(space, *p.b, s * *p.c, *p.eps, *p.m, *p.n, anchor, kh);
    const HamiltonianPair h1 = side == Side::Dagger
                                   ? build_cyl_dagger(space, *p.a, phi, centre)
                                   : build_cyl_ddagger(space, *p.a, phi, centre);
    const double g1 = h1.g(x);
    const double g2 = build_chain_pair(space, 2, side, p).g(x);
    // dagger: g1 <= g2; ddagger: g1 >= g2
    const double v = s * (g1 - g2);
    if (v > worst.violation) worst = {i, s > 0 ? g1 : g2, s > 0 ? g2 : g1, v};
    if (unregularized) {
      PairParams q = p;
      q.regularize = false;
      const double g2u = build_chain_pair(space, 2, side, q).g(x);
      *unregularized = std::max(*unregularized, s * (g1 - g2u));
    }
  }
  return worst;
}

ChainSample four_to_five(const ModelSpace& space, std::mt19937_64& rng, Box box,
                         std::size_t i) {
  const SpacePoint pi = space.sample(rng, box);
  const SpacePoint mu = space.sample(rng, box);
  const double eps = log_uniform(rng, 1e-3, 0.5);
  FlowPath path(space, mu);
  const TataruResult tr = tataru_eps(space, eps, pi, path);
  double lhs = -INFINITY;
  for (double t : tr.minimizers)
    lhs = std::max(lhs, bound_4to5_lhs(space, eps, pi, path, t));
  return {i, lhs, 1.0, lhs - 1.0};
}

ChainSample five_to_six(const ModelSpace& space, std::mt19937_64& rng, Box box,
                        std::size_t i) {
  std::uniform_real_distribution<double> ab(0.1, 2.0), cc(-1.0, 1.0);
  PairParams p;
  p.a = ab(rng);
  p.b = ab(rng);
  p.c = cc(rng);
  p.eps = log_uniform(rng, 1e-4, 0.5);
  p.centre = space.sample(rng, box);
  p.anchor = space.sample(rng, box);
  const SpacePoint x = space.sample(rng, box);
  const double allowed = *p.b * std::sqrt(2.0 * *p.eps);
  ChainSample worst{i, 0.0, allowed, -INFINITY};
  for (Side side : {Side::Dagger, Side::Ddagger}) {
    const FG f5 = build_chain_pair(space, 5, side, p).evaluate(x);
    const FG f6 = build_chain_pair(space, 6, side, p).evaluate(x);
    const double gap = std::abs(f5.f - f6.f);
    const double v = f5.g == f6.g ? gap - allowed : INFINITY;
    if (v > worst.violation) worst = {i, gap, allowed, v};
  }
  return worst;
}

std::optional<ChainSample> zero_to_one(const ModelSpace& space, std::mt19937_64& rng,
                                       Box box, std::size_t i) {
  std::uniform_real_distribution<double> coef(0.1, 2.0), off(-0.5, 0.5);
  std::uniform_int_distribution<int> kk(1, 3), nn(1, 5), kind(0, 1);
  const double a = coef(rng);
  const int k = kk(rng), n = nn(rng);
  CylindricalTestFunction phi0;
  for (int j = 0; j < k; ++j) phi0.anchors.push_back(space.sample(rng, box));
  if (kind(rng) == 0) {
    std::vector<double> c(k);
    for (double& v : c) v = coef(rng);
    phi0.phi = affine(std::move(c), off(rng));
  } else {
    std::vector<double> s(k), lw(k);
    for (int j = 0; j < k; ++j) {
      s[j] = coef(rng);
      lw[j] = off(rng);
    }
    phi0.phi = soft_min_psi(coef(rng), 1 + kk(rng), log_uniform(rng, 1e-3, 0.5),
                            std::move(s), std::move(lw), off(rng));
  }
  const SpacePoint rho = space.sample(rng, box);
  const SpacePoint x = space.sample(rng, box);

  const CylindricalTestFunction trunc = truncate_cylinder(phi0, a, rho, n);
  const double r0 = 0.5 * space.distance_squared(x, rho);
  const double inner = a * r0 + phi0.evaluate(space, x).value;
  if (inner > n) return std::nullopt;

  const FG h0d = build_h0_pair(space, Side::Dagger, trunc).evaluate(x);
  const FG h1d = build_cyl_dagger(space, a, phi0, rho).evaluate(x);
  const FG h0u = build_h0_pair(space, Side::Ddagger, trunc).evaluate(x);
  const FG h1u = build_cyl_ddagger(space, a, phi0, rho).evaluate(x);
  const double v = std::max({std::abs(h0d.f - h1d.f), std::abs(h0d.g - h1d.g),
                             std::abs(h0u.f - h1u.f), h1u.g - h0u.g});
  return ChainSample{i, h1u.g, h0u.g, v};
}

}  // namespace

ChainReport chain_inequality_report(const ModelSpace& space, ChainLink link,
                                    const ChainOptions& opts) {
  std::mt19937_64 rng(opts.seed);
  ChainReport rep;
  rep.link = link;
  rep.max_violation = -INFINITY;
  double unreg = -INFINITY;
  std::size_t attempts = 0;
  while (rep.samples.size() < opts.samples) {
    const std::size_t i = rep.samples.size();
    std::optional<ChainSample> s;
    switch (link) {
      case ChainLink::OneToTwo: s = one_to_two(space, rng, opts.sample_box, i, &unreg); break;
      case ChainLink::FourToFive: s = four_to_five(space, rng, opts.sample_box, i); break;
      case ChainLink::FiveToSix: s = five_to_six(space, rng, opts.sample_box, i); break;
      case ChainLink::ZeroToOneOverlap:
        s = zero_to_one(space, rng, opts.sample_box, i);
        if (++attempts > 100 * opts.samples + 1000)
          throw Error("overlap region too rarely sampled");
        break;
    }
    if (!s) continue;
    rep.max_violation = std::max(rep.max_violation, s->violation);
    rep.samples.push_back(*s);
  }
  if (link == ChainLink::OneToTwo) rep.unregularized_max_violation = unreg;
  return rep;
}

std::vector<ChainStage> chain_convergence_2to4(const ModelSpace& space, Side side,
                                               PairParams params, const SpacePoint& x,
                                               const std::vector<int>& n_list) {
  std::vector<ChainStage> out;
  const double g4 = build_chain_pair(space, 4, side, params).g(x);
  const double g5 = build_chain_pair(space, 5, side, params).g(x);
  for (int n : n_list) {
    params.n = n;
    params.m = n * n;
    out.push_back({n * n, n, build_chain_pair(space, 2, side, params).g(x), g4, g5});
  }
  return out;
}

}  // namespace hjflow
