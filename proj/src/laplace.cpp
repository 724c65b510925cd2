#include "hjflow/laplace.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "hjflow/error.hpp"
#include "hjflow/tataru.hpp"

namespace hjflow {

namespace {

double log_add(double a, double b) {
  if (a == -INFINITY) return b;
  if (b == -INFINITY) return a;
  const double hi = std::max(a, b), lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

void require_positive(int m, int n) {
  if (m < 1) throw Error("m must be >= 1");
  if (n < 1) throw Error("n must be >= 1");
}

}  // namespace

double log_sum_exp(const std::vector<double>& v) {
  if (v.empty()) return -INFINITY;
  const double s = *std::max_element(v.begin(), v.end());
  if (s == -INFINITY) return -INFINITY;
  double acc = 0.0;
  for (double x : v) acc += std::exp(x - s);
  return s + std::log(acc);
}

DiscreteMeasure DiscreteMeasure::from_log_weights(std::vector<double> times,
                                                  std::vector<double> log_weights) {
  if (times.size() != log_weights.size() || times.empty())
    throw Error("measure needs matching, nonempty atoms and weights");
  std::vector<std::size_t> order(times.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return times[i] < times[j]; });
  const double total = log_sum_exp(log_weights);
  if (!std::isfinite(total)) throw Error("measure has no mass");
  DiscreteMeasure mu;
  mu.times_.reserve(order.size());
  for (std::size_t k : order) {
    mu.times_.push_back(times[k]);
    mu.log_weights_.push_back(log_weights[k] - total);
    mu.weights_.push_back(std::exp(log_weights[k] - total));
  }
  return mu;
}

double DiscreteMeasure::mass_where(const std::function<bool(double)>& pred) const {
  double m = 0.0;
  for (std::size_t i = 0; i < size(); ++i)
    if (pred(times_[i])) m += weights_[i];
  return m;
}

double DiscreteMeasure::expectation(const std::function<double(double)>& f) const {
  double s = 0.0;
  for (std::size_t i = 0; i < size(); ++i)
    if (weights_[i] > 0.0) s += weights_[i] * f(times_[i]);
  return s;
}

double log_exp_normalizer(int m, int n) {
  require_positive(m, n);
  const double step = double(m) / double(n);
  // sum_{i=1}^{n^2} q^i = q (1 - q^{n^2}) / (1 - q), q = e^{-m/n}
  const double log_sum = -step + std::log(-std::expm1(-double(m) * double(n))) -
                         std::log(-std::expm1(-step));
  return -log_sum;
}

DiscreteMeasure discrete_exp_measure(int m, int n) {
  const double log_c = log_exp_normalizer(m, n);
  const std::size_t count = std::size_t(n) * std::size_t(n);
  std::vector<double> t(count), lw(count);
  for (std::size_t i = 1; i <= count; ++i) {
    t[i - 1] = double(i) / double(n);
    lw[i - 1] = log_c - double(m) * double(i) / double(n);
  }
  return DiscreteMeasure::from_log_weights(std::move(t), std::move(lw));
}

double LaplaceValue::lambda() const { return std::exp(log_lambda); }

LaplaceValue laplace_discrete(const TimeFunction& h, int m, int n) {
  require_positive(m, n);
  const int M = m + 1;
  const double log_c = log_exp_normalizer(M, n);
  const double step = double(M) / double(n);
  // log of sum_{j > i} of the weights, relative to the weight of atom i
  const double log_tail_factor = -step - std::log(-std::expm1(-step));
  const std::size_t count = std::size_t(n) * std::size_t(n);

  double acc = -INFINITY;
  for (std::size_t i = 1; i <= count; ++i) {
    const double t = double(i) / double(n);
    const double lw = log_c - step * double(i);
    const double hv = h(t);
    if (!(hv >= 0.0)) throw Error("Laplace integrand requires h >= 0");
    acc = log_add(acc, lw - double(m) * hv);
    // Remaining atoms carry at most their weight since e^{-m h} <= 1.
    if (lw + log_tail_factor < acc - 40.0) break;
  }
  LaplaceValue out;
  out.log_lambda = acc;
  out.neg_log = -acc / double(m);
  return out;
}

namespace {

using Kronrod = boost::math::quadrature::gauss_kronrod<double, 15>;
using Gauss = boost::math::quadrature::gauss<double, 7>;

struct Panel {
  double a, b;
  double log_value;  // Kronrod estimate
  double log_error;  // log |K - G|
  std::array<double, 15> nodes;
  std::array<double, 15> log_w;  // log(weight * half width) + log f
};

// Nodes ordered as x_0 = 0, +-x_1, ..., +-x_7 of the Kronrod rule; the Gauss
// rule uses the even-indexed abscissae.
Panel make_panel(const std::function<double(double)>& log_f, double a, double b) {
  static const auto& kx = Kronrod::abscissa();
  static const auto& kw = Kronrod::weights();
  static const auto& gw = Gauss::weights();
  const double c = 0.5 * (a + b), half = 0.5 * (b - a);
  Panel p{a, b, 0.0, 0.0, {}, {}};
  std::array<double, 15> lf{};
  std::array<double, 15> wk{}, wg{};
  std::size_t idx = 0;
  for (std::size_t j = 0; j < kx.size(); ++j) {
    const int signs = j == 0 ? 1 : 2;
    for (int s = 0; s < signs; ++s) {
      const double x = s == 0 ? c + half * kx[j] : c - half * kx[j];
      p.nodes[idx] = x;
      lf[idx] = log_f(x);
      wk[idx] = kw[j];
      wg[idx] = j % 2 == 0 ? gw[j / 2] : 0.0;
      ++idx;
    }
  }
  double shift = -INFINITY;
  for (double v : lf) shift = std::max(shift, v);
  if (shift == -INFINITY) {
    p.log_value = p.log_error = -INFINITY;
    for (std::size_t i = 0; i < 15; ++i) p.log_w[i] = -INFINITY;
    return p;
  }
  double k = 0.0, g = 0.0;
  for (std::size_t i = 0; i < 15; ++i) {
    const double e = std::exp(lf[i] - shift);
    k += wk[i] * e;
    g += wg[i] * e;
    p.log_w[i] = std::log(wk[i] * half) + lf[i];
  }
  p.log_value = shift + std::log(k * half);
  const double diff = std::abs(k - g) * half;
  p.log_error = diff > 0.0 ? shift + std::log(diff) : -INFINITY;
  return p;
}

}  // namespace

LaplaceValue laplace_continuous(const TimeFunction& h, int m, double horizon,
                                std::vector<double> breakpoints,
                                const QuadratureOptions& opts,
                                QuadratureNodes* nodes) {
  if (m < 1) throw Error("m must be >= 1");
  if (!(horizon > 0.0) || !std::isfinite(horizon))
    throw Error("quadrature horizon must be positive");
  const double M = double(m) + 1.0;
  const double log_M = std::log(M);
  auto log_f = [&](double t) {
    const double hv = h(t);
    if (!(hv >= 0.0)) throw Error("Laplace integrand requires h >= 0");
    return log_M - M * t - double(m) * hv;
  };

  std::vector<double> cuts;
  const std::size_t pieces = std::max<std::size_t>(opts.initial_pieces, 1);
  for (std::size_t k = 0; k <= pieces; ++k)
    cuts.push_back(horizon * double(k) / double(pieces));
  for (double b : breakpoints)
    if (b > 0.0 && b < horizon) cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(),
                         [&](double x, double y) { return y - x < 1e-12 * horizon; }),
             cuts.end());
  if (cuts.back() != horizon) cuts.back() = horizon;

  std::vector<Panel> panels;
  for (std::size_t k = 1; k < cuts.size(); ++k)
    panels.push_back(make_panel(log_f, cuts[k - 1], cuts[k]));

  auto totals = [&](double& log_value, double& log_err) {
    std::vector<double> v, e;
    v.reserve(panels.size());
    e.reserve(panels.size());
    for (const Panel& p : panels) {
      v.push_back(p.log_value);
      e.push_back(p.log_error);
    }
    log_value = log_sum_exp(v);
    log_err = log_sum_exp(e);
  };

  double log_value = 0.0, log_err = 0.0;
  totals(log_value, log_err);
  const double log_tol = std::log(opts.rel_tol);
  while (log_err - log_value > log_tol) {
    if (panels.size() >= opts.max_intervals)
      throw NumericalError("quadrature did not converge",
                           std::exp(log_err - log_value));
    auto worst = std::max_element(panels.begin(), panels.end(),
                                  [](const Panel& x, const Panel& y) {
                                    return x.log_error < y.log_error;
                                  });
    const double a = worst->a, b = worst->b, mid = 0.5 * (a + b);
    if (!(mid > a && mid < b))
      throw NumericalError("quadrature interval underflow",
                           std::exp(log_err - log_value));
    *worst = make_panel(log_f, a, mid);
    panels.push_back(make_panel(log_f, mid, b));
    totals(log_value, log_err);
  }

  LaplaceValue out;
  out.log_tail_bound = -M * horizon;
  out.log_tail_estimate = -M * horizon - double(m) * h(horizon);
  out.log_lambda = log_add(log_value, out.log_tail_estimate);
  out.neg_log = -out.log_lambda / double(m);
  out.quadrature_error = std::exp(log_err - log_value);

  if (nodes) {
    std::sort(panels.begin(), panels.end(),
              [](const Panel& x, const Panel& y) { return x.a < y.a; });
    nodes->times.clear();
    nodes->log_weights.clear();
    for (const Panel& p : panels)
      for (std::size_t i = 0; i < 15; ++i) {
        nodes->times.push_back(p.nodes[i]);
        nodes->log_weights.push_back(p.log_w[i]);
      }
  }
  return out;
}

namespace {

struct ModelIntegrand {
  FlowPath path;
  double kappa_hat;
  TataruResult tataru;

  ModelIntegrand(const ModelSpace& space, double eps, const SpacePoint& pi,
                 const SpacePoint& mu)
      : path(space, mu), kappa_hat(space.kappa_hat()) {
    if (eps < 0.0) throw Error("epsilon must be >= 0");
    space.check(pi);
    tataru = eps > 0.0 ? tataru_eps(space, eps, pi, path) : hjflow::tataru(space, pi, path);
  }

  TimeFunction h(const ModelSpace& space, double eps, const SpacePoint& pi) {
    return [this, &space, eps, &pi](double t) {
      return tataru_tail(space, eps, kappa_hat, pi, path, t);
    };
  }

  double horizon(int m) const { return tataru.grid.t_cap + 5.0 / (double(m) + 1.0); }
};

}  // namespace

LaplaceValue lambda_discrete(const ModelSpace& space, double eps, int m, int n,
                             const SpacePoint& pi, const SpacePoint& mu) {
  if (eps < 0.0) throw Error("epsilon must be >= 0");
  space.check(pi);
  FlowPath path(space, mu);
  const double khat = space.kappa_hat();
  return laplace_discrete(
      [&](double t) { return tataru_tail(space, eps, khat, pi, path, t); }, m, n);
}

LaplaceValue lambda_continuous(const ModelSpace& space, double eps, int m,
                               const SpacePoint& pi, const SpacePoint& mu,
                               const QuadratureOptions& opts) {
  ModelIntegrand in(space, eps, pi, mu);
  return laplace_continuous(in.h(space, eps, pi), m, in.horizon(m),
                            in.tataru.minimizers, opts);
}

DiscreteMeasure tilted_measure(const TimeFunction& h, int m, double horizon,
                               std::vector<double> breakpoints) {
  QuadratureNodes nodes;
  laplace_continuous(h, m, horizon, std::move(breakpoints), {}, &nodes);
  return DiscreteMeasure::from_log_weights(std::move(nodes.times),
                                           std::move(nodes.log_weights));
}

DiscreteMeasure tilted_measure(const ModelSpace& space, double eps, int m,
                               const SpacePoint& pi, const SpacePoint& mu) {
  ModelIntegrand in(space, eps, pi, mu);
  return tilted_measure(in.h(space, eps, pi), m, in.horizon(m), in.tataru.minimizers);
}

std::vector<VaradhanPoint> varadhan_error_curve(const ModelSpace& space, double eps,
                                                const SpacePoint& pi,
                                                const SpacePoint& mu,
                                                const std::vector<int>& m_list,
                                                const std::vector<int>& n_list) {
  for (std::size_t k = 1; k < m_list.size(); ++k)
    if (m_list[k] <= m_list[k - 1]) throw Error("m values must be increasing");
  ModelIntegrand in(space, eps, pi, mu);
  const double target = in.tataru.value;
  const TimeFunction h = in.h(space, eps, pi);
  std::vector<VaradhanPoint> out;
  for (int m : m_list) {
    const LaplaceValue v =
        laplace_continuous(h, m, in.horizon(m), in.tataru.minimizers);
    out.push_back({m, 0, v.neg_log, target, std::abs(v.neg_log - target)});
    for (int n : n_list) {
      const LaplaceValue d = laplace_discrete(h, m, n);
      out.push_back({m, n, d.neg_log, target, std::abs(d.neg_log - target)});
    }
  }
  return out;
}

}  // namespace hjflow
