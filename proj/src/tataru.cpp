#include "hjflow/tataru.hpp"

#include <algorithm>
#include <cmath>

#include "hjflow/error.hpp"

namespace hjflow {

double psi_eps(double eps, double r) {
  if (!(eps > 0.0)) throw Error("psi_eps requires eps > 0");
  if (!(r >= 0.0)) throw Error("psi_eps requires r >= 0");
  if (r >= eps) return std::sqrt(2.0 * r);
  const double s = std::sqrt(2.0 * eps);
  const double u = r - eps;
  return s + u / s - u * u / (2.0 * s * s * s);
}

double psi_eps_derivative(double eps, double r) {
  if (!(eps > 0.0)) throw Error("psi_eps requires eps > 0");
  if (!(r >= 0.0)) throw Error("psi_eps requires r >= 0");
  if (r >= eps) return 1.0 / std::sqrt(2.0 * r);
  const double s = std::sqrt(2.0 * eps);
  return 1.0 / s - (r - eps) / (s * s * s);
}

double d_eps(const ModelSpace& space, double eps, const SpacePoint& x,
             const SpacePoint& y) {
  return psi_eps(eps, 0.5 * space.distance_squared(x, y));
}

namespace {

constexpr double kInvPhi = 0.6180339887498949;

struct Refined {
  double t;
  double value;
};

Refined golden_section(const std::function<double(double)>& f, double lo,
                       double hi, double tol) {
  double a = lo, b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  return fc <= fd ? Refined{c, fc} : Refined{d, fd};
}

}  // namespace

TataruResult minimize_over_time(const std::function<double(double)>& objective,
                                double t_cap, const TataruOptions& opts) {
  if (!(t_cap > 0.0) || !std::isfinite(t_cap))
    throw Error("search horizon must be positive");
  const std::size_t n = std::max<std::size_t>(opts.grid_points, 3);
  const double step = t_cap / double(n - 1);

  std::vector<double> values(n);
  for (std::size_t k = 0; k < n; ++k) values[k] = objective(double(k) * step);

  std::vector<std::size_t> local;
  for (std::size_t k = 0; k < n; ++k) {
    const bool left_ok = k == 0 || values[k] <= values[k - 1];
    const bool right_ok = k + 1 == n || values[k] <= values[k + 1];
    if (left_ok && right_ok) local.push_back(k);
  }
  std::stable_sort(local.begin(), local.end(), [&](std::size_t i, std::size_t j) {
    return values[i] < values[j];
  });
  if (local.size() > opts.refine_starts) local.resize(opts.refine_starts);

  std::vector<Refined> refined;
  for (std::size_t k : local) {
    const double lo = k == 0 ? 0.0 : double(k - 1) * step;
    const double hi = k + 1 == n ? t_cap : double(k + 1) * step;
    Refined best = golden_section(objective, lo, hi, opts.time_tol);
    // Golden section only approaches the ends of its bracket; test the domain
    // boundary directly so boundary minima are reported exactly.
    if (k == 0 || k == 1) {
      const double f0 = k == 0 ? values[0] : objective(0.0);
      if (f0 <= best.value) best = {0.0, f0};
    }
    if (k + 1 == n && values[n - 1] <= best.value) best = {t_cap, values[n - 1]};
    if (values[k] < best.value) best = {double(k) * step, values[k]};
    refined.push_back(best);
  }

  double best_value = refined.front().value;
  for (const auto& r : refined) best_value = std::min(best_value, r.value);

  TataruResult result;
  result.value = best_value;
  result.grid = {t_cap, n};
  const double same_t = 1e-6 * std::max(1.0, t_cap);
  for (const auto& r : refined) {
    if (r.value > best_value + opts.value_tol) continue;
    const bool dup = std::any_of(
        result.minimizers.begin(), result.minimizers.end(),
        [&](double t) { return std::abs(t - r.t) < same_t; });
    if (!dup) result.minimizers.push_back(r.t);
  }
  std::sort(result.minimizers.begin(), result.minimizers.end());
  if (opts.keep_grid_values) result.grid_values = std::move(values);
  return result;
}

double tataru_tail(const ModelSpace& space, double eps, double kappa_hat,
                   const SpacePoint& pi, FlowPath& mu_path, double t) {
  const SpacePoint& mut = mu_path.at(t);
  const double dist = eps > 0.0 ? d_eps(space, eps, pi, mut)
                                : space.distance(pi, mut);
  return std::exp(kappa_hat * t) * dist;
}

namespace {

TataruResult tataru_impl(const ModelSpace& space, double eps,
                         const SpacePoint& pi, FlowPath& mu_path,
                         std::optional<double> kappa_override,
                         const TataruOptions& opts) {
  space.check(pi);
  const double kappa = kappa_override.value_or(space.kappa());
  const double khat = std::min(kappa, 0.0);
  // At t = 0 the objective equals D(pi, mu), and t alone exceeds that beyond
  // D(pi, mu); one unit of margin keeps the grid nondegenerate.
  const double t_cap = tataru_tail(space, eps, 0.0, pi, mu_path, 0.0) + 1.0;
  auto objective = [&](double t) {
    return t + tataru_tail(space, eps, khat, pi, mu_path, t);
  };
  return minimize_over_time(objective, t_cap, opts);
}

}  // namespace

TataruResult tataru(const ModelSpace& space, const SpacePoint& pi,
                    FlowPath& mu_path, std::optional<double> kappa_override,
                    const TataruOptions& opts) {
  return tataru_impl(space, 0.0, pi, mu_path, kappa_override, opts);
}

TataruResult tataru_eps(const ModelSpace& space, double eps,
                        const SpacePoint& pi, FlowPath& mu_path,
                        std::optional<double> kappa_override,
                        const TataruOptions& opts) {
  if (!(eps > 0.0)) throw Error("tataru_eps requires eps > 0");
  return tataru_impl(space, eps, pi, mu_path, kappa_override, opts);
}

TataruResult tataru(const ModelSpace& space, const SpacePoint& pi,
                    const SpacePoint& mu, std::optional<double> kappa_override,
                    const TataruOptions& opts) {
  FlowPath path(space, mu);
  return tataru(space, pi, path, kappa_override, opts);
}

TataruResult tataru_eps(const ModelSpace& space, double eps,
                        const SpacePoint& pi, const SpacePoint& mu,
                        std::optional<double> kappa_override,
                        const TataruOptions& opts) {
  FlowPath path(space, mu);
  return tataru_eps(space, eps, pi, path, kappa_override, opts);
}

}  // namespace hjflow
