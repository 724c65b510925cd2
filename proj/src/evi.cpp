#include "hjflow/evi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "hjflow/error.hpp"
#include "hjflow/tataru.hpp"

namespace hjflow {

double evi_residual(const ModelSpace& space, const SpacePoint& x,
                    const SpacePoint& rho, double t, double delta) {
  if (!(delta > 0.0)) throw Error("finite-difference step must be positive");
  if (t < 0.0) throw Error("negative time");
  FlowPath path(space, x);
  const SpacePoint mut = path.at(t);
  const SpacePoint mut_next = path.at(t + delta);
  const double half_d2 = 0.5 * space.distance_squared(mut, rho);
  const double half_d2_next = 0.5 * space.distance_squared(mut_next, rho);
  const double lhs = (half_d2_next - half_d2) / delta;
  const double rhs = space.energy(rho) - space.energy(mut) -
                     space.kappa() * half_d2;
  return lhs - rhs;
}

double contraction_violation(const ModelSpace& space, const SpacePoint& x,
                             const SpacePoint& y, std::span<const double> times) {
  FlowPath px(space, x), py(space, y);
  const double d0 = space.distance(x, y);
  double worst = -std::numeric_limits<double>::infinity();
  for (double t : times) {
    if (t < 0.0) throw Error("negative time");
    const double lhs = space.distance(px.at(t), py.at(t));
    worst = std::max(worst, lhs - std::exp(-space.kappa() * t) * d0);
  }
  return times.empty() ? 0.0 : worst;
}

double energy_identity_residual(const ModelSpace& space,
                                const FlowTrajectory& traj) {
  (void)space;
  const std::size_t n = traj.times.size();
  if (n < 2) throw Error("trajectory too short");
  double integral = 0.0;
  for (std::size_t k = 1; k < n; ++k) {
    const double dt = traj.times[k] - traj.times[k - 1];
    const double i0 = traj.slopes[k - 1] * traj.slopes[k - 1];
    const double i1 = traj.slopes[k] * traj.slopes[k];
    integral += 0.5 * dt * (i0 + i1);
  }
  return std::abs(traj.energies.back() - traj.energies.front() + integral);
}

double slope_decay_violation(const ModelSpace& space, const SpacePoint& x,
                             std::span<const double> times) {
  FlowPath path(space, x);
  const double info0 = space.energy_and_slope(x).information();
  double worst = -std::numeric_limits<double>::infinity();
  for (double t : times) {
    const double info = space.energy_and_slope(path.at(t)).information();
    worst = std::max(worst, info - info0 * std::exp(-2.0 * space.kappa() * t));
  }
  return times.empty() ? 0.0 : worst;
}

double distance_growth_bound(double kappa, double half_d2, double energy_gap,
                             double information, double t) {
  if (kappa == 0.0)
    return half_d2 + t * energy_gap + 0.5 * t * t * information;
  const double growth = std::expm1(kappa * t) / kappa;
  const double s = std::sinh(0.5 * kappa * t) / kappa;
  // (e^{kt} + e^{-kt} - 2) / (2 k^2) = 2 sinh^2(kt/2) / k^2
  return half_d2 + growth * energy_gap + information * 2.0 * s * s;
}

double distance_growth_violation(const ModelSpace& space, const SpacePoint& pi,
                                 const SpacePoint& mu,
                                 std::span<const double> times) {
  const double kappa = space.kappa();
  const double half_d2 = 0.5 * space.distance_squared(pi, mu);
  const EnergySlope es_mu = space.energy_and_slope(mu);
  const double gap = space.energy(pi) - es_mu.energy;
  FlowPath path(space, mu);
  double worst = -std::numeric_limits<double>::infinity();
  for (double t : times) {
    const double lhs =
        0.5 * std::exp(kappa * t) * space.distance_squared(pi, path.at(t));
    const double rhs =
        distance_growth_bound(kappa, half_d2, gap, es_mu.information(), t);
    // For kappa > 0 both sides are multiplied by e^{-kappa t} so the
    // comparison happens at unit scale.
    const double scale = kappa > 0.0 ? std::exp(-kappa * t) : 1.0;
    worst = std::max(worst, (lhs - rhs) * scale);
  }
  return times.empty() ? 0.0 : worst;
}

double distance_eps_growth_violation(const ModelSpace& space,
                                     const SpacePoint& pi, const SpacePoint& mu,
                                     std::span<const double> times,
                                     std::span<const double> eps_values) {
  const double kappa = space.kappa();
  const double khat = space.kappa_hat();
  const double half_d2 = 0.5 * space.distance_squared(pi, mu);
  const EnergySlope es_mu = space.energy_and_slope(mu);
  const double gap = space.energy(pi) - es_mu.energy;
  FlowPath path(space, mu);
  double worst = -std::numeric_limits<double>::infinity();
  for (double t : times) {
    const SpacePoint& mut = path.at(t);
    const double rhs =
        distance_growth_bound(kappa, half_d2, gap, es_mu.information(), t);
    const double d_bound =
        std::exp(khat * t) *
        std::sqrt(std::max(0.0, 2.0 * rhs * std::exp(-kappa * t)));
    for (double eps : eps_values) {
      const double de = eps > 0.0 ? d_eps(space, eps, pi, mut)
                                  : space.distance(pi, mut);
      const double lhs = std::exp(khat * t) * de;
      worst = std::max(worst, lhs - (d_bound + std::sqrt(2.0 * eps)));
    }
  }
  return worst;
}

double evi_time_horizon(double kappa) {
  return 20.0 / std::max(std::abs(kappa), 0.2);
}

namespace {

std::vector<double> quadratic_times(double horizon, std::size_t count) {
  std::vector<double> times(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double u = double(k) / double(count - 1);
    times[k] = horizon * u * u;
  }
  return times;
}

}  // namespace

EviReport run_evi_suite(const ModelSpace& space, const EviSuiteOptions& opts) {
  if (opts.instances == 0) throw Error("evi suite needs at least one instance");
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double horizon = evi_time_horizon(space.kappa());
  const double energy_horizon =
      opts.energy_horizon > 0.0 ? opts.energy_horizon : horizon;
  const std::vector<double> times = quadratic_times(horizon, opts.time_samples);
  const std::vector<double> energy_times =
      quadratic_times(energy_horizon, opts.energy_samples);

  EviReport report;
  report.max_residual = -std::numeric_limits<double>::infinity();
  report.kappa_positive_growth_from_proof = space.kappa() > 0.0;
  auto record = [&](const std::string& check, std::size_t i, double value,
                    double tol) {
    EviCheckRow row{check, i, value, tol, value, value <= tol};
    report.rows.push_back(row);
    auto [it, inserted] = report.table.emplace(check, value);
    if (!inserted) it->second = std::max(it->second, value);
  };

  for (std::size_t i = 0; i < opts.instances; ++i) {
    const SpacePoint x = space.sample(rng, opts.sample_box);
    const SpacePoint rho = space.sample(rng, opts.sample_box);
    const double t = 2.0 * unit(rng);

    const double res = evi_residual(space, x, rho, t, opts.delta);
    if (res > report.max_residual) {
      report.max_residual = res;
      report.worst_case = {x, t, rho};
    }
    record("evi_residual", i, res, opts.tol_evi);
    record("contraction", i, contraction_violation(space, x, rho, times),
           opts.tol_flow);
    record("energy_identity", i,
           energy_identity_residual(space,
                                    space.flow_trajectory(x, energy_times)),
           opts.tol_energy);
    record("slope_decay", i, slope_decay_violation(space, x, times),
           opts.tol_flow);
    record("distance_growth", i,
           distance_growth_violation(space, rho, x, times), opts.tol_flow);
  }
  return report;
}

}  // namespace hjflow
