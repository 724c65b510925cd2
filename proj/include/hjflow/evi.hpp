#pragma once

// Numerical checks of the evolution variational inequality
//
//   1/2 d+/dt d^2(mu(t), rho) <= E(rho) - E(mu(t)) - kappa/2 d^2(mu(t), rho)
//
// and of the integrated estimates it implies for the flow (contraction,
// energy identity, slope decay, distance growth). Every check returns a
// violation: positive means the inequality failed by that much.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "hjflow/space.hpp"

namespace hjflow {

// Forward-difference EVI residual at time t with step delta.
double evi_residual(const ModelSpace& space, const SpacePoint& x,
                    const SpacePoint& rho, double t, double delta);

// max_t d(mu(t), nu(t)) - exp(-kappa t) d(x, y)
double contraction_violation(const ModelSpace& space, const SpacePoint& x,
                             const SpacePoint& y, std::span<const double> times);

// |E(end) - E(start) + int I| with the integral by the trapezoid rule on the
// trajectory's own samples.
double energy_identity_residual(const ModelSpace& space,
                                const FlowTrajectory& traj);

// max_t I(mu(t)) - I(x) exp(-2 kappa t)
double slope_decay_violation(const ModelSpace& space, const SpacePoint& x,
                             std::span<const double> times);

// Right-hand side of the integrated distance estimate
//   1/2 e^{kappa t} d^2(pi, mu(t)) <= R(t)
// (kappa = 0 uses the limiting polynomial form).
double distance_growth_bound(double kappa, double half_d2, double energy_gap,
                             double information, double t);

// max_t LHS - RHS of the integrated distance estimate.
double distance_growth_violation(const ModelSpace& space, const SpacePoint& pi,
                                 const SpacePoint& mu,
                                 std::span<const double> times);

// max over t and eps of exp(kappa_hat t) d_eps(pi, mu(t)) minus the bound on
// exp(kappa_hat t) d(pi, mu(t)) implied by the integrated estimate plus the
// smoothing gap sqrt(2 eps). eps = 0 means the plain metric.
double distance_eps_growth_violation(const ModelSpace& space,
                                     const SpacePoint& pi, const SpacePoint& mu,
                                     std::span<const double> times,
                                     std::span<const double> eps_values);

// Sup-over-t horizon: 20 / max(|kappa|, 0.2).
double evi_time_horizon(double kappa);

struct EviWorstCase {
  SpacePoint point;
  double time = 0.0;
  SpacePoint reference;
};

struct EviCheckRow {
  std::string check;
  std::size_t instance = 0;
  double value = 0.0;
  double bound = 0.0;
  double violation = 0.0;
  bool pass = true;
};

struct EviReport {
  double max_residual = 0.0;
  EviWorstCase worst_case;
  std::map<std::string, double> table;  // check name -> max violation
  std::vector<EviCheckRow> rows;
  bool kappa_positive_growth_from_proof = false;
};

struct EviSuiteOptions {
  std::size_t instances = 200;
  double delta = 1e-4;
  Box sample_box{-2.0, 2.0};
  std::size_t time_samples = 64;           // sup-over-t checks
  std::size_t energy_samples = 4001;       // energy identity trapezoid
  double energy_horizon = 0.0;             // 0 -> evi_time_horizon(kappa)
  double tol_evi = 1e-3;                   // acceptance margin 10 * delta
  double tol_flow = 1e-3;                  // contraction / slope / growth
  double tol_energy = 1e-3;
  std::uint64_t seed = 1;
};

// The five EVI checks on randomized instances.
EviReport run_evi_suite(const ModelSpace& space, const EviSuiteOptions& opts);

}  // namespace hjflow
