#pragma once

// Tataru distance
//
//   d_T(pi, mu) = inf_{t >= 0} { t + exp(kappa_hat t) d(pi, mu(t)) }
//
// where mu(t) is the gradient flow started at mu, and its smoothed variant
// d_{T,eps} in which d is replaced by d_eps = psi_eps(d^2 / 2).

#include <functional>
#include <optional>
#include <vector>

#include "hjflow/space.hpp"

namespace hjflow {

// Smooth replacement of r -> sqrt(2 r): a quadratic in r on [0, eps] glued
// C^2 to sqrt(2 r) for r >= eps.
double psi_eps(double eps, double r);
double psi_eps_derivative(double eps, double r);

double d_eps(const ModelSpace& space, double eps, const SpacePoint& x,
             const SpacePoint& y);

struct TimeGrid {
  double t_cap = 0.0;
  std::size_t points = 0;
};

struct TataruResult {
  double value = 0.0;
  // Refined local minima whose objective is within 1e-9 of the best; this is
  // the argmin set Xi.
  std::vector<double> minimizers;
  TimeGrid grid;
  std::vector<double> grid_values;  // objective on the coarse grid
};

struct TataruOptions {
  std::size_t grid_points = 512;
  std::size_t refine_starts = 3;
  double value_tol = 1e-9;
  double time_tol = 1e-10;
  bool keep_grid_values = false;
};

// Minimizes t + objective_tail(t) over [0, t_cap]. objective_tail must be
// finite on the interval; exposed for reuse and testing.
TataruResult minimize_over_time(const std::function<double(double)>& objective,
                                double t_cap, const TataruOptions& opts = {});

// h_pi(t) = exp(kappa_hat t) * D(pi, mu(t)) with D = d (eps = 0) or d_eps.
double tataru_tail(const ModelSpace& space, double eps, double kappa_hat,
                   const SpacePoint& pi, FlowPath& mu_path, double t);

TataruResult tataru(const ModelSpace& space, const SpacePoint& pi,
                    const SpacePoint& mu,
                    std::optional<double> kappa_override = std::nullopt,
                    const TataruOptions& opts = {});

TataruResult tataru_eps(const ModelSpace& space, double eps,
                        const SpacePoint& pi, const SpacePoint& mu,
                        std::optional<double> kappa_override = std::nullopt,
                        const TataruOptions& opts = {});

// Variants reusing a caller-owned flow cache for mu.
TataruResult tataru(const ModelSpace& space, const SpacePoint& pi,
                    FlowPath& mu_path,
                    std::optional<double> kappa_override = std::nullopt,
                    const TataruOptions& opts = {});
TataruResult tataru_eps(const ModelSpace& space, double eps,
                        const SpacePoint& pi, FlowPath& mu_path,
                        std::optional<double> kappa_override = std::nullopt,
                        const TataruOptions& opts = {});

}  // namespace hjflow
