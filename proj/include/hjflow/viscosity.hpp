#pragma once

// The discounted control problem
//
//   u(x) = sup_c int_0^inf e^{-t/lambda} [h(x(t))/lambda - c(t)^2/2] dt,
//   x' = -V'(x) + c,
//
// solved by semi-Lagrangian value iteration on a 1-D grid, and grid versions
// of the viscosity sub/supersolution tests and the comparison principle.

#include <functional>
#include <string>
#include <vector>

#include "hjflow/hamiltonians.hpp"
#include "hjflow/space.hpp"

namespace hjflow {

struct Grid1D {
  double lo = -5.0;
  double hi = 5.0;
  std::size_t points = 2001;

  static Grid1D with_spacing(double half_width, double dx);
  double dx() const { return (hi - lo) / double(points - 1); }
  double x(std::size_t i) const { return lo + dx() * double(i); }
  bool operator==(const Grid1D&) const = default;
};

struct GridFunction {
  Grid1D grid;
  std::vector<double> values;

  static GridFunction sample(const Grid1D& grid, const std::function<double(double)>& f);
  // Linear interpolation with constant extension outside the grid.
  double operator()(double x) const;
};

struct ResolventOptions {
  double half_width = 5.0;
  double dx = 1.0 / 200.0;
  double dt = 0.0;  // 0: lambda / 50
  double control_bound = 2.0;
  std::size_t controls = 129;
  double tol = 1e-10;
  std::size_t max_iterations = 1000000;
};

struct ResolventResult {
  GridFunction u;
  std::size_t iterations = 0;
  double last_increment = 0.0;
  double contraction = 0.0;  // exp(-dt / lambda)
  // Largest ratio of successive sup-norm increments; at most contraction.
  double worst_increment_ratio = 0.0;
};

// h is evaluated at the nodes and at the one-step feet of the characteristics.
// The space must be 1-D Euclidean.
ResolventResult solve_resolvent(const ModelSpace& space, double lambda,
                                const std::function<double(double)>& h,
                                const ResolventOptions& opts = {});

struct ViscosityReport {
  std::vector<double> optimizers;  // grid points within gap_tol of the extremum
  double extremum = 0.0;           // sup(u - f) or inf(v - f)
  double slack = 0.0;              // best u - lambda g - h over the optimizers
  double tolerance = 0.0;
  bool pass = false;
  std::string verdict;  // "pass", "marginal" (within 2x tol) or "fail"
};

ViscosityReport check_subsolution(const GridFunction& u, const ModelSpace& space,
                                  const HamiltonianPair& pair,
                                  const std::function<double(double)>& h,
                                  double lambda, double tol, double gap_tol = 1e-6);
ViscosityReport check_supersolution(const GridFunction& v, const ModelSpace& space,
                                    const HamiltonianPair& pair,
                                    const std::function<double(double)>& h,
                                    double lambda, double tol, double gap_tol = 1e-6);

struct ComparisonResult {
  double lhs = 0.0;  // max (u - v)
  double rhs = 0.0;  // max (h_dag - h_ddag)
  double tolerance = 0.0;
  bool pass = false;
};

// pass iff lhs <= rhs + 2 (solver_tol + 5 dx).
ComparisonResult comparison_gap(const GridFunction& u, const GridFunction& v,
                                const GridFunction& h_dag, const GridFunction& h_ddag,
                                double solver_tol = 1e-10);

}  // namespace hjflow
