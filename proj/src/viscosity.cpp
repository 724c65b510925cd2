#include "hjflow/viscosity.hpp"

#include <algorithm>
#include <cstdint>
#include <cmath>
#include <limits>

#include "hjflow/error.hpp"

namespace hjflow {

Grid1D Grid1D::with_spacing(double half_width, double dx) {
  if (!(half_width > 0.0) || !(dx > 0.0)) throw Error("grid needs positive size");
  const double cells = std::round(2.0 * half_width / dx);
  if (cells < 2) throw Error("grid too coarse");
  return {-half_width, half_width, std::size_t(cells) + 1};
}

GridFunction GridFunction::sample(const Grid1D& grid,
                                  const std::function<double(double)>& f) {
  GridFunction g{grid, std::vector<double>(grid.points)};
  for (std::size_t i = 0; i < grid.points; ++i) g.values[i] = f(grid.x(i));
  return g;
}

double GridFunction::operator()(double x) const {
  const double s = (x - grid.lo) / grid.dx();
  if (s <= 0.0) return values.front();
  if (s >= double(grid.points - 1)) return values.back();
  const std::size_t i = std::size_t(s);
  const double w = s - double(i);
  return (1.0 - w) * values[i] + w * values[i + 1];
}

ResolventResult solve_resolvent(const ModelSpace& space, double lambda,
                                const std::function<double(double)>& h,
                                const ResolventOptions& opts) {
  if (space.kind() != SpaceKind::Euclidean || space.size() != 1)
    throw Error("the control problem is solved on 1-D Euclidean space only");
  if (!(lambda > 0.0)) throw Error("lambda must be positive");
  if (!(opts.control_bound > 0.0)) throw Error("control bound must be positive");
  if (opts.controls < 1) throw Error("need at least one control");
  const double dt = opts.dt > 0.0 ? opts.dt : lambda / 50.0;
  if (dt >= lambda) throw Error("time step too large");

  const Grid1D grid = Grid1D::with_spacing(opts.half_width, opts.dx);
  const std::size_t n = grid.points, nc = opts.controls;
  const double beta = std::exp(-dt / lambda);
  const Potential& V = space.potential();

  // Discounted reward over one step, linear in time between the endpoints.
  const double w_end = lambda / dt * (1.0 - beta) - beta;
  const double w_start = (1.0 - beta) - w_end;
  std::vector<double> h_start(n);
  for (std::size_t j = 0; j < n; ++j) h_start[j] = w_start * h(grid.x(j));

  // Interpolation stencil and one-step reward per (node, control).
  std::vector<std::uint32_t> idx(n * nc);
  std::vector<double> wt(n * nc);
  std::vector<double> reward(n * nc);
  std::vector<double> cost(nc);
  for (std::size_t k = 0; k < nc; ++k) {
    const double c = nc == 1 ? 0.0
                             : -opts.control_bound +
                                   2.0 * opts.control_bound * double(k) / double(nc - 1);
    cost[k] = -0.5 * lambda * (1.0 - beta) * c * c;
    for (std::size_t j = 0; j < n; ++j) {
      const double x = grid.x(j);
      // Heun step along the controlled drift
      const double k1 = -V.derivative(x) + c;
      const double y = x + 0.5 * dt * (k1 - V.derivative(x + dt * k1) + c);
      double s = std::clamp((y - grid.lo) / grid.dx(), 0.0, double(n - 1));
      std::size_t i = std::min<std::size_t>(std::size_t(s), n - 2);
      idx[j * nc + k] = std::uint32_t(i);
      wt[j * nc + k] = s - double(i);
      reward[j * nc + k] = h_start[j] + w_end * h(y) + cost[k];
    }
  }

  ResolventResult res;
  res.contraction = beta;
  std::vector<double> u(n, 0.0), next(n);
  double prev_inc = 0.0;
  for (std::size_t it = 1; it <= opts.max_iterations; ++it) {
    double inc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double best = -std::numeric_limits<double>::infinity();
      const std::size_t base = j * nc;
      for (std::size_t k = 0; k < nc; ++k) {
        const std::size_t i = idx[base + k];
        const double w = wt[base + k];
        const double cont = (1.0 - w) * u[i] + w * u[i + 1];
        best = std::max(best, reward[base + k] + beta * cont);
      }
      next[j] = best;
      inc = std::max(inc, std::abs(next[j] - u[j]));
    }
    u.swap(next);
    // ratios of increments near round-off carry no information
    if (it > 1 && prev_inc > 1e-9)
      res.worst_increment_ratio = std::max(res.worst_increment_ratio, inc / prev_inc);
    prev_inc = inc;
    res.iterations = it;
    res.last_increment = inc;
    if (inc <= opts.tol) {
      res.u = {grid, std::move(u)};
      return res;
    }
  }
  throw NumericalError("value iteration did not converge", res.last_increment);
}

namespace {

ViscosityReport check(const GridFunction& u, const ModelSpace& space,
                      const HamiltonianPair& pair,
                      const std::function<double(double)>& h, double lambda,
                      double tol, double gap_tol, bool sub) {
  if (space.kind() != SpaceKind::Euclidean || space.size() != 1)
    throw Error("grid checks need 1-D Euclidean space");
  if (pair.side() != (sub ? Side::Dagger : Side::Ddagger))
    throw Error(sub ? "subsolution check needs a dagger-side pair"
                    : "supersolution check needs a ddagger-side pair");
  const std::size_t n = u.grid.points;
  std::vector<double> diff(n);
  for (std::size_t i = 0; i < n; ++i) {
    diff[i] = u.values[i] - pair.f(space.point({u.grid.x(i)}));
    if (!std::isfinite(diff[i])) throw Error("test function not finite on the grid");
  }
  ViscosityReport rep;
  rep.tolerance = tol;
  rep.extremum = sub ? *std::max_element(diff.begin(), diff.end())
                     : *std::min_element(diff.begin(), diff.end());
  rep.slack = sub ? std::numeric_limits<double>::infinity()
                  : -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(diff[i] - rep.extremum) > gap_tol) continue;
    const double x = u.grid.x(i);
    rep.optimizers.push_back(x);
    const double s = u.values[i] - lambda * pair.g(space.point({x})) - h(x);
    rep.slack = sub ? std::min(rep.slack, s) : std::max(rep.slack, s);
  }
  if (rep.optimizers.empty()) throw Error("internal: no near-optimizer on the grid");
  const double excess = sub ? rep.slack : -rep.slack;
  rep.pass = excess <= tol;
  rep.verdict = rep.pass ? "pass" : excess <= 2.0 * tol ? "marginal" : "fail";
  return rep;
}

}  // namespace

ViscosityReport check_subsolution(const GridFunction& u, const ModelSpace& space,
                                  const HamiltonianPair& pair,
                                  const std::function<double(double)>& h,
                                  double lambda, double tol, double gap_tol) {
  return check(u, space, pair, h, lambda, tol, gap_tol, true);
}

ViscosityReport check_supersolution(const GridFunction& v, const ModelSpace& space,
                                    const HamiltonianPair& pair,
                                    const std::function<double(double)>& h,
                                    double lambda, double tol, double gap_tol) {
  return check(v, space, pair, h, lambda, tol, gap_tol, false);
}

ComparisonResult comparison_gap(const GridFunction& u, const GridFunction& v,
                                const GridFunction& h_dag, const GridFunction& h_ddag,
                                double solver_tol) {
  if (!(u.grid == v.grid) || !(u.grid == h_dag.grid) || !(u.grid == h_ddag.grid))
    throw Error("grid mismatch");
  ComparisonResult r;
  r.lhs = -std::numeric_limits<double>::infinity();
  r.rhs = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < u.grid.points; ++i) {
    r.lhs = std::max(r.lhs, u.values[i] - v.values[i]);
    r.rhs = std::max(r.rhs, h_dag.values[i] - h_ddag.values[i]);
  }
  r.tolerance = 2.0 * (solver_tol + 5.0 * u.grid.dx());
  r.pass = r.lhs <= r.rhs + r.tolerance;
  return r;
}

}  // namespace hjflow
