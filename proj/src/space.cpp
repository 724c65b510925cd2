#include "hjflow/space.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/numeric/odeint.hpp>

#include "hjflow/error.hpp"

namespace hjflow {

std::string to_string(SpaceKind kind) {
  return kind == SpaceKind::Euclidean ? "euclidean" : "quantile";
}

SpacePoint SpacePoint::euclidean(std::vector<double> coords) {
  for (double c : coords)
    if (!std::isfinite(c)) throw Error("non-finite coordinate");
  return SpacePoint(SpaceKind::Euclidean, std::move(coords));
}

SpacePoint SpacePoint::quantile(std::vector<double> quantiles) {
  for (std::size_t i = 0; i < quantiles.size(); ++i) {
    if (!std::isfinite(quantiles[i])) throw Error("non-finite coordinate");
    if (i > 0 && quantiles[i] < quantiles[i - 1])
      throw Error("quantiles must be nondecreasing");
  }
  return SpacePoint(SpaceKind::Quantile1D, std::move(quantiles));
}

std::string to_string(PotentialKind kind) {
  switch (kind) {
    case PotentialKind::Quadratic: return "quadratic";
    case PotentialKind::Quartic: return "quartic";
    case PotentialKind::DoubleWell: return "double-well";
  }
  return "?";
}

PotentialKind potential_from_string(const std::string& name) {
  if (name == "quadratic") return PotentialKind::Quadratic;
  if (name == "quartic") return PotentialKind::Quartic;
  if (name == "double-well" || name == "double_well")
    return PotentialKind::DoubleWell;
  throw Error("unknown potential '" + name + "'");
}

Potential Potential::quadratic(double kappa) {
  if (!std::isfinite(kappa)) throw Error("non-finite kappa");
  return Potential(PotentialKind::Quadratic, kappa);
}

Potential Potential::quartic() { return Potential(PotentialKind::Quartic, 0.0); }

Potential Potential::double_well(double kappa) {
  if (!(kappa <= 0.0) || !std::isfinite(kappa))
    throw Error("double-well potential requires kappa <= 0");
  return Potential(PotentialKind::DoubleWell, kappa);
}

double Potential::value(double x) const {
  switch (kind_) {
    case PotentialKind::Quadratic: return 0.5 * kappa_ * x * x;
    case PotentialKind::Quartic: return 0.25 * x * x * x * x;
    case PotentialKind::DoubleWell:
      return 0.25 * x * x * x * x + 0.5 * kappa_ * x * x;
  }
  return 0.0;
}

double Potential::derivative(double x) const {
  switch (kind_) {
    case PotentialKind::Quadratic: return kappa_ * x;
    case PotentialKind::Quartic: return x * x * x;
    case PotentialKind::DoubleWell: return x * x * x + kappa_ * x;
  }
  return 0.0;
}

double Potential::second_derivative(double x) const {
  switch (kind_) {
    case PotentialKind::Quadratic: return kappa_;
    case PotentialKind::Quartic: return 3.0 * x * x;
    case PotentialKind::DoubleWell: return 3.0 * x * x + kappa_;
  }
  return 0.0;
}

double Potential::exact_flow(double x, double t) const {
  switch (kind_) {
    case PotentialKind::Quadratic: return x * std::exp(-kappa_ * t);
    case PotentialKind::Quartic: return x / std::sqrt(1.0 + 2.0 * x * x * t);
    case PotentialKind::DoubleWell: {
      const double s = -kappa_;
      if (x == 0.0) return 0.0;
      if (s == 0.0) return x / std::sqrt(1.0 + 2.0 * x * x * t);
      const double decay = std::exp(-2.0 * s * t);
      const double x2 = s / (1.0 + (s / (x * x) - 1.0) * decay);
      return std::copysign(std::sqrt(x2), x);
    }
  }
  return x;
}

ModelSpace::ModelSpace(SpaceKind kind, std::size_t size, Potential potential,
                       Box box, FlowSettings flow)
    : kind_(kind), size_(size), potential_(potential), box_(box), flow_(flow) {
  if (size_ == 0) throw Error("space dimension must be positive");
  if (!(box_.lo < box_.hi)) throw Error("empty working box");
}

ModelSpace ModelSpace::euclidean(std::size_t dimension, Potential potential,
                                 Box box, FlowSettings flow) {
  return ModelSpace(SpaceKind::Euclidean, dimension, potential, box, flow);
}

ModelSpace ModelSpace::quantile(std::size_t grid_size, Potential potential,
                                Box box, FlowSettings flow) {
  return ModelSpace(SpaceKind::Quantile1D, grid_size, potential, box, flow);
}

double ModelSpace::kappa_hat() const { return std::min(kappa(), 0.0); }

std::string ModelSpace::describe() const {
  std::ostringstream os;
  os << to_string(kind_) << "(N=" << size_ << ", V=" << to_string(potential_.kind())
     << ", kappa=" << kappa() << ")";
  return os.str();
}

void ModelSpace::check(const SpacePoint& x) const {
  if (x.kind() != kind_ || x.size() != size_)
    throw Error("incompatible points");
}

SpacePoint ModelSpace::point(std::vector<double> coords) const {
  if (coords.size() != size_) throw Error("incompatible points");
  return kind_ == SpaceKind::Euclidean ? SpacePoint::euclidean(std::move(coords))
                                       : SpacePoint::quantile(std::move(coords));
}

SpacePoint ModelSpace::constant_point(double value) const {
  return point(std::vector<double>(size_, value));
}

double ModelSpace::distance_squared(const SpacePoint& x,
                                    const SpacePoint& y) const {
  check(x);
  check(y);
  double sum = 0.0;
  for (std::size_t i = 0; i < size_; ++i) {
    const double diff = x[i] - y[i];
    sum += diff * diff;
  }
  // The quantile metric is the L2(0,1) norm on the midpoint grid.
  return kind_ == SpaceKind::Euclidean ? sum : sum / double(size_);
}

double ModelSpace::distance(const SpacePoint& x, const SpacePoint& y) const {
  return std::sqrt(distance_squared(x, y));
}

SpacePoint ModelSpace::geodesic_point(const SpacePoint& x, const SpacePoint& y,
                                      double t) const {
  check(x);
  check(y);
  if (!(t >= 0.0 && t <= 1.0)) throw Error("parameter out of range");
  std::vector<double> out(size_);
  for (std::size_t i = 0; i < size_; ++i)
    out[i] = (1.0 - t) * x[i] + t * y[i];
  if (kind_ == SpaceKind::Quantile1D) {
    // Convex combinations of nondecreasing vectors stay nondecreasing up to
    // rounding; clean that up.
    for (std::size_t i = 1; i < size_; ++i) out[i] = std::max(out[i], out[i - 1]);
  }
  return point(std::move(out));
}

EnergySlope ModelSpace::energy_and_slope(const SpacePoint& x) const {
  check(x);
  double energy = 0.0;
  double grad2 = 0.0;
  for (double c : x.coords()) {
    energy += potential_.value(c);
    const double g = potential_.derivative(c);
    grad2 += g * g;
  }
  if (kind_ == SpaceKind::Quantile1D) {
    energy /= double(size_);
    grad2 /= double(size_);
  }
  return {energy, std::sqrt(grad2)};
}

double ModelSpace::energy(const SpacePoint& x) const {
  return energy_and_slope(x).energy;
}

void ModelSpace::advance(std::vector<double>& coords, double dt) const {
  if (dt <= 0.0) return;
  if (potential_.kind() == PotentialKind::Quadratic) {
    const double factor = std::exp(-potential_.kappa() * dt);
    for (double& c : coords) c *= factor;
    return;
  }
  namespace odeint = boost::numeric::odeint;
  using State = std::vector<double>;
  const Potential v = potential_;
  auto rhs = [&v](const State& s, State& ds, double) {
    for (std::size_t i = 0; i < s.size(); ++i) ds[i] = -v.derivative(s[i]);
  };
  auto stepper = odeint::make_controlled(flow_.abs_tol, flow_.rel_tol,
                                         odeint::runge_kutta_dopri5<State>());
  odeint::integrate_adaptive(stepper, rhs, coords, 0.0, dt,
                             std::min(flow_.initial_step, dt));
}

SpacePoint ModelSpace::flow(const SpacePoint& x, double t) const {
  check(x);
  if (t < 0.0) throw Error("negative time");
  std::vector<double> coords(x.coords().begin(), x.coords().end());
  advance(coords, t);
  if (kind_ == SpaceKind::Quantile1D)
    for (std::size_t i = 1; i < size_; ++i)
      coords[i] = std::max(coords[i], coords[i - 1]);
  return point(std::move(coords));
}

FlowTrajectory ModelSpace::flow_trajectory(const SpacePoint& x,
                                           std::span<const double> times) const {
  check(x);
  FlowTrajectory traj;
  traj.start = x;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (!(times[k] >= 0.0)) throw Error("negative time");
    if (k > 0 && !(times[k] > times[k - 1]))
      throw Error("times must be strictly increasing");
  }
  FlowPath path(*this, x);
  for (double t : times) {
    const SpacePoint& p = path.at(t);
    const EnergySlope es = energy_and_slope(p);
    traj.times.push_back(t);
    traj.points.push_back(p);
    traj.energies.push_back(es.energy);
    traj.slopes.push_back(es.slope);
  }
  return traj;
}

SpacePoint ModelSpace::sample(std::mt19937_64& rng, Box within) const {
  std::uniform_real_distribution<double> unif(within.lo, within.hi);
  std::vector<double> coords(size_);
  for (double& c : coords) c = unif(rng);
  if (kind_ == SpaceKind::Quantile1D) std::sort(coords.begin(), coords.end());
  return point(std::move(coords));
}

FlowPath::FlowPath(const ModelSpace& space, SpacePoint start)
    : space_(space), start_(std::move(start)) {
  space_.check(start_);
  cache_.emplace(0.0, start_);
}

const SpacePoint& FlowPath::at(double t) {
  if (t < 0.0) throw Error("negative time");
  auto it = cache_.upper_bound(t);
  --it;  // key 0 is always present
  if (it->first == t) return it->second;
  if (space_.potential().kind() == PotentialKind::Quadratic) {
    // Exact map; integrate from the origin to avoid compounding rounding.
    return cache_.emplace(t, space_.flow(start_, t)).first->second;
  }
  std::vector<double> coords(it->second.coords().begin(),
                             it->second.coords().end());
  space_.advance(coords, t - it->first);
  if (space_.kind() == SpaceKind::Quantile1D)
    for (std::size_t i = 1; i < coords.size(); ++i)
      coords[i] = std::max(coords[i], coords[i - 1]);
  return cache_.emplace(t, space_.point(std::move(coords))).first->second;
}

}  // namespace hjflow
