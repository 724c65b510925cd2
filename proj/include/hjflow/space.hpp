#pragma once

// Finite-dimensional geodesic model spaces carrying a kappa-convex energy
// whose gradient flow is known to satisfy EVI_kappa:
//
//   * Euclidean R^d with E(x) = sum_i V(x_i);
//   * the 1-D Wasserstein space in quantile coordinates, where a measure is
//     stored as its quantile function sampled at s_i = (i - 1/2)/N and the
//     potential energy is E(q) = mean_i V(q_i).
//
// In both cases the flow decouples into the scalar ODE  x' = -V'(x)  per
// coordinate.

#include <cstddef>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace hjflow {

enum class SpaceKind { Euclidean, Quantile1D };

std::string to_string(SpaceKind kind);

// Element of a model space. For Quantile1D the coordinates are the sampled
// quantiles and must be nondecreasing.
class SpacePoint {
 public:
  SpacePoint() = default;

  static SpacePoint euclidean(std::vector<double> coords);
  static SpacePoint quantile(std::vector<double> quantiles);

  SpaceKind kind() const { return kind_; }
  std::size_t size() const { return coords_.size(); }
  std::span<const double> coords() const { return coords_; }
  double operator[](std::size_t i) const { return coords_[i]; }

  friend bool operator==(const SpacePoint&, const SpacePoint&) = default;

 private:
  SpacePoint(SpaceKind kind, std::vector<double> coords)
      : kind_(kind), coords_(std::move(coords)) {}

  SpaceKind kind_ = SpaceKind::Euclidean;
  std::vector<double> coords_;
};

enum class PotentialKind {
  Quadratic,   // V = k x^2 / 2,            kappa = k
  Quartic,     // V = x^4 / 4,              kappa = 0
  DoubleWell,  // V = x^4 / 4 - s x^2 / 2,  kappa = -s
};

std::string to_string(PotentialKind kind);
PotentialKind potential_from_string(const std::string& name);

// Scalar potential with its first two derivatives and convexity modulus.
class Potential {
 public:
  static Potential quadratic(double kappa);
  static Potential quartic();
  // Requires kappa <= 0; the well depth is -kappa.
  static Potential double_well(double kappa);

  PotentialKind kind() const { return kind_; }
  double kappa() const { return kappa_; }
  double value(double x) const;
  double derivative(double x) const;
  double second_derivative(double x) const;
  // Closed form x(t) of x' = -V'(x), available for every family here. Used by
  // tests as an oracle; the library flows non-quadratic potentials
  // numerically.
  double exact_flow(double x, double t) const;

 private:
  Potential(PotentialKind kind, double kappa) : kind_(kind), kappa_(kappa) {}

  PotentialKind kind_;
  double kappa_;
};

struct Box {
  double lo = -5.0;
  double hi = 5.0;
  double diameter() const { return hi - lo; }
};

struct EnergySlope {
  double energy = 0.0;
  double slope = 0.0;
  double information() const { return slope * slope; }
};

struct FlowSettings {
  double abs_tol = 1e-11;
  double rel_tol = 1e-11;
  double initial_step = 1e-3;
};

class ModelSpace;

// Samples of the gradient flow from a common start point.
struct FlowTrajectory {
  SpacePoint start;
  std::vector<double> times;
  std::vector<SpacePoint> points;
  std::vector<double> energies;
  std::vector<double> slopes;
};

class ModelSpace {
 public:
  static ModelSpace euclidean(std::size_t dimension, Potential potential,
                              Box box = {}, FlowSettings flow = {});
  static ModelSpace quantile(std::size_t grid_size, Potential potential,
                             Box box = {}, FlowSettings flow = {});

  SpaceKind kind() const { return kind_; }
  std::size_t size() const { return size_; }
  const Potential& potential() const { return potential_; }
  const Box& box() const { return box_; }
  const FlowSettings& flow_settings() const { return flow_; }
  double kappa() const { return potential_.kappa(); }
  // min(kappa, 0), the exponent used in all exponential damping factors.
  double kappa_hat() const;
  std::string describe() const;

  // Throws Error("incompatible points") if x does not belong to this space.
  void check(const SpacePoint& x) const;
  SpacePoint point(std::vector<double> coords) const;
  SpacePoint constant_point(double value) const;

  double distance(const SpacePoint& x, const SpacePoint& y) const;
  double distance_squared(const SpacePoint& x, const SpacePoint& y) const;
  SpacePoint geodesic_point(const SpacePoint& x, const SpacePoint& y,
                            double t) const;
  EnergySlope energy_and_slope(const SpacePoint& x) const;
  double energy(const SpacePoint& x) const;
  SpacePoint flow(const SpacePoint& x, double t) const;
  FlowTrajectory flow_trajectory(const SpacePoint& x,
                                 std::span<const double> times) const;

  // Uniform sample from the sub-box [lo, hi]^N (sorted for quantiles).
  SpacePoint sample(std::mt19937_64& rng, Box within) const;
  SpacePoint sample(std::mt19937_64& rng) const { return sample(rng, box_); }

 private:
  ModelSpace(SpaceKind kind, std::size_t size, Potential potential, Box box,
             FlowSettings flow);

  // Advances coordinates by time dt in place.
  void advance(std::vector<double>& coords, double dt) const;

  friend class FlowPath;

  SpaceKind kind_;
  std::size_t size_;
  Potential potential_;
  Box box_;
  FlowSettings flow_;
};

// Memoized gradient flow from one start point. Queries are answered by
// integrating forward from the latest cached time not after the query, so
// sweeps over increasing times cost one pass of the integrator. Not
// thread-safe; make one per task.
class FlowPath {
 public:
  FlowPath(const ModelSpace& space, SpacePoint start);

  const SpacePoint& start() const { return start_; }
  const ModelSpace& space() const { return space_; }
  const SpacePoint& at(double t);

 private:
  ModelSpace space_;
  SpacePoint start_;
  std::map<double, SpacePoint> cache_;
};

}  // namespace hjflow
