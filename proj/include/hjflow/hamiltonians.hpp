#pragma once

// (f, g) pairs of the Hamiltonian families and sampled checks of the
// inequalities linking them.
//
// Naming: on the dagger side the variable is pi, with quadratic centre rho
// and flow anchor mu; on the ddagger side the variable is mu, with centre
// gamma and flow anchor pi. Internally both are "x", "centre", "anchor".

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hjflow/cylinder.hpp"
#include "hjflow/space.hpp"

namespace hjflow {

enum class Side { Dagger, Ddagger };
std::string to_string(Side s);

enum class Family {
  Cylindrical,  // H_dag / H_ddag (level 1)
  Bounded,      // H0 (bounded cylinders)
  Tataru,       // H-tilde
  Chain         // levels 2..6
};

struct FG {
  double f = 0.0;
  double g = 0.0;
};

struct PairParams {
  std::optional<double> a, b, c, eps;
  std::optional<int> m, n;
  std::optional<double> kappa_override;
  std::optional<SpacePoint> centre;  // rho (dagger) or gamma (ddagger)
  std::optional<SpacePoint> anchor;  // flow anchor: mu (dagger) or pi (ddagger)
  bool regularize = true;            // the (1/m v h) factor of levels 2, 3
};

class HamiltonianPair {
 public:
  using Evaluator = std::function<FG(const SpacePoint&)>;
  HamiltonianPair(Family family, Side side, int level, PairParams params,
                  Evaluator eval);

  Family family() const { return family_; }
  Side side() const { return side_; }
  int level() const { return level_; }
  const PairParams& params() const { return params_; }
  std::string name() const;

  FG evaluate(const SpacePoint& x) const { return eval_(x); }
  double f(const SpacePoint& x) const { return eval_(x).f; }
  double g(const SpacePoint& x) const { return eval_(x).g; }

 private:
  Family family_;
  Side side_;
  int level_;
  PairParams params_;
  Evaluator eval_;
};

// Level 1: f = a/2 d^2(x, centre) + phi(1/2 d^2(x, anchors)) on the dagger
// side and its negative on the ddagger side.
HamiltonianPair build_cyl_dagger(const ModelSpace& space, double a,
                                 CylindricalTestFunction phi, SpacePoint rho);
HamiltonianPair build_cyl_ddagger(const ModelSpace& space, double a,
                                  CylindricalTestFunction phi, SpacePoint gamma);

// Bounded cylinders without leading quadratic; anchors[0] plays rho_0.
HamiltonianPair build_h0_pair(const ModelSpace& space, Side side,
                              CylindricalTestFunction phi);

// iota_n(a r_0 + phi0(r)), anchors (rho, phi0 anchors...).
CylindricalTestFunction truncate_cylinder(const CylindricalTestFunction& phi0,
                                          double a, const SpacePoint& rho, int n);

HamiltonianPair build_tataru_pair(const ModelSpace& space, Side side, double a,
                                  double b, double c, SpacePoint centre,
                                  SpacePoint anchor,
                                  std::optional<double> kappa_override = std::nullopt);

// Levels 2..6. Missing parameters raise ConfigError naming the field.
HamiltonianPair build_chain_pair(const ModelSpace& space, int level, Side side,
                                 const PairParams& params);

// The cylindrical form of the level-2 Laplace term:
//   phi(r_1..r_{n^2}) = -(b/m) log(c_{m+1,n} sum_i exp(-m e^{kh t_i} psi_eps(r_i)
//                                                   - (m+1) t_i)) + c
// with anchors mu(i/n).
CylindricalTestFunction laplace_cylinder(const ModelSpace& space, double b,
                                         double c, double eps, int m, int n,
                                         const SpacePoint& anchor,
                                         double kappa_hat);

// Left side of the 4-to-5 bound at time t:
//   e^{kh t}[E(mu(t)) - E(pi)] psi'(1/2 d^2(pi, mu(t))) - kh/2 e^{kh t} d_eps(pi, mu(t))
double bound_4to5_lhs(const ModelSpace& space, double eps, const SpacePoint& pi,
                      FlowPath& mu_path, double t,
                      std::optional<double> kappa_override = std::nullopt);

enum class ChainLink { OneToTwo, FourToFive, FiveToSix, ZeroToOneOverlap };
std::string to_string(ChainLink link);
ChainLink chain_link_from_string(const std::string& s);

struct ChainSample {
  std::size_t instance = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  double violation = 0.0;  // lhs - rhs, positive = inequality fails
};

struct ChainReport {
  ChainLink link = ChainLink::OneToTwo;
  double max_violation = 0.0;
  std::vector<ChainSample> samples;
  // One-to-two only: the same comparison with the (1/m v h) factor dropped
  // from g2.
  std::optional<double> unregularized_max_violation;
};

struct ChainOptions {
  std::size_t samples = 500;
  std::uint64_t seed = 1;
  Box sample_box{-1.5, 1.5};
};

// Sampled check of one link of the approximation chain:
//   OneToTwo: max over both sides of g1 - g2 (dagger) and g2 - g1 (ddagger)
//     for the level-1 pair whose f equals f2.
//   FourToFive: max over t in Xi(pi) of bound_4to5_lhs - 1.
//   FiveToSix: g5 must equal g6 bit for bit and |f5 - f6| <= b sqrt(2 eps);
//     violation is |f5 - f6| - b sqrt(2 eps), or +inf if the g differ.
//   ZeroToOneOverlap: on {a r_0 + phi0 <= n}, the larger of |f0 - f1|,
//     |g0 - g1| (dagger) and g1 - g0 (ddagger).
ChainReport chain_inequality_report(const ModelSpace& space, ChainLink link,
                                    const ChainOptions& opts = {});

struct ChainStage {
  int m = 0;
  int n = 0;
  double g2 = 0.0;
  double g4 = 0.0;
  double g5 = 0.0;
};

// g2 and g4 at x along the schedule m = n^2 for each n in n_list (the other
// parameters are taken from params); g5 for reference.
std::vector<ChainStage> chain_convergence_2to4(const ModelSpace& space, Side side,
                                               PairParams params,
                                               const SpacePoint& x,
                                               const std::vector<int>& n_list);

}  // namespace hjflow
