#pragma once

// Cylindrical test functions pi -> phi(1/2 d^2(pi, mu_1), ..., 1/2 d^2(pi, mu_k))
// with phi built from a small combinator family so that partial derivatives
// are exact and their positivity can be checked.

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "hjflow/space.hpp"

namespace hjflow {

class Phi {
 public:
  virtual ~Phi() = default;
  virtual std::size_t arity() const = 0;
  // Value, with the gradient written to grad (size arity()).
  virtual double evaluate(std::span<const double> r, std::span<double> grad) const = 0;
  double value(std::span<const double> r) const;
  std::vector<double> gradient(std::span<const double> r) const;
  virtual bool bounded() const { return false; }
  virtual std::string describe() const = 0;
};

using PhiPtr = std::shared_ptr<const Phi>;

// sum_i c_i r_i + offset, all c_i > 0.
PhiPtr affine(std::vector<double> coeffs, double offset = 0.0);

// -(b/m) log sum_i exp(l_i - m s_i psi_eps(r_i)) + c, with s_i > 0.
PhiPtr soft_min_psi(double b, int m, double eps, std::vector<double> scales,
                    std::vector<double> log_weights, double c = 0.0);

// iota_n(inner(r)); bounded by n + 1.
PhiPtr truncate(PhiPtr inner, int n);

// phi_1(r_block1) + phi_2(r_block2) + ... on consecutive argument blocks.
PhiPtr block_sum(std::vector<PhiPtr> parts);

// Smooth increasing iota_n: r for r <= n, n + 1 for r >= n + 2, iota_n <= r.
double iota(int n, double r);
double iota_derivative(int n, double r);

// Largest |symbolic - central difference| over the partials at r.
double partials_mismatch(const Phi& phi, std::span<const double> r, double h = 1e-6);

struct CylinderValue {
  double value = 0.0;
  std::vector<double> r;         // 1/2 d^2 to each anchor
  std::vector<double> dist;      // d to each anchor
  std::vector<double> partials;  // d phi / d r_i
};

struct CylindricalTestFunction {
  PhiPtr phi;
  std::vector<SpacePoint> anchors;

  // Throws Error("not in class T") if a partial is nonpositive (zero partials
  // are allowed on the flat part of a bounded, truncated phi).
  CylinderValue evaluate(const ModelSpace& space, const SpacePoint& x) const;
  bool bounded() const { return phi && phi->bounded(); }
};

}  // namespace hjflow
