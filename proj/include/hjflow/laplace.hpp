#pragma once

// Exponential measures on the time axis and Laplace-type integrals
//
//   Lambda = int exp(-m h(t)) lambda(dt)
//
// against the discretized measure lambda_{m+1,n} or the continuous
// exponential law (m+1) e^{-(m+1)t} dt. Everything is accumulated in log
// space; Lambda itself underflows long before -(1/m) log Lambda loses
// precision.

#include <cmath>
#include <functional>
#include <vector>

#include "hjflow/space.hpp"

namespace hjflow {

class DiscreteMeasure {
 public:
  DiscreteMeasure() = default;
  // Builds a probability measure from unnormalized log-weights. Atoms are
  // sorted by time.
  static DiscreteMeasure from_log_weights(std::vector<double> times,
                                          std::vector<double> log_weights);

  std::size_t size() const { return times_.size(); }
  const std::vector<double>& times() const { return times_; }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<double>& log_weights() const { return log_weights_; }

  double mass_where(const std::function<bool(double)>& pred) const;
  double expectation(const std::function<double(double)>& f) const;

 private:
  std::vector<double> times_;
  std::vector<double> weights_;
  std::vector<double> log_weights_;  // normalized
};

// Atoms i/n, i = 1..n^2, weights proportional to e^{-m i/n}.
DiscreteMeasure discrete_exp_measure(int m, int n);
// log c_{m,n} = -log sum_i e^{-m i/n}
double log_exp_normalizer(int m, int n);

double log_sum_exp(const std::vector<double>& v);

struct LaplaceValue {
  double log_lambda = 0.0;
  double neg_log = 0.0;  // -(1/m) log Lambda
  // Continuous case only: log of the tail contribution added beyond the
  // quadrature horizon, and log of its upper bound e^{-(m+1) T}.
  double log_tail_estimate = -INFINITY;
  double log_tail_bound = -INFINITY;
  double quadrature_error = 0.0;  // relative, continuous case
  double lambda() const;
};

using TimeFunction = std::function<double(double)>;

// int e^{-m h} d lambda_{m+1,n}. h must be bounded below by 0.
LaplaceValue laplace_discrete(const TimeFunction& h, int m, int n);

struct QuadratureOptions {
  double rel_tol = 1e-12;
  std::size_t max_intervals = 20000;
  std::size_t initial_pieces = 64;
};

// Nodes and log-weights of the quadrature rule used for the continuous
// integral; log_weights already include the exponential density and the
// tilt e^{-m h}.
struct QuadratureNodes {
  std::vector<double> times;
  std::vector<double> log_weights;
};

// int_0^inf e^{-m h(t)} (m+1) e^{-(m+1)t} dt by adaptive Gauss-Kronrod on
// [0, horizon] split at the given breakpoints; the tail beyond the horizon is
// estimated as e^{-(m+1)T} e^{-m h(T)} (exact for constant h) and bounded by
// e^{-(m+1)T}.
LaplaceValue laplace_continuous(const TimeFunction& h, int m, double horizon,
                                std::vector<double> breakpoints = {},
                                const QuadratureOptions& opts = {},
                                QuadratureNodes* nodes = nullptr);

// Model-space versions with h(t) = e^{kappa_hat t} d_eps(pi, mu(t)).
LaplaceValue lambda_discrete(const ModelSpace& space, double eps, int m, int n,
                             const SpacePoint& pi, const SpacePoint& mu);
LaplaceValue lambda_continuous(const ModelSpace& space, double eps, int m,
                               const SpacePoint& pi, const SpacePoint& mu,
                               const QuadratureOptions& opts = {});

// Tilt of the continuous exponential law by e^{-m h}, on the quadrature
// nodes of lambda_continuous.
DiscreteMeasure tilted_measure(const ModelSpace& space, double eps, int m,
                               const SpacePoint& pi, const SpacePoint& mu);
DiscreteMeasure tilted_measure(const TimeFunction& h, int m, double horizon,
                               std::vector<double> breakpoints = {});

struct VaradhanPoint {
  int m = 0;
  int n = 0;  // 0: continuous measure
  double neg_log = 0.0;
  double target = 0.0;
  double abs_error = 0.0;
};

// |-(1/m) log Lambda - d_{T,eps}(pi, mu)| for each m (continuous measure),
// and for each (m, n) pair if n_list is nonempty.
std::vector<VaradhanPoint> varadhan_error_curve(
    const ModelSpace& space, double eps, const SpacePoint& pi,
    const SpacePoint& mu, const std::vector<int>& m_list,
    const std::vector<int>& n_list = {});

}  // namespace hjflow
