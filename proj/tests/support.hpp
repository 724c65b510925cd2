#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "hjflow/space.hpp"

namespace hjflow::testing {

inline ModelSpace ou(std::size_t dim = 1) {
  return ModelSpace::euclidean(dim, Potential::quadratic(1.0));
}
inline ModelSpace quartic(std::size_t dim = 1) {
  return ModelSpace::euclidean(dim, Potential::quartic());
}
inline ModelSpace double_well(std::size_t dim = 1, double kappa = -1.0) {
  return ModelSpace::euclidean(dim, Potential::double_well(kappa));
}
inline ModelSpace quantile_ou(std::size_t n = 16) {
  return ModelSpace::quantile(n, Potential::quadratic(1.0));
}
inline ModelSpace quantile_quartic(std::size_t n = 16) {
  return ModelSpace::quantile(n, Potential::quartic());
}

inline SpacePoint pt(double x) { return SpacePoint::euclidean({x}); }

// Every model space used by the randomized suites.
inline std::vector<ModelSpace> all_spaces() {
  return {ou(), ou(3), quartic(), quartic(2), double_well(),
          quantile_ou(), quantile_quartic(),
          ModelSpace::quantile(8, Potential::double_well(-0.5))};
}

}  // namespace hjflow::testing
