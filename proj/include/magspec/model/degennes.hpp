#pragma once

#include <cstddef>

namespace magspec::model {

/// Ground energy mu(xi) of -d^2/dt^2 + (t - xi)^2 on [0, t_max] with Neumann
/// at t = 0 and Dirichlet at t_max, discretized on n cell-centred points.
/// Requires n >= 200 and t_max >= 15.
double degennes_ground(double xi, std::size_t n = 4000, double t_max = 20.0);

struct DeGennesMinimum {
  double xi0 = 0.0;     // minimizing xi
  double theta0 = 0.0;  // mu(xi0)
  std::size_t evaluations = 0;
};

/// Golden-section minimization of mu over xi in [0, 2].
DeGennesMinimum degennes_minimum(std::size_t n = 4000, double t_max = 20.0, double xi_tol = 1e-7);

}  // namespace magspec::model
