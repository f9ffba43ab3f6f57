#pragma once

#include <cstddef>
#include <vector>

#include "magspec/geometry/adapted_frame.hpp"

namespace magspec::geometry {

/// Gauge potential on the (r, s, t) box. Node (i, j, k) is stored at
/// (i * ns + j) * nt + k.
struct GaugeA {
  std::vector<double> r_grid, s_grid, t_grid;
  std::vector<double> A1, A2, A3;
  std::vector<Eigen::Vector3d> weighted_field;  // |g|^{1/2} times the frame field
  double curl_residual = 0.0;           // max |curl A - W| over interior nodes
  double relative_curl_residual = 0.0;  // the same divided by max |W|
  double step = 0.0;                    // max(dr, ds, dt)
  double curl_constant = 0.0;           // curl_residual / step^2

  std::size_t index(std::size_t i, std::size_t j, std::size_t k) const {
    return (i * s_grid.size() + j) * t_grid.size() + k;
  }
};

/// A1 = int_0^t W2, A2 = -int_0^t W1 + F(r, s), A3 = 0 with W = |g|^{1/2} B
/// evaluated through the tubular map; cumulative trapezoid in t. The
/// central-difference curl is compared with W on the interior nodes.
/// t_grid must be uniform, start at 0 and have at least three points.
GaugeA gauge_potential(AdaptedFrame& frame, const std::vector<double>& t_grid);

/// n + 1 uniform points on [0, t_max].
std::vector<double> uniform_t_grid(double t_max, std::size_t n);

}  // namespace magspec::geometry
