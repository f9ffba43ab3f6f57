#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace magspec::linalg {

using Complex = std::complex<double>;
using CVector = std::vector<Complex>;

/// Conjugate-linear in the first argument: sum conj(x_i) y_i.
inline Complex dot(std::span<const Complex> x, std::span<const Complex> y) {
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double a = x[i].real(), b = x[i].imag(), c = y[i].real(), d = y[i].imag();
    re += a * c + b * d;
    im += a * d - b * c;
  }
  return {re, im};
}

inline double norm2(std::span<const Complex> x) {
  double s = 0.0;
  for (const auto& v : x) s += std::norm(v);
  return std::sqrt(s);
}

// y += a x
inline void axpy(Complex a, std::span<const Complex> x, std::span<Complex> y) {
  const double ar = a.real(), ai = a.imag();
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xr = x[i].real(), xi = x[i].imag();
    y[i] = {y[i].real() + ar * xr - ai * xi, y[i].imag() + ar * xi + ai * xr};
  }
}

inline void scale(Complex a, std::span<Complex> x) {
  const double ar = a.real(), ai = a.imag();
  for (auto& v : x) v = {ar * v.real() - ai * v.imag(), ar * v.imag() + ai * v.real()};
}

}  // namespace magspec::linalg
