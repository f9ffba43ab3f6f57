#pragma once

#include <complex>
#include <cstddef>
#include <random>
#include <utility>
#include <string>
#include <vector>

namespace magspec::model {

using cdouble = std::complex<double>;

/// Constant produced by completing the square in
/// (d0/2)(u^2 + (hD_u)^2) + hbar (alpha u + beta hD_u):
///   Exact       -(alpha^2 + beta^2) h / (2 d0), what the operator actually has;
///   AsPublished -(alpha^2 + beta^2) h / d0, the form quoted in the source text.
enum class ShiftConvention { Exact, AsPublished };

struct ModelSpectrum {
  double d0 = 0.0;
  double p_eff0 = 0.0;
  cdouble alpha, beta;
  double h = 0.0;
  std::vector<cdouble> eigenvalues;  // sorted by real part

  // Numeric runs only.
  std::size_t n_grid = 0;
  double window = 0.0;       // periodic window [-window, window)
  double max_residual = 0.0; // max ||M v - lambda v|| / (||M|| ||v||)
  double max_tail = 0.0;     // worst Fourier-tail or edge mass fraction of an eigenvector
};

/// lambda_n = (d0/2)(2n - 1) h + p_eff0 - c (alpha^2 + beta^2) h / d0,
/// c = 1/2 (Exact) or 1 (AsPublished), for n = 1..n_max.
ModelSpectrum model_spectrum_formula(double d0, double p_eff0, cdouble alpha, cdouble beta, double h,
                                     std::size_t n_max, ShiftConvention convention = ShiftConvention::Exact);

/// Random pair alpha = a + ib, beta = c + id with |a|, |b|, |c|, |d| <= 1 and
/// ab + cd = 0, so alpha^2 + beta^2 is real. a, b are uniform; c is redrawn
/// until |c| >= max(|ab|, 1e-3), which keeps d = -ab / c inside [-1, 1].
std::pair<cdouble, cdouble> sample_real_shift_pair(std::mt19937_64& rng);

/// Half-width of the periodic window holding the first n_max modes.
double model_window(double d0, cdouble alpha, cdouble beta, double h, std::size_t n_max);

/// Smallest grid size meeting the 30-points-per-hbar resolution rule.
std::size_t model_default_grid(double d0, cdouble alpha, cdouble beta, double h, std::size_t n_max);

/// Dense Fourier pseudo-spectral discretization of
/// p_eff0 + (d0/2)(u^2 + (hD_u)^2) + hbar(alpha u + beta hD_u), hbar = sqrt(h).
/// The lowest n_max eigenvalues come from shift-invert Arnoldi with a shift
/// left of the numerical range, so they are the ones of smallest real part
/// whenever the spectrum is real. n_grid = 0 picks model_default_grid. Throws std::invalid_argument when
/// the grid under-resolves hbar and SolverError when the a posteriori
/// checks on the eigenvectors fail.
ModelSpectrum model_spectrum_numeric(double d0, cdouble alpha, cdouble beta, double h, std::size_t n_grid,
                                     std::size_t n_max, double p_eff0 = 0.0);

struct ResolventSample {
  cdouble mu;
  double distance = 0.0;  // dist(p~ + h mu, spectrum)
  double norm = 0.0;      // ||(M - p~ - h mu)^{-1}||_2
  double ratio = 0.0;     // norm * distance
  bool skipped = false;
  std::string note;
};

struct ResolventReport {
  std::vector<ResolventSample> samples;
  double max_ratio = 0.0;
  std::size_t n_grid = 0;
};

/// Resolvent norms of the discretized model operator at p~ + h mu for each
/// sample mu, where p~ is the exact completing-the-square constant.
/// Samples closer than h/10 to the spectrum are skipped with a note.
ResolventReport model_resolvent_bound_check(double d0, cdouble alpha, cdouble beta, double h,
                                            const std::vector<cdouble>& mu_samples, std::size_t n_grid = 0);

/// Points of the closed disc |mu - center| <= radius on a polar grid.
std::vector<cdouble> disc_samples(cdouble center, double radius, std::size_t rings, std::size_t per_ring);

}  // namespace magspec::model
