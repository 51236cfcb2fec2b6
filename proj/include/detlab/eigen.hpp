// Closed-form eigenmodes of the soft (imaginary potential) and hard
// (absorbing boundary) detector Hamiltonians.
//
// Region I (x < 0):      f(x) = exp(ikx) + c exp(-ikx)
// Region II (0 <= x <= L): f(x) = a exp(i lambda x) + b exp(-i lambda x),
//                          lambda^2 = k^2 + i 2 m v / hbar^2, Re lambda > 0.

#pragma once

#include <optional>
#include <vector>

#include "detlab/core.hpp"

namespace detlab {

struct Eigenmode {
  DetectorSpec model;
  cplx k;
  std::optional<cplx> lambda;  // soft detector only
  cplx c;
  cplx a{0.0, 0.0};  // soft detector only
  cplx b{0.0, 0.0};  // soft detector only
  cplx energy{0.0, 0.0};
};

/// Square root of k^2 + i 2mv/hbar^2 in the first quadrant, taken through
/// the half angle of the principal argument.
[[nodiscard]] cplx lambda_of(double k, double v, const PhysicalConstants& constants);

/// Same branch choice (Re lambda >= 0) for complex k; used by the
/// finite-interval spectrum, where c_k is even in lambda so the branch cut
/// does not matter.
[[nodiscard]] cplx lambda_of(cplx k, double v, const PhysicalConstants& constants);

/// Ratio b/a imposed by the wall at L. Neumann: exp(2i lambda L); Robin(alpha):
/// (i lambda - alpha)/(i lambda + alpha) exp(2i lambda L); Dirichlet: the
/// negative of the Neumann factor. L = +inf gives 0.
[[nodiscard]] cplx wall_factor(cplx lambda, double L, const WallCondition& wall);

/// Scattering mode of the soft detector for real k > 0 (L may be +inf).
[[nodiscard]] Eigenmode soft_mode(double k, double v, double L, const WallCondition& wall,
                                  const PhysicalConstants& constants);

/// Reflection coefficient of the soft detector as an analytic function of
/// complex k. Throws ResonanceError on a vanishing denominator.
[[nodiscard]] cplx soft_reflection(cplx k, double v, double L, const WallCondition& wall,
                                   const PhysicalConstants& constants);

/// Mode of the soft detector with no right wall (L = infinity).
[[nodiscard]] Eigenmode allcock_mode(double k, double v, const PhysicalConstants& constants);

[[nodiscard]] Eigenmode hard_mode(double k, double kappa, double nu,
                                  const PhysicalConstants& constants = {});

/// c_k = (k - kappa + i nu)/(k + kappa - i nu), valid for complex k.
[[nodiscard]] cplx hard_reflection(cplx k, double kappa, double nu);

[[nodiscard]] cplx eval_mode(const Eigenmode& mode, double x);

/// d/dx of the mode, evaluated analytically.
[[nodiscard]] cplx eval_mode_derivative(const Eigenmode& mode, double x);

struct ReflectionAbsorption {
  double R;
  double A;
};

[[nodiscard]] ReflectionAbsorption reflection_absorption(const Eigenmode& mode);

/// Formal inner product <f_{k2}, f_k> of two half-line modes with boundary
/// terms at -infinity dropped.
[[nodiscard]] cplx mode_overlap_formula(double k, double k2, cplx c, cplx c2);

/// Integral over [0, L] of |f_II|^2 in closed form.
[[nodiscard]] double fII_norm_squared(const Eigenmode& mode);

// --- finite interval [-ell, 0] (hard) or [-ell, L] (soft), Dirichlet at -ell

struct SearchWindow {
  double re_min = 0.05;
  double re_max = 5.0;
  double im_min = -2.0;
  double im_max = 0.0;
  std::size_t seeds_re = 40;
  std::size_t seeds_im = 10;
  double tolerance = 1e-12;
  int max_iterations = 100;

  friend bool operator==(const SearchWindow&, const SearchWindow&) = default;
};

struct SpectrumPoint {
  cplx k;
  cplx energy;     // omega = E - i mu
  double mu;       // -Im(omega) > 0
  double residual; // |c_k + exp(-2 i k ell)|
};

struct SpectrumResult {
  std::vector<SpectrumPoint> points;  // sorted by Re k
  std::size_t seeds_tried = 0;
  std::size_t seeds_failed = 0;       // no convergence within the budget
};

/// Quantization condition residual c_k + exp(-2 i k ell) for the model.
[[nodiscard]] cplx quantization_condition(cplx k, double ell, const DetectorSpec& model,
                                          const PhysicalConstants& constants);

[[nodiscard]] SpectrumResult finite_interval_spectrum(double ell, const DetectorSpec& model,
                                                      const SearchWindow& window,
                                                      const PhysicalConstants& constants = {});

/// Eigenfunction exp(ikx) + c_k exp(-ikx) of a finite-interval root sampled
/// on the given grid (which must end at 0 for the hard model).
[[nodiscard]] WaveState sample_finite_interval_mode(const SpectrumPoint& point, const DetectorSpec& model,
                                                    const Grid& grid, const PhysicalConstants& constants);

}  // namespace detlab
