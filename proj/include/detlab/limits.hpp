// Parameter sweeps realizing Allcock's limit (v -> infinity at fixed
// geometry) and the hard limit (v -> infinity, L -> 0, vL -> hbar^2 kappa/2m),
// with convergence bookkeeping.

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "detlab/core.hpp"
#include "detlab/eigen.hpp"
#include "detlab/evolve.hpp"

namespace detlab {

struct HardLimitEntry {
  double v;
  double L;
};

struct HardLimitSequence {
  double kappa;
  double ratio;
  std::vector<HardLimitEntry> entries;
};

/// v_i = v0 ratio^i, L_i = hbar^2 kappa / (2 m v_i).
[[nodiscard]] HardLimitSequence make_hard_sequence(double kappa, double v0, double ratio, std::size_t count,
                                                   const PhysicalConstants& constants = {});

enum class Verdict { Converging, NonConverging };

[[nodiscard]] std::string to_string(Verdict v);

struct ConvergenceReport {
  std::string sweep;
  std::string parameter_name;
  std::vector<double> parameters;
  std::vector<double> errors;
  /// Extra per-entry columns, in insertion order of their names.
  std::vector<std::pair<std::string, std::vector<double>>> auxiliary;
  std::map<std::string, double> scalars;

  /// Log-log least-squares slope of error against parameter (>= 4 points).
  std::optional<double> slope;
  std::optional<double> slope_residual;

  Verdict verdict = Verdict::NonConverging;
  /// Whether the last error is below `limit_tolerance`: the limit itself,
  /// as opposed to the informational rate.
  bool limit_reached = false;
  double limit_tolerance = 0.0;

  [[nodiscard]] const std::vector<double>& column(const std::string& name) const;
};

struct VerdictRule {
  /// Each of the last two steps must shrink the error by at least this
  /// relative amount to count as a strict decrease.
  double min_relative_decrease = 1e-3;
  std::size_t tail = 3;
};

/// Fills slope, verdict and limit_reached from parameters and errors.
void finalize(ConvergenceReport& report, double limit_tolerance, const VerdictRule& rule = {});

/// Hard-limit sweep of c_k against (k - kappa)/(k + kappa). Refuses a
/// Dirichlet wall (see sweep_ck_dirichlet).
[[nodiscard]] ConvergenceReport sweep_ck(double k, const HardLimitSequence& sequence, const WallCondition& wall,
                                         const PhysicalConstants& constants = {}, double limit_tolerance = 1e-2);

/// The same sweep with a Dirichlet wall, which does not reach the absorbing
/// boundary limit.
[[nodiscard]] ConvergenceReport sweep_ck_dirichlet(double k, const HardLimitSequence& sequence,
                                                   const PhysicalConstants& constants = {},
                                                   double limit_tolerance = 1e-2);

/// ||f_II||^2 along the sequence (Neumann wall), with |a - k/(k+kappa)| and
/// |b - k/(k+kappa)|.
[[nodiscard]] ConvergenceReport sweep_fII(double k, const HardLimitSequence& sequence,
                                          const PhysicalConstants& constants = {}, double limit_tolerance = 1e-3);

/// Allcock's limit at L = infinity: |c + 1|, |a|, R, A and the distance of
/// f_I to the Dirichlet mode exp(ikx) - exp(-ikx) on a fixed x-set.
[[nodiscard]] ConvergenceReport sweep_allcock(double k, const std::vector<double>& v_sequence,
                                              const PhysicalConstants& constants = {},
                                              double limit_tolerance = 1e-2);

/// Abscissae used by sweep_allcock for the f_I comparison.
[[nodiscard]] std::vector<double> allcock_sample_points(double k);

struct RhoTNumerics {
  double x_min = -30.0;
  /// Grid spacing; 0 picks L_min / 4.
  double dx = 0.0;
  /// Time step; 0 picks default_time_step for the largest v.
  double dt = 0.0;
  double t_end = 16.0;
  OriginWeight origin_weight = OriginWeight::CellAverage;
};

struct RhoTDistance {
  double sup;
  double l1;
};

/// sup_t |a - b| and the L1 distance over the time grid of `reference`,
/// with `other` interpolated linearly onto it.
[[nodiscard]] RhoTDistance rho_T_distance(const TimeSeries& reference, const TimeSeries& other);

struct RhoTSweep {
  ConvergenceReport report;
  TimeSeries abr;
  std::vector<TimeSeries> soft;
  Grid grid;
  double dt;
};

[[nodiscard]] RhoTSweep sweep_rhoT(const GaussianPacketSpec& packet, const HardLimitSequence& sequence,
                                   const AbsorbingBoundary& abr, const RhoTNumerics& numerics,
                                   const PhysicalConstants& constants = {}, double limit_tolerance = 0.05);

/// Finite-interval spectra of the soft model on [-ell, L] along a hard-limit
/// sequence, compared with the absorbing-boundary spectrum on [-ell, 0].
/// Reports, per entry, the largest distance from an absorbing-boundary root
/// to the nearest soft root. Informational; the verdict is not asserted.
[[nodiscard]] ConvergenceReport sweep_finite_interval(double ell, const HardLimitSequence& sequence,
                                                      const SearchWindow& window,
                                                      const PhysicalConstants& constants = {});

}  // namespace detlab
