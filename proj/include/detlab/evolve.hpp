// Crank-Nicolson propagation of wave packets on a truncated domain and the
// detection-time observables derived from it.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "detlab/core.hpp"

namespace detlab {

/// Tridiagonal Hamiltonian on the grid. Rows outside [first, last] are
/// Dirichlet nodes held at zero and take no part in the dynamics.
struct DiscreteHamiltonian {
  Grid grid;
  DetectorSpec model;
  std::vector<cplx> diagonal;
  std::vector<double> lower;  // lower[i] couples row i to node i-1
  std::vector<double> upper;  // upper[i] couples row i to node i+1
  std::size_t first = 0;
  std::size_t last = 0;

  [[nodiscard]] std::vector<cplx> apply(const std::vector<cplx>& psi) const;

  /// max |H_ij - conj(H_ji)| over the active block.
  [[nodiscard]] double max_asymmetry() const;
  [[nodiscard]] double max_abs_diagonal() const;
};

/// Weight of the imaginary potential on the node at x = 0. `Full` applies
/// Theta(0) = 1 literally, which biases the detector length by dx/2;
/// `CellAverage` uses 1/2, the average of Theta over that node's cell.
enum class OriginWeight { CellAverage, Full };

[[nodiscard]] DiscreteHamiltonian build_hamiltonian(const Grid& grid, const DetectorSpec& model,
                                                    const PhysicalConstants& constants = {},
                                                    OriginWeight origin_weight = OriginWeight::CellAverage);

/// Precomputed Crank-Nicolson factorization of (1 + i dt H / 2 hbar).
class CrankNicolson {
 public:
  CrankNicolson(DiscreteHamiltonian H, double dt, const PhysicalConstants& constants);

  void advance(std::vector<cplx>& psi) const;
  [[nodiscard]] const DiscreteHamiltonian& hamiltonian() const { return H_; }
  [[nodiscard]] double dt() const { return dt_; }

 private:
  DiscreteHamiltonian H_;
  double dt_;
  cplx half_;                 // i dt / (2 hbar)
  std::vector<cplx> c_prime_; // modified upper coefficients
  std::vector<cplx> inv_den_; // 1 / pivot
  mutable std::vector<cplx> rhs_;
};

[[nodiscard]] WaveState step(const WaveState& state, const DiscreteHamiltonian& H, double dt,
                             const PhysicalConstants& constants = {});

/// Probability current (hbar/m) Im[psi* dpsi/dx] at a node. Interior nodes
/// use the centered difference, edge nodes the one-sided second-order one.
[[nodiscard]] double flux(const WaveState& state, std::size_t node, const PhysicalConstants& constants = {});

struct PlaceDensitySnapshot {
  double time;
  std::vector<double> x;
  std::vector<double> density;  // (2v/hbar)|psi|^2 on detector nodes
};

struct TimeSeries {
  std::vector<double> times;
  std::vector<double> norm_sq;
  /// -d||psi||^2/dt by centered differences, aligned with `times`.
  std::vector<double> rho_T_norm;
  /// Hard detector only (empty otherwise).
  std::vector<double> rho_T_flux;
  std::vector<double> rho_T_pointwise;
  std::vector<PlaceDensitySnapshot> place_density;

  [[nodiscard]] bool has_abr_columns() const { return !rho_T_flux.empty(); }

  /// -(N_{n+1} - N_n)/dt stamped at the midpoints t_n + dt/2.
  [[nodiscard]] std::vector<double> midpoint_times() const;
  [[nodiscard]] std::vector<double> midpoint_rho_T() const;
};

struct RunOptions {
  /// Times at which to record soft-detector place densities (nearest step).
  std::vector<double> density_times;
  /// Keep every n-th state (0 disables). Used by the Bohmian sampler.
  std::size_t snapshot_every = 0;
  /// Reject initial states touching a domain edge.
  bool require_clear_edges = true;
  /// Allowed per-step growth of ||psi||^2 before the run is declared broken.
  double norm_growth_tolerance = 1e-10;
  /// |rho_T| at the end of the run below which the survival is considered
  /// to have plateaued, relative to the peak of rho_T.
  double plateau_fraction = 1e-3;
  OriginWeight origin_weight = OriginWeight::CellAverage;
};

struct RunResult {
  TimeSeries series;
  WaveState final_state;
  std::vector<WaveState> snapshots;
  double never_detected;       // terminal ||psi||^2
  bool plateaued;
  std::vector<std::string> warnings;
};

[[nodiscard]] RunResult run(const WaveState& initial, const DetectorSpec& model, double dt, std::size_t n_steps,
                            const PhysicalConstants& constants = {}, const RunOptions& options = {});

/// Time step following the default resolution rule: dt hbar k0^2/2m <= 1e-2
/// and dt v/hbar <= 1e-2 (the second only for the soft model).
[[nodiscard]] double default_time_step(double k0, const DetectorSpec& model, const PhysicalConstants& constants);

/// Largest dt with dt * max|diag H| / hbar <= 1.
[[nodiscard]] double accuracy_guard_time_step(const DiscreteHamiltonian& H, const PhysicalConstants& constants);

/// Trapezoid integral of a series sampled at `times`.
[[nodiscard]] double integrate(const std::vector<double>& times, const std::vector<double>& values);

/// Linear interpolation of (times, values) at t; clamps outside the range.
[[nodiscard]] double interpolate(const std::vector<double>& times, const std::vector<double>& values, double t);

}  // namespace detlab
