// Physical constants, detector descriptions, grids, and wave states shared
// by every other part of the library.
//
// Conventions: natural units hbar = m = 1 unless overridden. The detector
// always sits at x >= 0; the free region is x < 0. The node at x = 0 belongs
// to the detector region (Theta(0) = 1).

#pragma once

#include <complex>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace detlab {

using cplx = std::complex<double>;

inline constexpr cplx I{0.0, 1.0};

/// Raised when parameters combine into a genuinely singular configuration
/// (vanishing mode denominators, Robin poles, singular CN systems).
class ResonanceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an iterative or time-stepping procedure fails its own
/// consistency checks.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PhysicalConstants {
  double hbar = 1.0;
  double mass = 1.0;

  void validate() const;

  /// 2m/hbar^2, the factor converting energies into squared wave numbers.
  [[nodiscard]] double k_squared_per_energy() const { return 2.0 * mass / (hbar * hbar); }
  [[nodiscard]] double energy_of(double k) const { return hbar * hbar * k * k / (2.0 * mass); }
  [[nodiscard]] cplx energy_of(cplx k) const { return hbar * hbar * k * k / (2.0 * mass); }

  friend bool operator==(const PhysicalConstants&, const PhysicalConstants&) = default;
};

// Right-wall conditions for the imaginary-potential detector at x = L.
struct Neumann {};
struct Robin {
  double alpha = 0.0;  // psi'(L) = alpha psi(L)
};
struct Dirichlet {};
using WallCondition = std::variant<Neumann, Robin, Dirichlet>;

/// Soft detector: -i v Theta(x) on [0, L] with a wall at L. L may be
/// +infinity (no wall), which is the setting of Allcock's limit.
struct ImaginaryPotential {
  double v = 0.0;
  double L = 1.0;
  WallCondition wall = Neumann{};
};

/// Hard detector: free evolution on x <= 0 with psi'(0) = (nu + i kappa) psi(0).
struct AbsorbingBoundary {
  double kappa = 1.0;
  double nu = 0.0;

  [[nodiscard]] cplx beta() const { return {nu, kappa}; }
};

/// psi(0) = 0.
struct HardWall {};

using DetectorSpec = std::variant<ImaginaryPotential, AbsorbingBoundary, HardWall>;

void validate(const DetectorSpec& spec);
void validate(const WallCondition& wall);
[[nodiscard]] std::string describe(const DetectorSpec& spec);
[[nodiscard]] std::string describe(const WallCondition& wall);

/// Right edge of the computational domain for a model: L for the soft
/// detector, 0 otherwise.
[[nodiscard]] double right_edge(const DetectorSpec& spec);

class Grid {
 public:
  Grid(double x_min, double x_max, std::size_t n);

  /// Uniform grid with spacing <= max_dx carrying nodes exactly at 0 and at
  /// x_right >= 0. The left edge is moved left of x_left by less than one
  /// spacing so that it also falls on a node.
  static Grid anchored(double x_left, double x_right, double max_dx);

  [[nodiscard]] double x_min() const { return x_min_; }
  [[nodiscard]] double x_max() const { return x_max_; }
  [[nodiscard]] std::size_t size() const { return n_; }
  [[nodiscard]] double dx() const { return dx_; }
  [[nodiscard]] double x(std::size_t i) const;

  /// Index of the node at abscissa x, if one lies within 1e-9 dx of it.
  [[nodiscard]] std::ptrdiff_t node_at(double x) const;
  /// Index of the nearest node.
  [[nodiscard]] std::size_t nearest(double x) const;

  [[nodiscard]] std::vector<double> nodes() const;

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.x_min_ == b.x_min_ && a.x_max_ == b.x_max_ && a.n_ == b.n_;
  }

 private:
  double x_min_;
  double x_max_;
  std::size_t n_;
  double dx_;
};

struct WaveState {
  Grid grid;
  std::vector<cplx> amplitudes;
  double time = 0.0;

  WaveState(Grid g, std::vector<cplx> amps, double t = 0.0);
};

struct GaussianPacketSpec {
  double x0 = -10.0;
  double sigma = 1.0;
  double k0 = 2.0;

  friend bool operator==(const GaussianPacketSpec&, const GaussianPacketSpec&) = default;
};

/// Relative amplitude above which a packet is considered to touch a domain
/// edge.
inline constexpr double kEdgeContaminationThreshold = 1e-8;

[[nodiscard]] WaveState make_gaussian_packet(const Grid& grid, const GaussianPacketSpec& spec);

/// max(|psi(x_min)|, |psi(x_max)|) / max|psi|; zero for the zero state.
[[nodiscard]] double edge_ratio(const WaveState& state);

[[nodiscard]] double norm_squared(const WaveState& state);
[[nodiscard]] cplx inner_product(const WaveState& a, const WaveState& b);

/// Trapezoid rule over uniformly spaced samples.
[[nodiscard]] double trapezoid(std::span<const double> values, double dx);
[[nodiscard]] cplx trapezoid(std::span<const cplx> values, double dx);

}  // namespace detlab
