// Bohmian trajectories guided by stored evolution snapshots, with stochastic
// absorption inside the soft detector or first-arrival detection at the
// absorbing boundary.

#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "detlab/core.hpp"

namespace detlab {

struct TrajectoryOutcome {
  bool detected = false;
  double detection_time = 0.0;   // meaningful when detected
  double detection_place = 0.0;  // meaningful when detected
  bool left_domain = false;      // reached x_min; counted as not detected
  bool hit_density_floor = false;
  bool reexited_detector = false;  // was inside x >= 0 and came back out
  std::vector<double> path;      // positions at snapshot times, if requested
};

/// Deterministic uniform variates in [0, 1) for a (seed, stream) pair. The
/// stream index gives each trajectory its own substream.
class UniformStream {
 public:
  UniformStream(std::uint64_t seed, std::uint64_t stream);
  double next();

 private:
  std::mt19937_64 gen_;
};

[[nodiscard]] std::vector<double> sample_initial_positions(const WaveState& state, std::size_t n, std::uint64_t seed);

struct BohmOptions {
  /// Integration substeps per snapshot interval.
  std::size_t substeps = 4;
  /// |psi|^2 floor in the velocity j / max(|psi|^2, floor).
  double density_floor = 1e-30;
  bool record_paths = false;
  /// Worker threads (0 = hardware concurrency).
  std::size_t threads = 0;
};

/// Velocity field and density tabulated on snapshot states, interpolated
/// linearly in x and t.
class GuidanceField {
 public:
  GuidanceField(const std::vector<WaveState>& snapshots, const PhysicalConstants& constants);

  [[nodiscard]] double velocity(double x, double t, double floor, bool* floored = nullptr) const;
  [[nodiscard]] double density(double x, double t) const;
  [[nodiscard]] const Grid& grid() const { return grid_; }
  [[nodiscard]] const std::vector<double>& times() const { return times_; }

 private:
  struct Bracket {
    std::size_t i;
    double wx;
    std::size_t n;
    double wt;
  };
  [[nodiscard]] Bracket locate(double x, double t) const;

  Grid grid_;
  std::vector<double> times_;
  std::vector<std::vector<double>> current_;
  std::vector<std::vector<double>> density_;
};

[[nodiscard]] std::vector<TrajectoryOutcome> simulate(const DetectorSpec& model, const std::vector<WaveState>& snapshots,
                                                      const std::vector<double>& positions, std::uint64_t seed,
                                                      const PhysicalConstants& constants = {},
                                                      const BohmOptions& options = {});

/// Kolmogorov-Smirnov distance between the empirical distribution of
/// detection times (undetected trajectories count as T = infinity) and the
/// model CDF given by `cdf(t)`, sampled as (times, values).
[[nodiscard]] double detection_time_ks(const std::vector<TrajectoryOutcome>& outcomes,
                                       const std::vector<double>& times, const std::vector<double>& cdf);

/// KS distance between samples and a piecewise-linear CDF on (xs, cdf).
[[nodiscard]] double ks_distance(std::vector<double> samples, const std::vector<double>& xs,
                                 const std::vector<double>& cdf);

/// Normalized cumulative of |psi|^2 on the grid nodes (trapezoid).
[[nodiscard]] std::vector<double> position_cdf(const WaveState& state);

struct HistogramBin {
  double lo;
  double hi;
  std::size_t count;
  double density;  // count / (n_total * width)
};

[[nodiscard]] std::vector<HistogramBin> detection_time_histogram(const std::vector<TrajectoryOutcome>& outcomes,
                                                                 double t_max, std::size_t bins);

}  // namespace detlab
