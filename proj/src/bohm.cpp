#include "detlab/bohm.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

#include "detlab/evolve.hpp"

namespace detlab {

namespace {

double interp_cdf(const std::vector<double>& xs, const std::vector<double>& cdf, double x) {
  return interpolate(xs, cdf, x);
}

}  // namespace

UniformStream::UniformStream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  gen_.seed(seq);
}

// 53 random bits; std::uniform_real_distribution is not reproducible across
// standard libraries.
double UniformStream::next() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

std::vector<double> position_cdf(const WaveState& state) {
  const auto& a = state.amplitudes;
  const double dx = state.grid.dx();
  std::vector<double> cdf(a.size(), 0.0);
  for (std::size_t i = 1; i < a.size(); ++i) cdf[i] = cdf[i - 1] + 0.5 * dx * (std::norm(a[i - 1]) + std::norm(a[i]));
  const double total = cdf.back();
  if (total > 0.0) {
    for (auto& c : cdf) c /= total;
  }
  return cdf;
}

std::vector<double> sample_initial_positions(const WaveState& state, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("sample count must be >= 1");
  const double total = norm_squared(state);
  if (std::abs(total - 1.0) > 1e-6) throw std::invalid_argument("sample_initial_positions requires a normalized state");
  const auto cdf = position_cdf(state);
  const auto xs = state.grid.nodes();
  UniformStream rng(seed, 0);
  std::vector<double> out(n);
  for (auto& x : out) {
    const double u = rng.next();
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) {
      x = xs.back();
      continue;
    }
    const auto j = static_cast<std::size_t>(std::max<std::ptrdiff_t>(1, it - cdf.begin()));
    const double span = cdf[j] - cdf[j - 1];
    const double w = span > 0.0 ? (u - cdf[j - 1]) / span : 0.5;
    x = xs[j - 1] + w * (xs[j] - xs[j - 1]);
  }
  return out;
}

GuidanceField::GuidanceField(const std::vector<WaveState>& snapshots, const PhysicalConstants& constants)
    : grid_(snapshots.empty() ? throw std::invalid_argument("no snapshots") : snapshots.front().grid) {
  if (snapshots.size() < 2) throw std::invalid_argument("guidance needs at least two snapshots");
  for (const auto& s : snapshots) {
    if (!(s.grid == grid_)) throw std::invalid_argument("snapshots on different grids");
    if (!times_.empty() && !(s.time > times_.back())) throw std::invalid_argument("snapshots out of order");
    times_.push_back(s.time);
    std::vector<double> j(s.amplitudes.size());
    std::vector<double> rho(s.amplitudes.size());
    for (std::size_t i = 0; i < s.amplitudes.size(); ++i) {
      j[i] = flux(s, i, constants);
      rho[i] = std::norm(s.amplitudes[i]);
    }
    current_.push_back(std::move(j));
    density_.push_back(std::move(rho));
  }
}

GuidanceField::Bracket GuidanceField::locate(double x, double t) const {
  const double s = std::clamp((x - grid_.x_min()) / grid_.dx(), 0.0, static_cast<double>(grid_.size() - 1));
  const std::size_t i = std::min(static_cast<std::size_t>(s), grid_.size() - 2);
  const double wx = s - static_cast<double>(i);
  std::size_t n = 0;
  double wt = 0.0;
  if (t >= times_.back()) {
    n = times_.size() - 2;
    wt = 1.0;
  } else if (t > times_.front()) {
    n = static_cast<std::size_t>(std::upper_bound(times_.begin(), times_.end(), t) - times_.begin()) - 1;
    wt = (t - times_[n]) / (times_[n + 1] - times_[n]);
  }
  return {i, wx, n, wt};
}

double GuidanceField::density(double x, double t) const {
  const auto b = locate(x, t);
  auto at = [&](std::size_t n) { return (1.0 - b.wx) * density_[n][b.i] + b.wx * density_[n][b.i + 1]; };
  return (1.0 - b.wt) * at(b.n) + b.wt * at(b.n + 1);
}

double GuidanceField::velocity(double x, double t, double floor, bool* floored) const {
  const auto b = locate(x, t);
  auto lin = [&](const std::vector<std::vector<double>>& f, std::size_t n) {
    return (1.0 - b.wx) * f[n][b.i] + b.wx * f[n][b.i + 1];
  };
  const double j = (1.0 - b.wt) * lin(current_, b.n) + b.wt * lin(current_, b.n + 1);
  const double rho = (1.0 - b.wt) * lin(density_, b.n) + b.wt * lin(density_, b.n + 1);
  if (rho < floor && floored) *floored = true;
  return j / std::max(rho, floor);
}

std::vector<TrajectoryOutcome> simulate(const DetectorSpec& model, const std::vector<WaveState>& snapshots,
                                        const std::vector<double>& positions, std::uint64_t seed,
                                        const PhysicalConstants& constants, const BohmOptions& options) {
  validate(model);
  if (options.substeps == 0) throw std::invalid_argument("substeps must be >= 1");
  const GuidanceField field(snapshots, constants);
  const Grid& grid = field.grid();
  const auto& times = field.times();

  const auto* soft = std::get_if<ImaginaryPotential>(&model);
  const bool first_arrival = std::holds_alternative<AbsorbingBoundary>(model);
  const double rate = soft ? 2.0 * soft->v / constants.hbar : 0.0;
  const double x_lo = grid.x_min();
  const double x_hi = grid.x_max();

  std::vector<TrajectoryOutcome> outcomes(positions.size());

  auto integrate_one = [&](std::size_t index) {
    TrajectoryOutcome out;
    double X = positions[index];
    UniformStream rng(seed, index);
    // Exponential clock: absorption happens once the integrated hazard
    // exceeds an Exp(1) variate. Per step this is exactly 1 - exp(-rate dt).
    const double clock = -std::log1p(-rng.next());
    double hazard = 0.0;
    bool floored = false;
    if (options.record_paths) out.path.push_back(X);

    for (std::size_t n = 0; n + 1 < times.size(); ++n) {
      const double h = (times[n + 1] - times[n]) / static_cast<double>(options.substeps);
      for (std::size_t s = 0; s < options.substeps; ++s) {
        const double t = times[n] + static_cast<double>(s) * h;
        const double v1 = field.velocity(X, t, options.density_floor, &floored);
        const double Xh = std::clamp(X + 0.5 * h * v1, x_lo, x_hi);
        const double v2 = field.velocity(Xh, t + 0.5 * h, options.density_floor, &floored);
        const double Xn = std::clamp(X + h * v2, x_lo, x_hi);

        if (soft && Xh >= 0.0) {
          const double inc = rate * h;
          if (hazard + inc >= clock) {
            out.detected = true;
            out.detection_time = t + h * (clock - hazard) / inc;
            out.detection_place = Xh;
            out.hit_density_floor = floored;
            outcomes[index] = std::move(out);
            return;
          }
          hazard += inc;
        }
        if (first_arrival && Xn >= 0.0) {
          out.detected = true;
          out.detection_time = Xn > X ? t + h * (0.0 - X) / (Xn - X) : t + h;
          out.detection_place = 0.0;
          out.hit_density_floor = floored;
          outcomes[index] = std::move(out);
          return;
        }
        if (X >= 0.0 && Xn < 0.0) out.reexited_detector = true;
        X = Xn;
        if (X <= x_lo) {
          out.left_domain = true;
          out.hit_density_floor = floored;
          outcomes[index] = std::move(out);
          return;
        }
      }
      if (options.record_paths) out.path.push_back(X);
    }
    out.hit_density_floor = floored;
    outcomes[index] = std::move(out);
  };

  std::size_t workers = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<std::size_t>(workers, std::max<std::size_t>(1, positions.size()));
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < positions.size(); i += workers) integrate_one(i);
    });
  }
  for (auto& th : pool) th.join();
  return outcomes;
}

double ks_distance(std::vector<double> samples, const std::vector<double>& xs, const std::vector<double>& cdf) {
  if (samples.empty()) return 0.0;
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t j = 0; j < samples.size(); ++j) {
    const double F = interp_cdf(xs, cdf, samples[j]);
    d = std::max({d, std::abs(static_cast<double>(j) / n - F), std::abs(static_cast<double>(j + 1) / n - F)});
  }
  return d;
}

double detection_time_ks(const std::vector<TrajectoryOutcome>& outcomes, const std::vector<double>& times,
                         const std::vector<double>& cdf) {
  std::vector<double> detected;
  for (const auto& o : outcomes) {
    if (o.detected) detected.push_back(o.detection_time);
  }
  std::sort(detected.begin(), detected.end());
  const double n = static_cast<double>(outcomes.size());
  if (outcomes.empty()) return 0.0;
  double d = 0.0;
  for (std::size_t j = 0; j < detected.size(); ++j) {
    const double F = interp_cdf(times, cdf, detected[j]);
    d = std::max({d, std::abs(static_cast<double>(j) / n - F), std::abs(static_cast<double>(j + 1) / n - F)});
  }
  // Mass that the model has detected by the end but the sample has not.
  d = std::max(d, std::abs(static_cast<double>(detected.size()) / n - cdf.back()));
  return d;
}

std::vector<HistogramBin> detection_time_histogram(const std::vector<TrajectoryOutcome>& outcomes, double t_max,
                                                   std::size_t bins) {
  if (bins == 0 || !(t_max > 0.0)) throw std::invalid_argument("histogram needs bins >= 1 and t_max > 0");
  std::vector<HistogramBin> out(bins);
  const double width = t_max / static_cast<double>(bins);
  for (std::size_t b = 0; b < bins; ++b) out[b] = {static_cast<double>(b) * width, static_cast<double>(b + 1) * width, 0, 0.0};
  for (const auto& o : outcomes) {
    if (!o.detected || o.detection_time < 0.0 || o.detection_time >= t_max) continue;
    ++out[static_cast<std::size_t>(o.detection_time / width)].count;
  }
  const double n = static_cast<double>(std::max<std::size_t>(1, outcomes.size()));
  for (auto& b : out) b.density = static_cast<double>(b.count) / (n * width);
  return out;
}

}  // namespace detlab
