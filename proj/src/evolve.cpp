#include "detlab/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace detlab {

WaveState step(const WaveState& state, const DiscreteHamiltonian& H, double dt, const PhysicalConstants& constants) {
  if (!(state.grid == H.grid)) throw std::invalid_argument("step: Hamiltonian built on a different grid");
  CrankNicolson cn(H, dt, constants);
  WaveState next = state;
  for (std::size_t i = 0; i < H.first; ++i) next.amplitudes[i] = 0.0;
  for (std::size_t i = H.last + 1; i < next.amplitudes.size(); ++i) next.amplitudes[i] = 0.0;
  cn.advance(next.amplitudes);
  next.time += dt;
  return next;
}

namespace {

cplx derivative_at(const std::vector<cplx>& psi, std::size_t i, double dx) {
  const std::size_t n = psi.size();
  if (i == 0) return (-3.0 * psi[0] + 4.0 * psi[1] - psi[2]) / (2.0 * dx);
  if (i + 1 == n) return (3.0 * psi[n - 1] - 4.0 * psi[n - 2] + psi[n - 3]) / (2.0 * dx);
  return (psi[i + 1] - psi[i - 1]) / (2.0 * dx);
}

}  // namespace

double flux(const WaveState& state, std::size_t node, const PhysicalConstants& constants) {
  if (node >= state.amplitudes.size()) throw std::out_of_range("flux: node index out of range");
  const cplx d = derivative_at(state.amplitudes, node, state.grid.dx());
  return constants.hbar / constants.mass * std::imag(std::conj(state.amplitudes[node]) * d);
}

std::vector<double> TimeSeries::midpoint_times() const {
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < times.size(); ++i) out.push_back(0.5 * (times[i] + times[i + 1]));
  return out;
}

std::vector<double> TimeSeries::midpoint_rho_T() const {
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < times.size(); ++i) {
    out.push_back((norm_sq[i] - norm_sq[i + 1]) / (times[i + 1] - times[i]));
  }
  return out;
}

double default_time_step(double k0, const DetectorSpec& model, const PhysicalConstants& constants) {
  double dt = 1e-2;
  if (k0 != 0.0) dt = std::min(dt, 1e-2 / (constants.energy_of(k0) / constants.hbar));
  if (const auto* soft = std::get_if<ImaginaryPotential>(&model); soft && soft->v > 0.0) {
    dt = std::min(dt, 1e-2 * constants.hbar / soft->v);
  }
  return dt;
}

double accuracy_guard_time_step(const DiscreteHamiltonian& H, const PhysicalConstants& constants) {
  return constants.hbar / H.max_abs_diagonal();
}

double integrate(const std::vector<double>& times, const std::vector<double>& values) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < times.size(); ++i) {
    s += 0.5 * (values[i] + values[i + 1]) * (times[i + 1] - times[i]);
  }
  return s;
}

double interpolate(const std::vector<double>& times, const std::vector<double>& values, double t) {
  if (times.empty()) return 0.0;
  if (t <= times.front()) return values.front();
  if (t >= times.back()) return values.back();
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const auto j = static_cast<std::size_t>(it - times.begin());
  const double w = (t - times[j - 1]) / (times[j] - times[j - 1]);
  return (1.0 - w) * values[j - 1] + w * values[j];
}

RunResult run(const WaveState& initial, const DetectorSpec& model, double dt, std::size_t n_steps,
              const PhysicalConstants& constants, const RunOptions& options) {
  if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
  if (options.require_clear_edges && edge_ratio(initial) > kEdgeContaminationThreshold) {
    throw std::invalid_argument("initial state touches the domain edge");
  }
  const DiscreteHamiltonian H = build_hamiltonian(initial.grid, model, constants, options.origin_weight);
  CrankNicolson cn(H, dt, constants);

  std::vector<std::string> warnings;
  if (dt * H.max_abs_diagonal() / constants.hbar > 1.0) {
    std::ostringstream os;
    os << "accuracy guard: dt*max|diag H|/hbar = " << dt * H.max_abs_diagonal() / constants.hbar << " > 1";
    warnings.push_back(os.str());
  }

  const Grid& grid = initial.grid;
  const auto* soft = std::get_if<ImaginaryPotential>(&model);
  const auto* abr = std::get_if<AbsorbingBoundary>(&model);
  const std::size_t origin = static_cast<std::size_t>(grid.node_at(0.0));
  const std::size_t edge = grid.size() - 1;

  WaveState state = initial;
  for (std::size_t i = 0; i < H.first; ++i) state.amplitudes[i] = 0.0;
  for (std::size_t i = H.last + 1; i < state.amplitudes.size(); ++i) state.amplitudes[i] = 0.0;

  TimeSeries ts;
  ts.times.reserve(n_steps + 1);
  ts.norm_sq.reserve(n_steps + 1);

  std::vector<std::size_t> density_steps;
  if (soft) {
    for (double t : options.density_times) {
      const double s = std::round((t - initial.time) / dt);
      if (s >= 0.0 && s <= static_cast<double>(n_steps)) density_steps.push_back(static_cast<std::size_t>(s));
    }
    std::sort(density_steps.begin(), density_steps.end());
    density_steps.erase(std::unique(density_steps.begin(), density_steps.end()), density_steps.end());
  }
  auto next_density = density_steps.begin();

  std::vector<WaveState> snapshots;
  const double rate = soft ? 2.0 * soft->v / constants.hbar : 0.0;

  auto record = [&](std::size_t n) {
    ts.times.push_back(state.time);
    ts.norm_sq.push_back(norm_squared(state));
    if (abr) {
      ts.rho_T_flux.push_back(flux(state, edge, constants));
      ts.rho_T_pointwise.push_back(constants.hbar * abr->kappa / constants.mass * std::norm(state.amplitudes[edge]));
    }
    if (next_density != density_steps.end() && *next_density == n) {
      PlaceDensitySnapshot snap{state.time, {}, {}};
      for (std::size_t i = origin; i <= edge; ++i) {
        snap.x.push_back(grid.x(i));
        snap.density.push_back(rate * std::norm(state.amplitudes[i]));
      }
      ts.place_density.push_back(std::move(snap));
      ++next_density;
    }
    if (options.snapshot_every > 0 && (n % options.snapshot_every == 0 || n == n_steps)) {
      snapshots.push_back(state);
    }
  };

  record(0);
  for (std::size_t n = 1; n <= n_steps; ++n) {
    cn.advance(state.amplitudes);
    state.time = initial.time + static_cast<double>(n) * dt;
    record(n);
    if (ts.norm_sq[n] > ts.norm_sq[n - 1] + options.norm_growth_tolerance) {
      std::ostringstream os;
      os << "norm increased by " << ts.norm_sq[n] - ts.norm_sq[n - 1] << " at t = " << state.time;
      throw SolverError(os.str());
    }
  }

  const std::size_t count = ts.times.size();
  ts.rho_T_norm.resize(count, 0.0);
  if (count >= 2) {
    ts.rho_T_norm[0] = (ts.norm_sq[0] - ts.norm_sq[1]) / dt;
    ts.rho_T_norm[count - 1] = (ts.norm_sq[count - 2] - ts.norm_sq[count - 1]) / dt;
    for (std::size_t i = 1; i + 1 < count; ++i) {
      ts.rho_T_norm[i] = (ts.norm_sq[i - 1] - ts.norm_sq[i + 1]) / (2.0 * dt);
    }
  }

  const auto mid = ts.midpoint_rho_T();
  double peak = 0.0;
  for (double r : mid) peak = std::max(peak, std::abs(r));
  const bool plateaued = mid.empty() || std::abs(mid.back()) <= options.plateau_fraction * peak;
  if (!plateaued) warnings.push_back("survival probability has not plateaued at the end of the run");

  const double terminal = ts.norm_sq.back();
  return RunResult{std::move(ts), std::move(state), std::move(snapshots), terminal, plateaued, std::move(warnings)};
}

}  // namespace detlab
