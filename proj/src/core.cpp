#include "detlab/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace detlab {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

}  // namespace

void PhysicalConstants::validate() const {
  if (!(hbar > 0.0) || !std::isfinite(hbar)) throw std::invalid_argument("hbar must be positive");
  if (!(mass > 0.0) || !std::isfinite(mass)) throw std::invalid_argument("mass must be positive");
}

void validate(const WallCondition& wall) {
  if (const auto* r = std::get_if<Robin>(&wall); r && !std::isfinite(r->alpha)) {
    throw std::invalid_argument("Robin alpha must be finite");
  }
}

void validate(const DetectorSpec& spec) {
  std::visit(overloaded{
                 [](const ImaginaryPotential& m) {
                   if (!(m.v >= 0.0) || !std::isfinite(m.v)) throw std::invalid_argument("v must be >= 0");
                   if (!(m.L > 0.0)) throw std::invalid_argument("L must be > 0");
                   validate(m.wall);
                 },
                 [](const AbsorbingBoundary& m) {
                   if (!(m.kappa > 0.0) || !std::isfinite(m.kappa)) {
                     throw std::invalid_argument("kappa must be > 0");
                   }
                   if (!std::isfinite(m.nu)) throw std::invalid_argument("nu must be finite");
                 },
                 [](const HardWall&) {},
             },
             spec);
}

std::string describe(const WallCondition& wall) {
  return std::visit(overloaded{
                        [](const Neumann&) { return std::string("neumann"); },
                        [](const Robin& r) {
                          std::ostringstream os;
                          os << "robin(alpha=" << r.alpha << ")";
                          return os.str();
                        },
                        [](const Dirichlet&) { return std::string("dirichlet"); },
                    },
                    wall);
}

std::string describe(const DetectorSpec& spec) {
  std::ostringstream os;
  std::visit(overloaded{
                 [&](const ImaginaryPotential& m) {
                   os << "soft(v=" << m.v << ", L=" << m.L << ", wall=" << describe(m.wall) << ")";
                 },
                 [&](const AbsorbingBoundary& m) { os << "abr(kappa=" << m.kappa << ", nu=" << m.nu << ")"; },
                 [&](const HardWall&) { os << "hardwall"; },
             },
             spec);
  return os.str();
}

double right_edge(const DetectorSpec& spec) {
  if (const auto* m = std::get_if<ImaginaryPotential>(&spec)) return m->L;
  return 0.0;
}

Grid::Grid(double x_min, double x_max, std::size_t n) : x_min_(x_min), x_max_(x_max), n_(n) {
  if (!(x_min < x_max) || !std::isfinite(x_min) || !std::isfinite(x_max)) {
    throw std::invalid_argument("grid requires finite x_min < x_max");
  }
  if (n < 3) throw std::invalid_argument("grid requires at least 3 nodes");
  dx_ = (x_max - x_min) / static_cast<double>(n - 1);
}

Grid Grid::anchored(double x_left, double x_right, double max_dx) {
  if (!(max_dx > 0.0)) throw std::invalid_argument("grid spacing must be positive");
  if (!(x_left < 0.0) || !(x_right >= 0.0) || !std::isfinite(x_right)) {
    throw std::invalid_argument("anchored grid requires x_left < 0 <= x_right");
  }
  double dx = max_dx;
  std::size_t right_cells = 0;
  if (x_right > 0.0) {
    right_cells = static_cast<std::size_t>(std::ceil(x_right / max_dx - 1e-9));
    dx = x_right / static_cast<double>(right_cells);
  }
  const auto left_cells = static_cast<std::size_t>(std::ceil(-x_left / dx - 1e-9));
  const double x_min = -static_cast<double>(left_cells) * dx;
  const double x_max = right_cells == 0 ? 0.0 : x_right;
  return Grid(x_min, x_max, left_cells + right_cells + 1);
}

double Grid::x(std::size_t i) const {
  if (i + 1 == n_) return x_max_;
  return x_min_ + static_cast<double>(i) * dx_;
}

std::ptrdiff_t Grid::node_at(double x) const {
  const double s = (x - x_min_) / dx_;
  const double r = std::round(s);
  if (r < 0.0 || r > static_cast<double>(n_ - 1) || std::abs(s - r) > 1e-9) return -1;
  return static_cast<std::ptrdiff_t>(r);
}

std::size_t Grid::nearest(double x) const {
  const double s = std::clamp((x - x_min_) / dx_, 0.0, static_cast<double>(n_ - 1));
  return static_cast<std::size_t>(std::llround(s));
}

std::vector<double> Grid::nodes() const {
  std::vector<double> xs(n_);
  for (std::size_t i = 0; i < n_; ++i) xs[i] = x(i);
  return xs;
}

WaveState::WaveState(Grid g, std::vector<cplx> amps, double t)
    : grid(std::move(g)), amplitudes(std::move(amps)), time(t) {
  if (amplitudes.size() != grid.size()) {
    throw std::invalid_argument("amplitude count does not match grid node count");
  }
}

double trapezoid(std::span<const double> values, double dx) {
  if (values.size() < 2) return 0.0;
  double s = 0.5 * (values.front() + values.back());
  for (std::size_t i = 1; i + 1 < values.size(); ++i) s += values[i];
  return s * dx;
}

cplx trapezoid(std::span<const cplx> values, double dx) {
  if (values.size() < 2) return 0.0;
  cplx s = 0.5 * (values.front() + values.back());
  for (std::size_t i = 1; i + 1 < values.size(); ++i) s += values[i];
  return s * dx;
}

double norm_squared(const WaveState& state) {
  const auto& a = state.amplitudes;
  double s = 0.5 * (std::norm(a.front()) + std::norm(a.back()));
  for (std::size_t i = 1; i + 1 < a.size(); ++i) s += std::norm(a[i]);
  return s * state.grid.dx();
}

cplx inner_product(const WaveState& a, const WaveState& b) {
  if (!(a.grid == b.grid)) throw std::invalid_argument("inner_product: grid mismatch");
  const auto& u = a.amplitudes;
  const auto& w = b.amplitudes;
  const std::size_t n = u.size();
  cplx s = 0.5 * (std::conj(u[0]) * w[0] + std::conj(u[n - 1]) * w[n - 1]);
  for (std::size_t i = 1; i + 1 < n; ++i) s += std::conj(u[i]) * w[i];
  return s * a.grid.dx();
}

double edge_ratio(const WaveState& state) {
  double peak = 0.0;
  for (const auto& z : state.amplitudes) peak = std::max(peak, std::abs(z));
  if (peak == 0.0) return 0.0;
  return std::max(std::abs(state.amplitudes.front()), std::abs(state.amplitudes.back())) / peak;
}

WaveState make_gaussian_packet(const Grid& grid, const GaussianPacketSpec& spec) {
  if (!(spec.sigma > 0.0) || !std::isfinite(spec.sigma)) {
    throw std::invalid_argument("packet width sigma must be positive");
  }
  std::vector<cplx> amps(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid.x(i);
    const double d = x - spec.x0;
    // Phase measured from x0 so that k0 = 0 gives exactly real samples.
    amps[i] = std::exp(-d * d / (4.0 * spec.sigma * spec.sigma)) * std::polar(1.0, spec.k0 * d);
  }
  WaveState state(grid, std::move(amps), 0.0);
  if (edge_ratio(state) > kEdgeContaminationThreshold) {
    throw std::invalid_argument("packet touches the domain edge (amplitude above 1e-8 of peak)");
  }
  const double scale = 1.0 / std::sqrt(norm_squared(state));
  for (auto& z : state.amplitudes) z *= scale;
  return state;
}

}  // namespace detlab
