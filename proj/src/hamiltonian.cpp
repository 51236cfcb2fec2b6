#include <algorithm>
#include <cmath>

#include "detlab/evolve.hpp"

namespace detlab {

std::vector<cplx> DiscreteHamiltonian::apply(const std::vector<cplx>& psi) const {
  std::vector<cplx> out(psi.size(), 0.0);
  for (std::size_t i = first; i <= last; ++i) {
    cplx s = diagonal[i] * psi[i];
    if (i > first) s += lower[i] * psi[i - 1];
    if (i < last) s += upper[i] * psi[i + 1];
    out[i] = s;
  }
  return out;
}

double DiscreteHamiltonian::max_asymmetry() const {
  double worst = 0.0;
  for (std::size_t i = first; i <= last; ++i) {
    worst = std::max(worst, std::abs(diagonal[i] - std::conj(diagonal[i])));
    if (i < last) worst = std::max(worst, std::abs(upper[i] - lower[i + 1]));
  }
  return worst;
}

double DiscreteHamiltonian::max_abs_diagonal() const {
  double worst = 0.0;
  for (std::size_t i = first; i <= last; ++i) worst = std::max(worst, std::abs(diagonal[i]));
  return worst;
}

DiscreteHamiltonian build_hamiltonian(const Grid& grid, const DetectorSpec& model,
                                      const PhysicalConstants& constants, OriginWeight origin_weight) {
  constants.validate();
  validate(model);
  const double dx = grid.dx();
  const std::size_t n = grid.size();
  const std::size_t edge = n - 1;

  const double R = right_edge(model);
  if (std::isinf(R)) throw std::invalid_argument("cannot discretize a detector of infinite length");
  if (std::abs(grid.x_max() - R) > 1e-9 * dx) {
    throw std::invalid_argument("grid must end exactly at the model's right edge");
  }
  const std::ptrdiff_t origin = grid.node_at(0.0);
  if (origin < 0) throw std::invalid_argument("grid lacks a node at x = 0");

  const double kinetic = constants.hbar * constants.hbar / (2.0 * constants.mass * dx * dx);
  DiscreteHamiltonian H{grid, model, std::vector<cplx>(n, 2.0 * kinetic), std::vector<double>(n, -kinetic),
                        std::vector<double>(n, -kinetic), 1, edge};
  H.lower[0] = 0.0;
  H.upper[edge] = 0.0;

  // Ghost-node elimination for psi'(edge) = g psi(edge):
  // psi_{N+1} = psi_{N-1} + 2 dx g psi_N.
  auto ghost_edge = [&](cplx g) {
    H.lower[edge] = -2.0 * kinetic;
    H.diagonal[edge] = 2.0 * kinetic - 2.0 * kinetic * dx * g;
  };

  if (const auto* soft = std::get_if<ImaginaryPotential>(&model)) {
    for (auto i = static_cast<std::size_t>(origin); i < n; ++i) H.diagonal[i] -= I * soft->v;
    if (origin_weight == OriginWeight::CellAverage && static_cast<std::size_t>(origin) < edge) {
      H.diagonal[static_cast<std::size_t>(origin)] += 0.5 * I * soft->v;
    }
    if (std::holds_alternative<Neumann>(soft->wall)) {
      ghost_edge(0.0);
      H.diagonal[edge] -= I * soft->v;
    } else if (const auto* robin = std::get_if<Robin>(&soft->wall)) {
      ghost_edge(robin->alpha);
      H.diagonal[edge] -= I * soft->v;
    } else {
      H.last = edge - 1;
    }
  } else if (const auto* abr = std::get_if<AbsorbingBoundary>(&model)) {
    ghost_edge(abr->beta());
  } else {
    H.last = edge - 1;
  }
  if (H.last < H.first) throw std::invalid_argument("grid too small for the boundary conditions");
  return H;
}

CrankNicolson::CrankNicolson(DiscreteHamiltonian H, double dt, const PhysicalConstants& constants)
    : H_(std::move(H)), dt_(dt), half_(I * dt / (2.0 * constants.hbar)) {
  if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
  const std::size_t n = H_.diagonal.size();
  c_prime_.assign(n, 0.0);
  inv_den_.assign(n, 0.0);
  rhs_.assign(n, 0.0);
  cplx prev_c = 0.0;
  for (std::size_t i = H_.first; i <= H_.last; ++i) {
    const cplx a = i > H_.first ? half_ * H_.lower[i] : cplx{0.0};
    const cplx b = 1.0 + half_ * H_.diagonal[i];
    const cplx c = i < H_.last ? half_ * H_.upper[i] : cplx{0.0};
    const cplx den = b - a * prev_c;
    if (std::abs(den) < 1e-300) throw SolverError("singular Crank-Nicolson system");
    inv_den_[i] = 1.0 / den;
    c_prime_[i] = c * inv_den_[i];
    prev_c = c_prime_[i];
  }
}

void CrankNicolson::advance(std::vector<cplx>& psi) const {
  const std::size_t first = H_.first;
  const std::size_t last = H_.last;
  const auto& lo = H_.lower;
  const auto& up = H_.upper;
  const auto& dg = H_.diagonal;

  // rhs = (1 - half H) psi, then forward elimination in the same sweep.
  cplx prev_d = 0.0;
  for (std::size_t i = first; i <= last; ++i) {
    cplx Hpsi = dg[i] * psi[i];
    if (i > first) Hpsi += lo[i] * psi[i - 1];
    if (i < last) Hpsi += up[i] * psi[i + 1];
    const cplx r = psi[i] - half_ * Hpsi;
    const cplx a = i > first ? half_ * lo[i] : cplx{0.0};
    prev_d = (r - a * prev_d) * inv_den_[i];
    rhs_[i] = prev_d;
  }
  psi[last] = rhs_[last];
  for (std::size_t i = last; i-- > first;) psi[i] = rhs_[i] - c_prime_[i] * psi[i + 1];
}

}  // namespace detlab
