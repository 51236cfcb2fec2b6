#include "detlab/evolve.hpp"

#include <cmath>
#include <functional>
#include <random>

#include "detlab/eigen.hpp"
#include "doctest.h"

using namespace detlab;

namespace {

double peak_of(const std::vector<double>& v) {
  double p = 0.0;
  for (double x : v) p = std::max(p, std::abs(x));
  return p;
}

double max_abs_diff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

WaveState sampled(const Grid& g, const std::function<cplx(double)>& f) {
  std::vector<cplx> v(g.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(g.x(i));
  return WaveState(g, v);
}

}  // namespace

TEST_CASE("hamiltonian structure") {
  SUBCASE("free box is Hermitian") {
    const Grid g = Grid::anchored(-5.0, 0.0, 0.01);
    const auto H = build_hamiltonian(g, HardWall{});
    CHECK(H.max_asymmetry() < 1e-14);
    CHECK(H.last == g.size() - 2);
    const auto Hd = build_hamiltonian(Grid::anchored(-5.0, 1.0, 0.01), ImaginaryPotential{0.0, 1.0, Dirichlet{}});
    CHECK(Hd.max_asymmetry() < 1e-14);
  }

  SUBCASE("Neumann edge annihilates constants") {
    const Grid g = Grid::anchored(-1.0, 1.0, 0.01);
    const auto H = build_hamiltonian(g, ImaginaryPotential{0.0, 1.0, Neumann{}});
    const auto out = H.apply(std::vector<cplx>(g.size(), 1.0));
    CHECK(std::abs(out.back()) < 1e-9);
    CHECK(std::abs(out[g.size() / 2]) < 1e-9);
  }

  SUBCASE("imaginary potential sits on the detector nodes") {
    const Grid g = Grid::anchored(-1.0, 0.5, 0.05);
    const std::size_t origin = g.node_at(0.0);
    const auto cell = build_hamiltonian(g, ImaginaryPotential{3.0, 0.5, Neumann{}});
    const auto full = build_hamiltonian(g, ImaginaryPotential{3.0, 0.5, Neumann{}}, {}, OriginWeight::Full);
    CHECK(cell.diagonal[origin - 1].imag() == 0.0);
    CHECK(cell.diagonal[origin].imag() == doctest::Approx(-1.5));
    CHECK(full.diagonal[origin].imag() == doctest::Approx(-3.0));
    CHECK(cell.diagonal[origin + 1].imag() == doctest::Approx(-3.0));
    CHECK(cell.diagonal.back().imag() == doctest::Approx(-3.0));
  }

  SUBCASE("grids not matching the model are refused") {
    CHECK_THROWS((void)build_hamiltonian(Grid(-1.0, 0.3, 101), ImaginaryPotential{1.0, 0.5, Neumann{}}));
    CHECK_THROWS((void)build_hamiltonian(Grid(-1.0, 0.5, 101), AbsorbingBoundary{}));
    CHECK_THROWS((void)build_hamiltonian(Grid(-1.003, 0.0, 101), ImaginaryPotential{1.0, 0.5, Neumann{}}));
  }
}

TEST_CASE("absorbing-boundary eigenfunction residual is second order in the interior") {
  for (const double kappa : {1.0, 2.0}) {
    const auto mode = hard_mode(1.0, kappa, 0.0);
    auto interior_residual = [&](double dx) {
      const Grid g = Grid::anchored(-6.0, 0.0, dx);
      const auto f = sampled(g, [&](double x) { return eval_mode(mode, x); });
      const auto H = build_hamiltonian(g, AbsorbingBoundary{kappa, 0.0});
      const auto Hf = H.apply(f.amplitudes);
      double r = 0.0;
      for (std::size_t i = 2; i + 1 < g.size(); ++i) r = std::max(r, std::abs(Hf[i] - mode.energy * f.amplitudes[i]));
      return r;
    };
    const double r1 = interior_residual(0.02), r2 = interior_residual(0.01), r3 = interior_residual(0.005);
    CHECK(r1 / r2 == doctest::Approx(4.0).epsilon(0.05));
    CHECK(r2 / r3 == doctest::Approx(4.0).epsilon(0.05));
  }
}

TEST_CASE("Crank-Nicolson step") {
  std::mt19937_64 gen(42);
  std::normal_distribution<double> n(0.0, 1.0);

  SUBCASE("unitary in a closed box") {
    const Grid g = Grid::anchored(-5.0, 0.0, 0.02);
    const auto H = build_hamiltonian(g, HardWall{});
    std::vector<cplx> v(g.size());
    for (std::size_t i = 1; i + 1 < v.size(); ++i) v[i] = {n(gen), n(gen)};
    WaveState psi(g, v);
    const double n0 = norm_squared(psi);
    for (int s = 0; s < 50; ++s) {
      const double before = norm_squared(psi);
      psi = step(psi, H, 0.01);
      CHECK(std::abs(norm_squared(psi) - before) < 1e-12 * n0);
    }
  }

  SUBCASE("unitary with a Neumann wall and no absorption") {
    const Grid g = Grid::anchored(-5.0, 1.0, 0.02);
    const auto H = build_hamiltonian(g, ImaginaryPotential{0.0, 1.0, Neumann{}});
    std::vector<cplx> v(g.size());
    for (std::size_t i = 1; i < v.size(); ++i) v[i] = {n(gen), n(gen)};
    WaveState psi(g, v);
    const double n0 = norm_squared(psi);
    for (int s = 0; s < 20; ++s) psi = step(psi, H, 0.01);
    CHECK(std::abs(norm_squared(psi) - n0) < 1e-11 * n0);
  }

  SUBCASE("absorption strictly lowers the norm") {
    const Grid g = Grid::anchored(-3.0, 0.5, 0.01);
    const auto H = build_hamiltonian(g, ImaginaryPotential{2.0, 0.5, Neumann{}});
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<cplx> v(g.size());
      for (std::size_t i = 1; i < v.size(); ++i) v[i] = {n(gen), n(gen)};
      const WaveState psi(g, v);
      CHECK(norm_squared(step(psi, H, 0.01)) < norm_squared(psi));
    }
  }

  SUBCASE("discrete continuity equation for the soft model") {
    // Over one step the loss equals (2v/hbar) times the trapezoid integral
    // of |psi|^2 over [0, L], evaluated on the midpoint state.
    const double v = 3.0, L = 0.4, dt = 0.002;
    const Grid g = Grid::anchored(-8.0, L, 0.01);
    const auto H = build_hamiltonian(g, ImaginaryPotential{v, L, Neumann{}});
    WaveState psi = sampled(g, [](double x) { return std::exp(-(x + 1.5) * (x + 1.5) + 3.0 * I * x); });
    psi.amplitudes.front() = 0.0;
    const std::size_t origin = g.node_at(0.0);
    for (int s = 0; s < 200; ++s) {
      const WaveState next = step(psi, H, dt);
      std::vector<double> mid(g.size() - origin);
      for (std::size_t i = origin; i < g.size(); ++i) {
        mid[i - origin] = std::norm(0.5 * (psi.amplitudes[i] + next.amplitudes[i]));
      }
      const double loss = (norm_squared(psi) - norm_squared(next)) / dt;
      const double absorbed = 2.0 * v * trapezoid(mid, g.dx());
      CHECK(std::abs(loss - absorbed) <= 1e-9 * (1.0 + absorbed));
      psi = next;
    }
  }
}

TEST_CASE("flux") {
  const Grid g(-2.0, 0.0, 401);
  const double k = 1.7;
  const auto plane = sampled(g, [&](double x) { return std::exp(I * k * x); });
  for (std::size_t i = 0; i < g.size(); i += 50) CHECK(flux(plane, i) == doctest::Approx(k).epsilon(1e-4));
  CHECK(flux(plane, g.size() - 1) == doctest::Approx(k).epsilon(1e-4));

  const auto real = sampled(g, [&](double x) { return std::cos(3.0 * x) + 0.2 * x; });
  const auto standing = sampled(g, [&](double x) { return std::exp(I * k * x) - std::exp(-I * k * x); });
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(flux(real, i) == 0.0);
    CHECK(std::abs(flux(standing, i)) < 1e-12);
  }

  const PhysicalConstants c{2.0, 0.5};
  CHECK(flux(plane, 100, c) == doctest::Approx(k * 4.0).epsilon(1e-4));

  SUBCASE("boundary flux of a sampled hard mode") {
    const double kappa = 1.0;
    const auto mode = hard_mode(1.0, kappa, 0.0);
    const Grid h = Grid::anchored(-4.0, 0.0, 0.005);
    const auto f = sampled(h, [&](double x) { return eval_mode(mode, x); });
    const double pointwise = kappa * std::norm(f.amplitudes.back());
    CHECK(std::abs(flux(f, h.size() - 1) - pointwise) < 1e-2 * pointwise);
  }
}

TEST_CASE("runs") {
  const GaussianPacketSpec packet{-10.0, 1.0, 2.0};

  SUBCASE("absorbing boundary: budget, positivity and consistent arrival densities") {
    const Grid g = Grid::anchored(-25.0, 0.0, 0.01);
    const auto psi0 = make_gaussian_packet(g, packet);
    const auto r = run(psi0, AbsorbingBoundary{2.0, 0.0}, 0.002, 6000);
    const auto& ts = r.series;
    REQUIRE(ts.has_abr_columns());
    CHECK(std::abs(integrate(ts.times, ts.rho_T_norm) + r.never_detected - 1.0) < 1e-3);
    const double peak = peak_of(ts.rho_T_norm);
    double d12 = 0, d13 = 0, d23 = 0, fmin = INFINITY;
    for (std::size_t i = 0; i < ts.times.size(); ++i) {
      d12 = std::max(d12, std::abs(ts.rho_T_norm[i] - ts.rho_T_flux[i]));
      d13 = std::max(d13, std::abs(ts.rho_T_norm[i] - ts.rho_T_pointwise[i]));
      d23 = std::max(d23, std::abs(ts.rho_T_flux[i] - ts.rho_T_pointwise[i]));
      fmin = std::min(fmin, ts.rho_T_flux[i]);
    }
    CHECK(d12 < 0.01 * peak);
    CHECK(d13 < 0.01 * peak);
    CHECK(d23 < 0.01 * peak);
    CHECK(fmin >= -1e-10);
    CHECK(r.never_detected < 0.05);
    CHECK(std::abs(norm_squared(r.final_state) - r.never_detected) < 1e-15);
    // the collapsed survivor state is a unit vector
    std::vector<cplx> collapsed = r.final_state.amplitudes;
    for (auto& z : collapsed) z /= std::sqrt(r.never_detected);
    CHECK(norm_squared(WaveState(g, collapsed)) == doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("soft detector: budget and place density") {
    const double v = 8.0, L = 0.125;
    const Grid g = Grid::anchored(-25.0, L, 0.01);
    const auto psi0 = make_gaussian_packet(g, packet);
    RunOptions opts;
    opts.density_times = {4.5, 5.0};
    const auto r = run(psi0, ImaginaryPotential{v, L, Neumann{}}, 0.00125, 9600, {}, opts);
    const auto& ts = r.series;
    CHECK(!ts.has_abr_columns());
    CHECK(std::abs(integrate(ts.times, ts.rho_T_norm) + r.never_detected - 1.0) < 1e-3);
    REQUIRE(ts.place_density.size() == 2);
    for (const auto& snap : ts.place_density) {
      CHECK(snap.x.front() == 0.0);
      CHECK(snap.x.back() == doctest::Approx(L));
      const double total = trapezoid(snap.density, g.dx());
      CHECK(total == doctest::Approx(interpolate(ts.times, ts.rho_T_norm, snap.time)).epsilon(0.02));
    }
  }

  SUBCASE("leftward packet is barely detected") {
    const Grid g = Grid::anchored(-60.0, 0.0, 0.02);
    const auto psi0 = make_gaussian_packet(g, {-10.0, 1.0, -2.0});
    const auto r = run(psi0, AbsorbingBoundary{2.0, 0.0}, 0.005, 1200);
    CHECK(integrate(r.series.times, r.series.rho_T_norm) < 0.05);
  }

  SUBCASE("moving the left edge does not change the arrival density") {
    auto density = [&](double x_min) {
      const Grid g = Grid::anchored(x_min, 0.0, 0.02);
      return run(make_gaussian_packet(g, packet), AbsorbingBoundary{2.0, 0.0}, 0.004, 3000).series;
    };
    const auto a = density(-25.0), b = density(-40.0);
    double d = 0.0;
    for (std::size_t i = 0; i < a.times.size(); ++i) d = std::max(d, std::abs(a.rho_T_norm[i] - b.rho_T_norm[i]));
    CHECK(d < 0.01 * peak_of(a.rho_T_norm));
  }

  SUBCASE("guards") {
    const Grid g = Grid::anchored(-12.0, 0.0, 0.02);
    const auto edge = WaveState(g, std::vector<cplx>(g.size(), 1.0));
    CHECK_THROWS_AS((void)run(edge, AbsorbingBoundary{}, 0.01, 10), std::invalid_argument);
    CHECK_THROWS((void)run(make_gaussian_packet(g, {-6.0, 0.5, 1.0}), AbsorbingBoundary{}, 0.0, 10));
    // still arriving when the budget runs out
    const auto r = run(make_gaussian_packet(g, {-3.0, 0.3, 10.0}), AbsorbingBoundary{}, 0.01, 10);
    CHECK(!r.plateaued);
    CHECK(!r.warnings.empty());
  }
}

TEST_CASE("time step rules") {
  const PhysicalConstants u;
  CHECK(default_time_step(2.0, AbsorbingBoundary{}, u) == doctest::Approx(0.005));
  CHECK(default_time_step(2.0, ImaginaryPotential{10.0, 0.1, Neumann{}}, u) == doctest::Approx(0.001));
  const Grid g = Grid::anchored(-5.0, 0.0, 0.01);
  const auto H = build_hamiltonian(g, AbsorbingBoundary{2.0, 0.0});
  const double dt = accuracy_guard_time_step(H, u);
  CHECK(dt * H.max_abs_diagonal() == doctest::Approx(1.0));
}

TEST_CASE("Crank-Nicolson is second order") {
  const GaussianPacketSpec packet{-5.0, 0.5, 2.0};
  const DetectorSpec model = AbsorbingBoundary{2.0, 0.0};
  const double T = 2.5;

  SUBCASE("in time") {
    const Grid g = Grid::anchored(-15.0, 0.0, 0.01);
    const auto psi0 = make_gaussian_packet(g, packet);
    auto final_state = [&](double dt) {
      return run(psi0, model, dt, static_cast<std::size_t>(std::llround(T / dt))).final_state.amplitudes;
    };
    const auto ref = final_state(0.0025 / 16);
    const double e1 = max_abs_diff(final_state(0.01), ref);
    const double e2 = max_abs_diff(final_state(0.005), ref);
    const double e3 = max_abs_diff(final_state(0.0025), ref);
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.1));
    CHECK(e2 / e3 == doctest::Approx(4.0).epsilon(0.1));
  }

  SUBCASE("in space") {
    auto final_state = [&](double dx) {
      const Grid g = Grid::anchored(-15.0, 0.0, dx);
      return run(make_gaussian_packet(g, packet), model, 0.001, 2500).final_state;
    };
    const auto a = final_state(0.04), b = final_state(0.02), c = final_state(0.01);
    auto coarse_diff = [](const WaveState& coarse, const WaveState& fine) {
      const std::size_t ratio = (fine.grid.size() - 1) / (coarse.grid.size() - 1);
      double d = 0.0;
      for (std::size_t i = 0; i < coarse.grid.size(); ++i) {
        d = std::max(d, std::abs(coarse.amplitudes[i] - fine.amplitudes[i * ratio]));
      }
      return d;
    };
    const double r = coarse_diff(a, b) / coarse_diff(b, c);
    CHECK(r == doctest::Approx(4.0).epsilon(0.1));
  }
}
