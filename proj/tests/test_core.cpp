#include "detlab/core.hpp"

#include <cmath>
#include <random>

#include "doctest.h"

using namespace detlab;

namespace {

WaveState constant_state(double x0, double x1, std::size_t n, cplx value) {
  Grid g(x0, x1, n);
  return WaveState(g, std::vector<cplx>(n, value));
}

}  // namespace

TEST_CASE("physical constants reject nonpositive values") {
  CHECK_NOTHROW(PhysicalConstants{}.validate());
  CHECK_THROWS(PhysicalConstants{0.0, 1.0}.validate());
  CHECK_THROWS(PhysicalConstants{1.0, -1.0}.validate());
  CHECK(PhysicalConstants{2.0, 3.0}.energy_of(1.0) == doctest::Approx(4.0 / 6.0));
}

TEST_CASE("detector validation") {
  CHECK_NOTHROW(validate(DetectorSpec{ImaginaryPotential{1.0, 0.5, Neumann{}}}));
  CHECK_NOTHROW(validate(DetectorSpec{ImaginaryPotential{0.0, 0.5, Dirichlet{}}}));
  CHECK_NOTHROW(validate(DetectorSpec{ImaginaryPotential{1.0, INFINITY, Neumann{}}}));
  CHECK_THROWS(validate(DetectorSpec{ImaginaryPotential{-1.0, 0.5, Neumann{}}}));
  CHECK_THROWS(validate(DetectorSpec{ImaginaryPotential{1.0, 0.0, Neumann{}}}));
  CHECK_THROWS(validate(DetectorSpec{AbsorbingBoundary{0.0, 0.0}}));
  CHECK(right_edge(ImaginaryPotential{1.0, 0.25, Neumann{}}) == 0.25);
  CHECK(right_edge(AbsorbingBoundary{}) == 0.0);
}

TEST_CASE("grid geometry") {
  Grid g(-1.0, 1.0, 21);
  CHECK(g.dx() == doctest::Approx(0.1));
  CHECK(g.x(0) == -1.0);
  CHECK(g.x(20) == 1.0);
  CHECK(g.node_at(0.0) == 10);
  CHECK(g.node_at(0.05) == -1);
  CHECK(g.nearest(0.07) == 11);
  CHECK_THROWS(Grid(0.0, 1.0, 2));
  CHECK_THROWS(Grid(1.0, 0.0, 10));

  SUBCASE("anchored grids carry nodes at 0 and at the right edge") {
    const Grid a = Grid::anchored(-30.0, 0.0125, 0.005);
    CHECK(a.dx() <= 0.005);
    CHECK(a.node_at(0.0) >= 0);
    CHECK(a.x(a.size() - 1) == doctest::Approx(0.0125).epsilon(1e-14));
    CHECK(a.x_min() <= -30.0);
    CHECK(a.x_min() > -30.0 - a.dx());
  }
}

TEST_CASE("gaussian packet") {
  Grid g(-20.0, 0.0, 2001);

  SUBCASE("unit norm") {
    const auto psi = make_gaussian_packet(g, {-10.0, 1.0, 2.0});
    CHECK(std::abs(norm_squared(psi) - 1.0) < 1e-12);
  }
  SUBCASE("k0 = 0 is real and symmetric about x0") {
    const auto psi = make_gaussian_packet(g, {-10.0, 1.0, 0.0});
    const std::size_t mid = g.node_at(-10.0);
    for (std::size_t j = 0; j < 500; ++j) {
      CHECK(psi.amplitudes[mid + j].imag() == 0.0);
      CHECK(std::abs(psi.amplitudes[mid + j] - psi.amplitudes[mid - j]) < 1e-14);
    }
  }
  SUBCASE("packet touching an edge is refused") {
    CHECK_THROWS_AS((void)make_gaussian_packet(g, {-0.5, 1.0, 2.0}), std::invalid_argument);
  }
  SUBCASE("sigma must be positive") {
    CHECK_THROWS((void)make_gaussian_packet(g, {-10.0, 0.0, 2.0}));
  }
  SUBCASE("edge ratio is tiny for a centered packet") {
    const auto psi = make_gaussian_packet(g, {-10.0, 1.0, 2.0});
    CHECK(edge_ratio(psi) < 1e-8);
  }
}

TEST_CASE("norm and inner product") {
  CHECK(norm_squared(constant_state(0.0, 1.0, 11, 0.0)) == 0.0);
  CHECK(std::abs(norm_squared(constant_state(0.0, 1.0, 11, 1.0)) - 1.0) < 1e-12);

  const auto a = constant_state(0.0, 1.0, 11, 1.0);
  const auto b = constant_state(0.0, 1.0, 11, I);
  CHECK(std::abs(inner_product(a, b) - I) < 1e-12);

  Grid g(-40.0, 0.0, 4001);
  const auto f = make_gaussian_packet(g, {-20.0, 1.0, 1.5});
  CHECK(std::abs(inner_product(f, f) - norm_squared(f)) < 1e-14);

  const auto left = make_gaussian_packet(g, {-30.0, 0.5, 0.0});
  const auto right = make_gaussian_packet(g, {-10.0, 0.5, 0.0});
  CHECK(std::abs(inner_product(left, right)) < 1e-8);

  CHECK_THROWS((void)inner_product(a, constant_state(0.0, 2.0, 11, 1.0)));
}

TEST_CASE("inner product is sesquilinear") {
  std::mt19937_64 gen(7);
  std::normal_distribution<double> n(0.0, 1.0);
  Grid g(0.0, 1.0, 33);
  auto random_state = [&] {
    std::vector<cplx> v(g.size());
    for (auto& z : v) z = {n(gen), n(gen)};
    return WaveState(g, v);
  };
  for (int trial = 0; trial < 20; ++trial) {
    const auto f = random_state(), u = random_state(), w = random_state();
    const cplx alpha{n(gen), n(gen)}, beta{n(gen), n(gen)};
    std::vector<cplx> lin(g.size());
    for (std::size_t i = 0; i < lin.size(); ++i) lin[i] = alpha * u.amplitudes[i] + beta * w.amplitudes[i];
    const WaveState combo(g, lin);
    const cplx lhs2 = inner_product(f, combo);
    const cplx rhs2 = alpha * inner_product(f, u) + beta * inner_product(f, w);
    CHECK(std::abs(lhs2 - rhs2) < 1e-12 * (1.0 + std::abs(rhs2)));
    const cplx lhs1 = inner_product(combo, f);
    const cplx rhs1 = std::conj(alpha) * inner_product(u, f) + std::conj(beta) * inner_product(w, f);
    CHECK(std::abs(lhs1 - rhs1) < 1e-12 * (1.0 + std::abs(rhs1)));
    CHECK(norm_squared(f) > 0.0);
  }
}

TEST_CASE("trapezoid rule is second order") {
  // integral of exp(-x^2) over [-1, 1] = sqrt(pi) erf(1)
  const double exact = std::sqrt(M_PI) * std::erf(1.0);
  auto error = [&](std::size_t n) {
    Grid g(-1.0, 1.0, n);
    std::vector<double> f(n);
    for (std::size_t i = 0; i < n; ++i) f[i] = std::exp(-g.x(i) * g.x(i));
    return std::abs(trapezoid(f, g.dx()) - exact);
  };
  const double e1 = error(41), e2 = error(81), e3 = error(161);
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.02));
  CHECK(e2 / e3 == doctest::Approx(4.0).epsilon(0.02));
}
