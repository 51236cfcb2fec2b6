#include "detlab/limits.hpp"

#include <cmath>
#include <functional>

#include "doctest.h"

using namespace detlab;

namespace {

HardLimitSequence decades(double kappa, std::size_t count = 6) { return make_hard_sequence(kappa, 10.0, 10.0, count); }

// Reflection coefficient of the soft detector with a Neumann wall, from the
// transfer relation c = (k - q)/(k + q), q = -i lambda tan(lambda L).
cplx neumann_oracle(double k, double v, double L) {
  const cplx lam = std::sqrt(cplx(k * k, 2.0 * v));
  const cplx q = -I * lam * std::tan(lam * L);
  return (k - q) / (k + q);
}

}  // namespace

TEST_CASE("hard-limit sequences") {
  const auto s = make_hard_sequence(1.0, 10.0, 10.0, 3);
  REQUIRE(s.entries.size() == 3);
  CHECK(s.entries[0].v == 10.0);
  CHECK(s.entries[0].L == doctest::Approx(0.05));
  CHECK(s.entries[1].v == 100.0);
  CHECK(s.entries[1].L == doctest::Approx(0.005));
  CHECK(s.entries[2].L == doctest::Approx(0.0005));
  for (const auto& e : make_hard_sequence(1.0, 3.7, 2.9, 12).entries) CHECK(e.v * e.L == doctest::Approx(0.5).epsilon(1e-15));
  const auto t = make_hard_sequence(2.0, 1.0, 3.0, 5, {0.5, 2.0});
  for (std::size_t i = 1; i < t.entries.size(); ++i) CHECK(t.entries[i].v / t.entries[i - 1].v == doctest::Approx(3.0));
  for (const auto& e : t.entries) CHECK(e.v * e.L == doctest::Approx(0.25 * 2.0 / 4.0));
  CHECK_THROWS((void)make_hard_sequence(1.0, 10.0, 1.0, 3));
  CHECK_THROWS((void)make_hard_sequence(1.0, 10.0, 10.0, 1));
  CHECK_THROWS((void)make_hard_sequence(0.0, 10.0, 10.0, 3));
}

TEST_CASE("verdict bookkeeping") {
  ConvergenceReport r;
  r.parameters = {1, 10, 100, 1000};
  r.errors = {1, 0.1, 0.01, 0.001};
  finalize(r, 0.01);
  CHECK(r.verdict == Verdict::Converging);
  CHECK(r.limit_reached);
  CHECK(*r.slope == doctest::Approx(-1.0));
  CHECK(*r.slope_residual < 1e-12);

  r.errors = {1, 0.5, 0.5 * (1 - 1e-6), 0.5 * (1 - 2e-6)};
  finalize(r, 0.01);
  CHECK(r.verdict == Verdict::NonConverging);
  CHECK(!r.limit_reached);

  r.parameters = {1, 2};
  r.errors = {1, 0.5};
  finalize(r, 0.01);
  CHECK(!r.slope);
  CHECK(r.verdict == Verdict::NonConverging);
  CHECK(to_string(Verdict::Converging) == "converging");
  CHECK(to_string(Verdict::NonConverging) == "non-converging");
}

TEST_CASE("reflection coefficient along the hard limit") {
  const auto seq = decades(1.0);

  SUBCASE("converges to the absorbing-boundary value at first order in 1/v") {
    for (const double k : {0.5, 1.0, 2.0}) {
      const auto r = sweep_ck(k, seq, Neumann{});
      CHECK(r.verdict == Verdict::Converging);
      CHECK(r.limit_reached);
      CHECK(r.errors.back() < 1e-2);
      const cplx target = (k - 1.0) / (k + 1.0);
      for (std::size_t i = 0; i < seq.entries.size(); ++i) {
        const auto& e = seq.entries[i];
        CHECK(std::abs(std::abs(neumann_oracle(k, e.v, e.L) - target) - r.errors[i]) < 1e-12);
        CHECK(std::abs(cplx(r.column("re_c")[i], r.column("im_c")[i]) - neumann_oracle(k, e.v, e.L)) < 1e-12);
      }
      REQUIRE(r.slope);
      CHECK(*r.slope == doctest::Approx(-1.0).epsilon(0.02));
      // v * error settles to a constant
      const double a = r.errors[4] * r.parameters[4], b = r.errors[5] * r.parameters[5];
      CHECK(a == doctest::Approx(b).epsilon(1e-3));
    }
  }

  SUBCASE("rate does not depend on the sampling") {
    const double base = *sweep_ck(1.0, decades(1.0), Neumann{}).slope;
    const double other = *sweep_ck(1.0, make_hard_sequence(1.0, 37.0, 4.0, 8), Neumann{}).slope;
    CHECK(other == doctest::Approx(base).epsilon(0.2));
  }

  SUBCASE("perfect absorption survives the limit") {
    const auto r = sweep_ck(1.0, seq, Neumann{});
    CHECK(r.scalars.at("target_re_c") == 0.0);
    CHECK(r.scalars.at("target_im_c") == 0.0);
    CHECK(std::hypot(r.column("re_c").back(), r.column("im_c").back()) < 1e-5);
  }

  SUBCASE("the intermediate impedance approaches kappa") {
    const auto r = sweep_ck(1.3, make_hard_sequence(2.0, 10.0, 10.0, 6), Neumann{});
    const auto& d = r.column("limit1_distance");
    for (std::size_t i = 1; i < d.size(); ++i) CHECK(d[i] < d[i - 1]);
    CHECK(d.back() < 1e-4);
  }

  SUBCASE("target matches the absorbing-boundary mode at the effective kappa") {
    const auto deep = make_hard_sequence(1.5, 1e6, 10.0, 2);
    const auto r = sweep_ck(0.8, deep, Neumann{});
    for (const auto& e : deep.entries) {
      const double kappa_eff = 2.0 * e.v * e.L;
      const cplx c = hard_mode(0.8, kappa_eff, 0.0).c;
      CHECK(std::abs(c - cplx(r.scalars.at("target_re_c"), r.scalars.at("target_im_c"))) < 1e-12);
    }
    CHECK(r.errors.back() < 1e-6);
  }

  SUBCASE("a Robin wall tends to the boundary rule with nu = alpha") {
    for (const double alpha : {-2.0, 0.5, 5.0}) {
      const auto r = sweep_ck(1.0, seq, Robin{alpha});
      const auto& shifted = r.column("shifted_abr_error");
      for (std::size_t i = 1; i < shifted.size(); ++i) CHECK(shifted[i] < shifted[i - 1]);
      CHECK(shifted.back() < 1e-4);
      CHECK(r.errors.back() == doctest::Approx(std::abs(hard_mode(1.0, 1.0, alpha).c)).epsilon(1e-4));
      CHECK(r.column("neumann_error") == sweep_ck(1.0, seq, Neumann{}).errors);
      CHECK(r.scalars.at("robin_neumann_tail_relative_gap") > 0.1);
    }
  }

  SUBCASE("a Dirichlet wall is refused") { CHECK_THROWS((void)sweep_ck(1.0, seq, Dirichlet{})); }
}

TEST_CASE("Dirichlet wall does not reach the absorbing boundary") {
  for (const double kappa : {0.5, 1.0, 3.0}) {
    for (const double k : {0.5, 1.0, 2.0}) {
      const auto r = sweep_ck_dirichlet(k, decades(kappa));
      CHECK(r.verdict == Verdict::NonConverging);
      CHECK(!r.limit_reached);
      CHECK(r.scalars.at("tail_infimum") > 0.05);
      // c tends to -1, so the error tends to |-1 - (k-kappa)/(k+kappa)|
      CHECK(r.errors.back() == doctest::Approx(2.0 * k / (k + kappa)).epsilon(1e-4));
    }
  }
  HardLimitSequence one{1.0, 10.0, {{10.0, 0.05}}};
  CHECK_THROWS((void)sweep_ck_dirichlet(1.0, one));
}

TEST_CASE("region II empties along the hard limit") {
  const auto seq = decades(1.0);
  const auto r = sweep_fII(1.0, seq);
  for (std::size_t i = 1; i < r.errors.size(); ++i) CHECK(r.errors[i] < r.errors[i - 1]);
  CHECK(r.errors.back() < 1e-3);
  CHECK(r.limit_reached);
  CHECK(r.column("a_error").back() < 1e-2);
  CHECK(r.column("b_error").back() < 1e-2);
  CHECK(r.scalars.at("ab_limit") == 0.5);
  const auto& bound = r.column("b_component_bound");
  for (std::size_t i = 0; i < bound.size(); ++i) {
    const auto m = soft_mode(1.0, seq.entries[i].v, seq.entries[i].L, Neumann{}, {});
    const double L = seq.entries[i].L;
    // |b|^2 int_0^L |exp(-i lambda x)|^2 dx in closed form
    const double s = 2.0 * m.lambda->imag();
    CHECK(std::norm(m.b) * std::expm1(s * L) / s <= bound[i] * (1 + 1e-12));
  }
  CHECK(bound.back() < bound.front());

  SUBCASE("first entry against quadrature") {
    const auto& e = seq.entries.front();
    const auto m = soft_mode(1.0, e.v, e.L, Neumann{}, {});
    const int n = 20000;
    const double h = e.L / n;
    double s = std::norm(eval_mode(m, 0.0)) + std::norm(eval_mode(m, e.L));
    for (int i = 1; i < n; ++i) s += std::norm(eval_mode(m, i * h)) * (i % 2 ? 4.0 : 2.0);
    CHECK(std::abs(s * h / 3.0 - r.errors.front()) < 1e-8 * r.errors.front());
  }
}

TEST_CASE("Allcock's limit") {
  std::vector<double> vs;
  for (int i = 0; i <= 6; ++i) vs.push_back(std::pow(10.0, i));
  const auto r = sweep_allcock(1.0, vs);
  const auto& A = r.column("A");
  for (std::size_t i = 1; i < vs.size(); ++i) {
    CHECK(r.errors[i] < r.errors[i - 1]);
    CHECK(A[i] < A[i - 1]);
  }
  CHECK(A.back() < 1e-2);
  CHECK(r.column("abs_a").back() < 1e-2);
  CHECK(r.column("fI_dirichlet_distance").back() < 1e-2);
  CHECK(r.verdict == Verdict::Converging);

  // v = 1: c = (1 - lambda)/(1 + lambda), lambda^2 = 1 + 2i
  const cplx c1(r.column("re_c")[0], r.column("im_c")[0]);
  CHECK(c1.real() == doctest::Approx(-0.21385).epsilon(1e-4));
  CHECK(c1.imag() == doctest::Approx(-0.27202).epsilon(1e-4));
  CHECK(std::abs(c1) < 1.0);

  CHECK(allcock_sample_points(1.0).size() == 17);
  CHECK(allcock_sample_points(1.0).back() == doctest::Approx(-2.0 * M_PI));
  CHECK_THROWS((void)sweep_allcock(1.0, {10.0, 1.0}));
  CHECK_THROWS((void)sweep_allcock(1.0, {10.0}));
}

TEST_CASE("arrival-density sweep") {
  SUBCASE("self distance") {
    const Grid g = Grid::anchored(-20.0, 0.0, 0.05);
    const auto ts = run(make_gaussian_packet(g, {-10.0, 1.0, 2.0}), AbsorbingBoundary{2.0, 0.0}, 0.01, 800).series;
    const auto d = rho_T_distance(ts, ts);
    CHECK(d.sup == 0.0);
    CHECK(d.l1 == 0.0);
  }

  SUBCASE("coarse sweep") {
    const auto seq = make_hard_sequence(2.0, 4.0, 2.0, 2);
    RhoTNumerics numerics;
    numerics.x_min = -20.0;
    numerics.t_end = 8.0;
    const auto s = sweep_rhoT({-10.0, 1.0, 2.0}, seq, AbsorbingBoundary{2.0, 0.0}, numerics);
    CHECK(s.grid.dx() <= seq.entries.back().L / 4.0 * (1 + 1e-12));
    CHECK(s.soft.size() == 2);
    CHECK(s.report.column("sup_relative").size() == 2);
    CHECK(s.report.errors[1] < s.report.errors[0]);
    CHECK(s.report.column("l1")[1] < s.report.column("l1")[0]);
  }

  SUBCASE("under-resolved grids are refused") {
    RhoTNumerics numerics;
    numerics.dx = 0.05;
    CHECK_THROWS_AS((void)sweep_rhoT({-8.0, 1.0, 2.0}, make_hard_sequence(2.0, 10.0, 4.0, 3),
                                     AbsorbingBoundary{2.0, 0.0}, numerics),
                    std::invalid_argument);
  }
}

TEST_CASE("finite-interval spectra along the hard limit") {
  SearchWindow window;
  window.re_max = 3.0;
  window.im_min = -1.0;
  window.im_max = -1e-6;
  window.seeds_re = 15;
  window.seeds_im = 5;
  const auto r = sweep_finite_interval(M_PI, make_hard_sequence(1.0, 10.0, 10.0, 3), window);
  CHECK(r.errors.size() == 3);
  CHECK(r.scalars.at("abr_root_count") >= 1.0);
  CHECK(r.errors.back() < r.errors.front());
}
