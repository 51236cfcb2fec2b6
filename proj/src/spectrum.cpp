// Complex roots of the finite-interval quantization condition
//   c_k + exp(-2 i k ell) = 0
// for a Dirichlet wall at -ell and either boundary model at the right.
//
// Newton iterations run on a pole-free form of the condition: for the hard
// model (k - kappa + i nu) + (k + kappa - i nu) exp(-2ik ell), which is entire
// with an analytic derivative; for the soft model N + D exp(-2ik ell), where
// c_k = N/D. The soft form has no analytic derivative in closed form here, so
// it uses a centered difference and falls back to the secant method.

#include <algorithm>
#include <cmath>
#include <future>
#include <optional>

#include "detlab/eigen.hpp"

namespace detlab {

namespace {

struct Cleared {
  cplx value;
  std::optional<cplx> derivative;
};

Cleared cleared_condition(cplx k, double ell, const DetectorSpec& model,
                          const PhysicalConstants& constants) {
  const cplx e = std::exp(-2.0 * I * k * ell);
  if (const auto* h = std::get_if<AbsorbingBoundary>(&model)) {
    const cplx beta = h->beta();
    const cplx num = k + I * beta;  // k - kappa + i nu
    const cplx den = k - I * beta;  // k + kappa - i nu
    return {num + den * e, 1.0 + e - 2.0 * I * ell * den * e};
  }
  if (const auto* s = std::get_if<ImaginaryPotential>(&model)) {
    const cplx lambda = lambda_of(k, s->v, constants);
    const cplx F = s->v == 0.0 ? wall_factor(k, s->L, s->wall) : wall_factor(lambda, s->L, s->wall);
    const cplx lam = s->v == 0.0 ? k : lambda;
    const cplx num = (k - lam) + (k + lam) * F;
    const cplx den = (k + lam) + (k - lam) * F;
    return {num + den * e, std::nullopt};
  }
  return {e - 1.0, -2.0 * I * ell * e};
}

cplx derivative_of(cplx k, double ell, const DetectorSpec& model, const PhysicalConstants& constants,
                   const Cleared& at_k) {
  if (at_k.derivative) return *at_k.derivative;
  const double h = 1e-6 * (1.0 + std::abs(k));
  const cplx fp = cleared_condition(k + h, ell, model, constants).value;
  const cplx fm = cleared_condition(k - h, ell, model, constants).value;
  return (fp - fm) / (2.0 * h);
}

std::optional<cplx> newton(cplx k, double ell, const DetectorSpec& model, const PhysicalConstants& constants,
                           const SearchWindow& w) {
  Cleared f = cleared_condition(k, ell, model, constants);
  for (int it = 0; it < w.max_iterations; ++it) {
    const cplx d = derivative_of(k, ell, model, constants, f);
    if (d == 0.0 || !std::isfinite(std::abs(d))) return std::nullopt;
    cplx step = f.value / d;
    double damping = 1.0;
    cplx next = k - step;
    Cleared fn = cleared_condition(next, ell, model, constants);
    for (int h = 0; h < 12 && !(std::abs(fn.value) < std::abs(f.value)); ++h) {
      damping *= 0.5;
      next = k - damping * step;
      fn = cleared_condition(next, ell, model, constants);
    }
    const double moved = std::abs(next - k);
    k = next;
    f = fn;
    if (!std::isfinite(std::abs(k)) || std::abs(k) > 1e6) return std::nullopt;
    if (moved <= w.tolerance * (1.0 + std::abs(k))) return k;
  }
  return std::nullopt;
}

std::optional<cplx> secant(cplx k, double ell, const DetectorSpec& model, const PhysicalConstants& constants,
                           const SearchWindow& w) {
  cplx k0 = k;
  cplx k1 = k + 1e-3 * (1.0 + std::abs(k));
  cplx f0 = cleared_condition(k0, ell, model, constants).value;
  cplx f1 = cleared_condition(k1, ell, model, constants).value;
  for (int it = 0; it < w.max_iterations; ++it) {
    const cplx df = f1 - f0;
    if (df == 0.0) return std::nullopt;
    const cplx k2 = k1 - f1 * (k1 - k0) / df;
    if (!std::isfinite(std::abs(k2))) return std::nullopt;
    k0 = k1;
    f0 = f1;
    k1 = k2;
    f1 = cleared_condition(k1, ell, model, constants).value;
    if (std::abs(k1 - k0) <= w.tolerance * (1.0 + std::abs(k1))) return k1;
  }
  return std::nullopt;
}

bool inside(cplx k, const SearchWindow& w) {
  return k.real() >= w.re_min && k.real() <= w.re_max && k.imag() >= w.im_min && k.imag() <= w.im_max;
}

}  // namespace

SpectrumResult finite_interval_spectrum(double ell, const DetectorSpec& model, const SearchWindow& window,
                                        const PhysicalConstants& constants) {
  if (!(ell > 0.0)) throw std::invalid_argument("interval length ell must be positive");
  validate(model);
  if (std::holds_alternative<ImaginaryPotential>(model) &&
      std::isinf(std::get<ImaginaryPotential>(model).L)) {
    throw std::invalid_argument("finite-interval spectrum needs a finite detector length L");
  }
  if (!(window.re_min < window.re_max) || !(window.im_min < window.im_max) || window.seeds_re == 0 ||
      window.seeds_im == 0) {
    throw std::invalid_argument("empty search window");
  }

  const double residual_limit = 1e-10;
  const double dedup = 10.0 * window.tolerance;

  struct RowResult {
    std::vector<cplx> roots;
    std::size_t failed = 0;
  };
  auto solve_row = [&](std::size_t i) {
    RowResult out;
    const double re = window.re_min + (window.re_max - window.re_min) * (static_cast<double>(i) + 0.5) /
                                          static_cast<double>(window.seeds_re);
    for (std::size_t j = 0; j < window.seeds_im; ++j) {
      const double im = window.im_min + (window.im_max - window.im_min) * (static_cast<double>(j) + 0.5) /
                                            static_cast<double>(window.seeds_im);
      std::optional<cplx> root;
      try {
        root = newton({re, im}, ell, model, constants, window);
        if (!root) root = secant({re, im}, ell, model, constants, window);
      } catch (const ResonanceError&) {
        root.reset();
      }
      if (root) {
        out.roots.push_back(*root);
      } else {
        ++out.failed;
      }
    }
    return out;
  };

  std::vector<std::future<RowResult>> rows;
  rows.reserve(window.seeds_re);
  for (std::size_t i = 0; i < window.seeds_re; ++i) rows.push_back(std::async(std::launch::async, solve_row, i));

  SpectrumResult result;
  result.seeds_tried = window.seeds_re * window.seeds_im;
  std::vector<cplx> candidates;
  for (auto& row : rows) {
    auto r = row.get();
    result.seeds_failed += r.failed;
    candidates.insert(candidates.end(), r.roots.begin(), r.roots.end());
  }
  std::sort(candidates.begin(), candidates.end(), [](cplx a, cplx b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });

  for (const cplx k : candidates) {
    if (!inside(k, window)) continue;
    const bool duplicate = std::any_of(result.points.begin(), result.points.end(), [&](const SpectrumPoint& p) {
      return std::abs(p.k - k) <= std::max(dedup, 1e-9 * (1.0 + std::abs(k)));
    });
    if (duplicate) continue;
    double residual;
    try {
      residual = std::abs(quantization_condition(k, ell, model, constants));
    } catch (const ResonanceError&) {
      continue;
    }
    const cplx energy = constants.energy_of(k);
    const double mu = -energy.imag();
    // k = 0 solves the cleared equation trivially (the mode vanishes); it and
    // any spurious real roots are excluded by requiring decay.
    if (!(residual < residual_limit) || !(mu > 1e-12 * (1.0 + std::abs(energy)))) continue;
    result.points.push_back({k, energy, mu, residual});
  }
  std::sort(result.points.begin(), result.points.end(),
            [](const SpectrumPoint& a, const SpectrumPoint& b) { return a.k.real() < b.k.real(); });
  return result;
}

}  // namespace detlab
