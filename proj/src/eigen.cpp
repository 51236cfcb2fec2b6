#include "detlab/eigen.hpp"

#include <cmath>
#include <limits>

namespace detlab {

namespace {

struct SoftCoefficients {
  cplx lambda;
  cplx c;
  cplx a;
  cplx b;
};

SoftCoefficients soft_coefficients(cplx k, double v, double L, const WallCondition& wall,
                                   const PhysicalConstants& constants) {
  const cplx lambda = lambda_of(k, v, constants);
  const cplx F = wall_factor(lambda, L, wall);
  const cplx den = (k + lambda) + (k - lambda) * F;
  const double scale = std::abs(k) + std::abs(lambda) * (1.0 + std::abs(F));
  if (std::abs(den) <= 1e-14 * scale) {
    throw ResonanceError("soft mode denominator (k+lambda)+(k-lambda)F vanishes");
  }
  const cplx c = ((k - lambda) + (k + lambda) * F) / den;
  const cplx a = 2.0 * k / den;
  return {lambda, c, a, F * a};
}

void require_positive_k(double k) {
  if (!(k > 0.0) || !std::isfinite(k)) throw std::invalid_argument("k must be positive");
}

}  // namespace

cplx lambda_of(double k, double v, const PhysicalConstants& constants) {
  if (!(v > 0.0)) throw std::invalid_argument("lambda_of requires v > 0 (use k itself when v = 0)");
  const cplx z{k * k, constants.k_squared_per_energy() * v};
  const double r = std::sqrt(std::abs(z));
  const double half = 0.5 * std::atan2(z.imag(), z.real());
  const cplx lambda = std::polar(r, half);
  if (!(lambda.real() > 0.0 && lambda.imag() > 0.0)) {
    throw SolverError("lambda left the first quadrant");
  }
  return lambda;
}

cplx lambda_of(cplx k, double v, const PhysicalConstants& constants) {
  const cplx z = k * k + cplx{0.0, constants.k_squared_per_energy() * v};
  const double r = std::sqrt(std::abs(z));
  const double half = 0.5 * std::atan2(z.imag(), z.real());
  return std::polar(r, half);
}

cplx wall_factor(cplx lambda, double L, const WallCondition& wall) {
  if (!(L > 0.0)) throw std::invalid_argument("wall_factor requires L > 0");
  if (std::isinf(L)) return 0.0;
  const cplx base = std::exp(2.0 * I * lambda * L);
  if (std::holds_alternative<Neumann>(wall)) return base;
  if (std::holds_alternative<Dirichlet>(wall)) return -base;
  const double alpha = std::get<Robin>(wall).alpha;
  const cplx den = I * lambda + alpha;
  if (std::abs(den) <= 1e-14 * (std::abs(lambda) + std::abs(alpha))) {
    throw ResonanceError("Robin wall pole: i lambda + alpha = 0");
  }
  return (I * lambda - alpha) / den * base;
}

cplx soft_reflection(cplx k, double v, double L, const WallCondition& wall,
                     const PhysicalConstants& constants) {
  if (v == 0.0) {
    const cplx F = wall_factor(k, L, wall);
    // lambda = k: the detector region is free and c = F.
    return F;
  }
  return soft_coefficients(k, v, L, wall, constants).c;
}

Eigenmode soft_mode(double k, double v, double L, const WallCondition& wall,
                    const PhysicalConstants& constants) {
  require_positive_k(k);
  if (!(v >= 0.0)) throw std::invalid_argument("v must be >= 0");
  if (!(L > 0.0)) throw std::invalid_argument("L must be > 0");
  validate(wall);
  Eigenmode mode{ImaginaryPotential{v, L, wall}, k, std::nullopt, 0.0, 0.0, 0.0, constants.energy_of(k)};
  if (v == 0.0) {
    // Free detector region: lambda = k, matching gives a = 1, b = c = F.
    const cplx F = wall_factor(cplx{k, 0.0}, L, wall);
    mode.lambda = cplx{k, 0.0};
    mode.a = 1.0;
    mode.b = F;
    mode.c = F;
    return mode;
  }
  const auto co = soft_coefficients(cplx{k, 0.0}, v, L, wall, constants);
  mode.lambda = co.lambda;
  mode.c = co.c;
  mode.a = co.a;
  mode.b = co.b;
  return mode;
}

Eigenmode allcock_mode(double k, double v, const PhysicalConstants& constants) {
  require_positive_k(k);
  if (!(v > 0.0)) throw std::invalid_argument("allcock_mode requires v > 0");
  const cplx lambda = lambda_of(k, v, constants);
  const cplx den = k + lambda;
  return Eigenmode{ImaginaryPotential{v, std::numeric_limits<double>::infinity(), Neumann{}},
                   k,
                   lambda,
                   (k - lambda) / den,
                   2.0 * k / den,
                   0.0,
                   constants.energy_of(k)};
}

cplx hard_reflection(cplx k, double kappa, double nu) {
  return (k - kappa + I * nu) / (k + kappa - I * nu);
}

Eigenmode hard_mode(double k, double kappa, double nu, const PhysicalConstants& constants) {
  require_positive_k(k);
  if (!(kappa > 0.0)) throw std::invalid_argument("kappa must be > 0");
  return Eigenmode{AbsorbingBoundary{kappa, nu}, k, std::nullopt, hard_reflection(k, kappa, nu),
                   0.0, 0.0, constants.energy_of(k)};
}

cplx eval_mode(const Eigenmode& mode, double x) {
  if (x < 0.0) return std::exp(I * mode.k * x) + mode.c * std::exp(-I * mode.k * x);
  if (const auto* m = std::get_if<ImaginaryPotential>(&mode.model)) {
    if (x > m->L) throw std::domain_error("eval_mode: x beyond the detector wall");
    const cplx lambda = *mode.lambda;
    if (mode.b == 0.0) return mode.a * std::exp(I * lambda * x);
    return mode.a * std::exp(I * lambda * x) + mode.b * std::exp(-I * lambda * x);
  }
  if (x > 0.0) throw std::domain_error("eval_mode: x > 0 outside the half-line");
  return 1.0 + mode.c;
}

cplx eval_mode_derivative(const Eigenmode& mode, double x) {
  const auto* m = std::get_if<ImaginaryPotential>(&mode.model);
  if (x < 0.0 || !m) {
    if (x > 0.0) throw std::domain_error("eval_mode_derivative: x > 0 outside the half-line");
    return I * mode.k * (std::exp(I * mode.k * x) - mode.c * std::exp(-I * mode.k * x));
  }
  if (x > m->L) throw std::domain_error("eval_mode_derivative: x beyond the detector wall");
  const cplx lambda = *mode.lambda;
  cplx d = I * lambda * mode.a * std::exp(I * lambda * x);
  if (mode.b != 0.0) d -= I * lambda * mode.b * std::exp(-I * lambda * x);
  return d;
}

ReflectionAbsorption reflection_absorption(const Eigenmode& mode) {
  const double R = std::norm(mode.c);
  return {R, 1.0 - R};
}

cplx mode_overlap_formula(double k, double k2, cplx c, cplx c2) {
  if (k == k2) throw std::domain_error("mode_overlap_formula: pole at k = k2");
  const cplx c2s = std::conj(c2);
  return -I * (1.0 - c2s * c) / (k - k2) - I * (c2s - c) / (k + k2);
}

double fII_norm_squared(const Eigenmode& mode) {
  const auto* m = std::get_if<ImaginaryPotential>(&mode.model);
  if (!m) throw std::invalid_argument("fII_norm_squared requires a soft-detector mode");
  const cplx lambda = *mode.lambda;
  const double p = lambda.real();
  const double q = lambda.imag();
  const double L = m->L;
  const double aa = std::norm(mode.a);
  const double bb = std::norm(mode.b);

  if (std::isinf(L)) {
    if (bb != 0.0) throw std::domain_error("unbounded detector region with growing component");
    if (aa == 0.0) return 0.0;
    return aa / (2.0 * q);
  }

  // int_0^L exp(s x) dx, stable for small s L.
  auto exp_integral = [L](double s) { return s == 0.0 ? L : std::expm1(s * L) / s; };
  const double decaying = aa * exp_integral(-2.0 * q);
  const double growing = bb * exp_integral(2.0 * q);
  // int_0^L exp(2 i p x) dx
  const cplx osc = p == 0.0 ? cplx{L, 0.0} : (std::exp(2.0 * I * p * L) - 1.0) / (2.0 * I * p);
  const double cross = 2.0 * std::real(mode.a * std::conj(mode.b) * osc);
  return std::max(0.0, decaying + growing + cross);
}

cplx quantization_condition(cplx k, double ell, const DetectorSpec& model,
                            const PhysicalConstants& constants) {
  const cplx e = std::exp(-2.0 * I * k * ell);
  if (const auto* h = std::get_if<AbsorbingBoundary>(&model)) {
    return hard_reflection(k, h->kappa, h->nu) + e;
  }
  if (const auto* s = std::get_if<ImaginaryPotential>(&model)) {
    return soft_reflection(k, s->v, s->L, s->wall, constants) + e;
  }
  // Dirichlet at both ends: c = -1.
  return -1.0 + e;
}

WaveState sample_finite_interval_mode(const SpectrumPoint& point, const DetectorSpec& model,
                                      const Grid& grid, const PhysicalConstants& constants) {
  const cplx k = point.k;
  cplx c;
  cplx lambda;
  cplx a;
  cplx b;
  const auto* soft = std::get_if<ImaginaryPotential>(&model);
  if (soft) {
    const auto co = soft_coefficients(k, soft->v, soft->L, soft->wall, constants);
    c = co.c;
    lambda = co.lambda;
    a = co.a;
    b = co.b;
  } else if (const auto* h = std::get_if<AbsorbingBoundary>(&model)) {
    c = hard_reflection(k, h->kappa, h->nu);
  } else {
    c = -1.0;
  }
  std::vector<cplx> amps(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid.x(i);
    if (x < 0.0 || !soft) {
      amps[i] = std::exp(I * k * x) + c * std::exp(-I * k * x);
    } else {
      amps[i] = a * std::exp(I * lambda * x) + b * std::exp(-I * lambda * x);
    }
  }
  return WaveState(grid, std::move(amps), 0.0);
}

}  // namespace detlab
