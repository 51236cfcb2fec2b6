#include "detlab/limits.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <sstream>

namespace detlab {

HardLimitSequence make_hard_sequence(double kappa, double v0, double ratio, std::size_t count,
                                     const PhysicalConstants& constants) {
  constants.validate();
  if (!(kappa > 0.0)) throw std::invalid_argument("kappa must be > 0");
  if (!(v0 > 0.0)) throw std::invalid_argument("v0 must be > 0");
  if (!(ratio > 1.0)) throw std::invalid_argument("ratio must be > 1");
  if (count < 2) throw std::invalid_argument("a hard-limit sequence needs at least 2 entries");
  const double product = constants.hbar * constants.hbar * kappa / (2.0 * constants.mass);
  HardLimitSequence seq{kappa, ratio, {}};
  for (std::size_t i = 0; i < count; ++i) {
    const double v = v0 * std::pow(ratio, static_cast<double>(i));
    seq.entries.push_back({v, product / v});
  }
  return seq;
}

std::string to_string(Verdict v) { return v == Verdict::Converging ? "converging" : "non-converging"; }

const std::vector<double>& ConvergenceReport::column(const std::string& name) const {
  for (const auto& [key, values] : auxiliary) {
    if (key == name) return values;
  }
  throw std::out_of_range("no auxiliary column '" + name + "'");
}

void finalize(ConvergenceReport& report, double limit_tolerance, const VerdictRule& rule) {
  const auto& p = report.parameters;
  const auto& e = report.errors;
  const std::size_t n = e.size();

  report.slope.reset();
  report.slope_residual.reset();
  const bool positive = std::all_of(e.begin(), e.end(), [](double x) { return x > 0.0; }) &&
                        std::all_of(p.begin(), p.end(), [](double x) { return x > 0.0; });
  if (n >= 4 && positive) {
    std::vector<double> lx(n);
    std::vector<double> ly(n);
    for (std::size_t i = 0; i < n; ++i) {
      lx[i] = std::log(p[i]);
      ly[i] = std::log(e[i]);
    }
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / static_cast<double>(n);
    const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / static_cast<double>(n);
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sxx += (lx[i] - mx) * (lx[i] - mx);
      sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (sxx > 0.0) {
      const double slope = sxy / sxx;
      double rss = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double r = ly[i] - (my + slope * (lx[i] - mx));
        rss += r * r;
      }
      report.slope = slope;
      report.slope_residual = std::sqrt(rss / static_cast<double>(n));
    }
  }

  bool decreasing = n >= rule.tail && rule.tail >= 2;
  for (std::size_t i = n - std::min(n, rule.tail) + 1; decreasing && i < n; ++i) {
    decreasing = e[i] < (1.0 - rule.min_relative_decrease) * e[i - 1];
  }
  report.verdict = decreasing ? Verdict::Converging : Verdict::NonConverging;
  report.limit_tolerance = limit_tolerance;
  report.limit_reached = n > 0 && e.back() < limit_tolerance;
}

namespace {

void require_sequence(const HardLimitSequence& seq) {
  if (seq.entries.size() < 2) throw std::invalid_argument("sweep needs a sequence of at least 2 entries");
}

ConvergenceReport ck_sweep(const char* name, double k, const HardLimitSequence& seq, const WallCondition& wall,
                           const PhysicalConstants& constants, double tol) {
  require_sequence(seq);
  const double kappa = seq.kappa;
  const cplx target = hard_reflection(cplx{k, 0.0}, kappa, 0.0);

  ConvergenceReport r;
  r.sweep = name;
  r.parameter_name = "v";
  std::vector<double> re_c;
  std::vector<double> im_c;
  std::vector<double> re_q;
  std::vector<double> im_q;
  std::vector<double> q_dist;
  std::vector<double> L;
  for (const auto& entry : seq.entries) {
    const Eigenmode mode = soft_mode(k, entry.v, entry.L, wall, constants);
    const cplx lambda = *mode.lambda;
    const cplx F = wall_factor(lambda, entry.L, wall);
    const cplx q = (1.0 - F) / (1.0 + F) * lambda;
    r.parameters.push_back(entry.v);
    r.errors.push_back(std::abs(mode.c - target));
    L.push_back(entry.L);
    re_c.push_back(mode.c.real());
    im_c.push_back(mode.c.imag());
    re_q.push_back(q.real());
    im_q.push_back(q.imag());
    q_dist.push_back(std::abs(q - kappa));
  }
  r.auxiliary = {{"L", L},         {"re_c", re_c},         {"im_c", im_c},
                 {"re_limit1", re_q}, {"im_limit1", im_q}, {"limit1_distance", q_dist}};
  r.scalars["k"] = k;
  r.scalars["kappa"] = kappa;
  r.scalars["target_re_c"] = target.real();
  r.scalars["target_im_c"] = target.imag();
  finalize(r, tol);
  return r;
}

}  // namespace

ConvergenceReport sweep_ck(double k, const HardLimitSequence& sequence, const WallCondition& wall,
                           const PhysicalConstants& constants, double limit_tolerance) {
  if (std::holds_alternative<Dirichlet>(wall)) {
    throw std::invalid_argument("sweep_ck refuses a Dirichlet wall; use sweep_ck_dirichlet");
  }
  auto r = ck_sweep("sweep_ck", k, sequence, wall, constants, limit_tolerance);
  if (const auto* robin = std::get_if<Robin>(&wall)) {
    const auto neumann = ck_sweep("sweep_ck", k, sequence, Neumann{}, constants, limit_tolerance);
    r.auxiliary.emplace_back("neumann_error", neumann.errors);
    // Relative gap between the Robin and Neumann errors at the last entry.
    const double gap = std::abs(r.errors.back() - neumann.errors.back()) / neumann.errors.back();
    r.scalars["robin_alpha"] = robin->alpha;
    r.scalars["robin_neumann_tail_relative_gap"] = gap;
    // The alpha/lambda correction to the wall factor is O(1/sqrt v) but gets
    // multiplied by lambda, so the Robin wall tends to the absorbing boundary
    // with nu = alpha rather than nu = 0.
    const cplx shifted = hard_reflection(cplx{k, 0.0}, sequence.kappa, robin->alpha);
    std::vector<double> shifted_error;
    for (std::size_t i = 0; i < r.errors.size(); ++i) {
      shifted_error.push_back(std::abs(cplx(r.column("re_c")[i], r.column("im_c")[i]) - shifted));
    }
    r.auxiliary.emplace_back("shifted_abr_error", std::move(shifted_error));
  }
  return r;
}

ConvergenceReport sweep_ck_dirichlet(double k, const HardLimitSequence& sequence, const PhysicalConstants& constants,
                                     double limit_tolerance) {
  auto r = ck_sweep("sweep_ck_dirichlet", k, sequence, Dirichlet{}, constants, limit_tolerance);
  const std::size_t tail = std::min<std::size_t>(3, r.errors.size());
  r.scalars["tail_infimum"] = *std::min_element(r.errors.end() - static_cast<std::ptrdiff_t>(tail), r.errors.end());
  return r;
}

ConvergenceReport sweep_fII(double k, const HardLimitSequence& sequence, const PhysicalConstants& constants,
                            double limit_tolerance) {
  require_sequence(sequence);
  const double limit = k / (k + sequence.kappa);
  ConvergenceReport r;
  r.sweep = "sweep_fII";
  r.parameter_name = "v";
  std::vector<double> L;
  std::vector<double> a_err;
  std::vector<double> b_err;
  std::vector<double> bound;
  for (const auto& entry : sequence.entries) {
    const Eigenmode mode = soft_mode(k, entry.v, entry.L, Neumann{}, constants);
    r.parameters.push_back(entry.v);
    r.errors.push_back(fII_norm_squared(mode));
    L.push_back(entry.L);
    a_err.push_back(std::abs(mode.a - limit));
    b_err.push_back(std::abs(mode.b - limit));
    // |b|^2 (exp(4mvL/hbar^2) - 1)/(4mv/hbar^2). Since 2 Re(lambda) Im(lambda)
    // = 2mv/hbar^2, this bounds |b|^2 int_0^L exp(2 Im(lambda) x) dx whenever
    // Re(lambda) >= 1/2, which holds along the hard limit.
    const double s = 2.0 * constants.k_squared_per_energy() * entry.v;
    bound.push_back(std::norm(mode.b) * std::expm1(s * entry.L) / s);
  }
  r.auxiliary = {{"L", L}, {"a_error", a_err}, {"b_error", b_err}, {"b_component_bound", bound}};
  r.scalars["k"] = k;
  r.scalars["kappa"] = sequence.kappa;
  r.scalars["ab_limit"] = limit;
  finalize(r, limit_tolerance);
  return r;
}

std::vector<double> allcock_sample_points(double k) {
  std::vector<double> xs;
  const double span = 2.0 * std::acos(-1.0) / k;
  for (int i = 0; i <= 16; ++i) xs.push_back(-span * static_cast<double>(i) / 16.0);
  return xs;
}

ConvergenceReport sweep_allcock(double k, const std::vector<double>& v_sequence, const PhysicalConstants& constants,
                                double limit_tolerance) {
  if (v_sequence.size() < 2) throw std::invalid_argument("sweep needs at least 2 values of v");
  for (std::size_t i = 1; i < v_sequence.size(); ++i) {
    if (!(v_sequence[i] > v_sequence[i - 1])) throw std::invalid_argument("v sequence must be increasing");
  }
  const auto xs = allcock_sample_points(k);
  ConvergenceReport r;
  r.sweep = "sweep_allcock";
  r.parameter_name = "v";
  std::vector<double> a_abs;
  std::vector<double> R;
  std::vector<double> A;
  std::vector<double> fI_dist;
  std::vector<double> re_c;
  std::vector<double> im_c;
  for (double v : v_sequence) {
    const Eigenmode mode = allcock_mode(k, v, constants);
    const auto ra = reflection_absorption(mode);
    double worst = 0.0;
    for (double x : xs) {
      const cplx dirichlet = std::exp(I * k * x) - std::exp(-I * k * x);
      worst = std::max(worst, std::abs(eval_mode(mode, x) - dirichlet));
    }
    r.parameters.push_back(v);
    r.errors.push_back(std::abs(mode.c + 1.0));
    a_abs.push_back(std::abs(mode.a));
    R.push_back(ra.R);
    A.push_back(ra.A);
    fI_dist.push_back(worst);
    re_c.push_back(mode.c.real());
    im_c.push_back(mode.c.imag());
  }
  r.auxiliary = {{"re_c", re_c}, {"im_c", im_c}, {"abs_a", a_abs}, {"R", R}, {"A", A}, {"fI_dirichlet_distance", fI_dist}};
  r.scalars["k"] = k;
  finalize(r, limit_tolerance);
  return r;
}

RhoTDistance rho_T_distance(const TimeSeries& reference, const TimeSeries& other) {
  RhoTDistance d{0.0, 0.0};
  const auto& t = reference.times;
  std::vector<double> diff(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    diff[i] = std::abs(reference.rho_T_norm[i] - interpolate(other.times, other.rho_T_norm, t[i]));
    d.sup = std::max(d.sup, diff[i]);
  }
  d.l1 = integrate(t, diff);
  return d;
}

RhoTSweep sweep_rhoT(const GaussianPacketSpec& packet, const HardLimitSequence& sequence, const AbsorbingBoundary& abr,
                     const RhoTNumerics& numerics, const PhysicalConstants& constants, double limit_tolerance) {
  require_sequence(sequence);
  validate(DetectorSpec{abr});
  double L_min = sequence.entries.front().L;
  double v_max = sequence.entries.front().v;
  for (const auto& e : sequence.entries) {
    L_min = std::min(L_min, e.L);
    v_max = std::max(v_max, e.v);
  }
  const double dx = numerics.dx > 0.0 ? numerics.dx : L_min / 4.0;
  if (dx > L_min / 4.0 * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "grid cannot resolve the finest detector: dx = " << dx << " > L_min/4 = " << L_min / 4.0;
    throw std::invalid_argument(os.str());
  }
  const DetectorSpec finest = ImaginaryPotential{v_max, L_min, Neumann{}};
  const double dt = numerics.dt > 0.0 ? numerics.dt : default_time_step(packet.k0, finest, constants);
  const auto steps = static_cast<std::size_t>(std::llround(numerics.t_end / dt));
  if (steps < 2) throw std::invalid_argument("t_end too short for the time step");

  RunOptions options;
  options.origin_weight = numerics.origin_weight;

  auto run_model = [&](const DetectorSpec& model) {
    const Grid grid = Grid::anchored(numerics.x_min, right_edge(model), dx);
    const WaveState psi0 = make_gaussian_packet(grid, packet);
    return run(psi0, model, dt, steps, constants, options).series;
  };

  std::vector<std::future<TimeSeries>> soft_runs;
  for (const auto& e : sequence.entries) {
    const DetectorSpec model = ImaginaryPotential{e.v, e.L, Neumann{}};
    soft_runs.push_back(std::async(std::launch::async, run_model, model));
  }
  TimeSeries abr_series = run_model(DetectorSpec{abr});

  RhoTSweep out{{}, std::move(abr_series), {}, Grid::anchored(numerics.x_min, 0.0, dx), dt};
  double peak = 0.0;
  for (double r : out.abr.rho_T_norm) peak = std::max(peak, r);

  ConvergenceReport& r = out.report;
  r.sweep = "sweep_rhoT";
  r.parameter_name = "v";
  std::vector<double> L;
  std::vector<double> l1;
  std::vector<double> sup_rel;
  for (std::size_t i = 0; i < soft_runs.size(); ++i) {
    out.soft.push_back(soft_runs[i].get());
    const auto d = rho_T_distance(out.abr, out.soft.back());
    r.parameters.push_back(sequence.entries[i].v);
    r.errors.push_back(d.sup);
    L.push_back(sequence.entries[i].L);
    l1.push_back(d.l1);
    sup_rel.push_back(d.sup / peak);
  }
  r.auxiliary = {{"L", L}, {"l1", l1}, {"sup_relative", sup_rel}};
  r.scalars["kappa"] = abr.kappa;
  r.scalars["abr_peak"] = peak;
  r.scalars["dt"] = dt;
  r.scalars["dx"] = dx;
  finalize(r, limit_tolerance * peak);
  return out;
}

ConvergenceReport sweep_finite_interval(double ell, const HardLimitSequence& sequence, const SearchWindow& window,
                                        const PhysicalConstants& constants) {
  require_sequence(sequence);
  const auto reference = finite_interval_spectrum(ell, AbsorbingBoundary{sequence.kappa, 0.0}, window, constants);
  ConvergenceReport r;
  r.sweep = "sweep_finite_interval";
  r.parameter_name = "v";
  std::vector<double> counts;
  for (const auto& e : sequence.entries) {
    const auto soft = finite_interval_spectrum(ell, ImaginaryPotential{e.v, e.L, Neumann{}}, window, constants);
    double worst = 0.0;
    for (const auto& p : reference.points) {
      double nearest = std::numeric_limits<double>::infinity();
      for (const auto& q : soft.points) nearest = std::min(nearest, std::abs(p.k - q.k));
      worst = std::max(worst, nearest);
    }
    r.parameters.push_back(e.v);
    r.errors.push_back(worst);
    counts.push_back(static_cast<double>(soft.points.size()));
  }
  r.auxiliary = {{"soft_root_count", counts}};
  r.scalars["abr_root_count"] = static_cast<double>(reference.points.size());
  r.scalars["ell"] = ell;
  finalize(r, 0.0);
  return r;
}

}  // namespace detlab
