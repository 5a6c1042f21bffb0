#include "llbtoc/validation.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "llbtoc/error.hpp"

namespace llbtoc {

double radial_oracle(double s0, double t) {
  require(s0 >= 0.0 && std::isfinite(s0), ErrorKind::invalid_argument, "s0 must be finite and non-negative");
  require(t >= 0.0, ErrorKind::invalid_argument, "time must be non-negative");
  const double a = s0 / (1.0 + s0);
  const double e = a * std::exp(-2.0 * t);
  return e / (1.0 - e);
}

double radial_oracle_inverse(double s0, double s) {
  require(s0 > 0.0 && std::isfinite(s0), ErrorKind::invalid_argument, "s0 must be finite and positive");
  require(s > 0.0 && s <= s0, ErrorKind::out_of_range, "s must lie in (0, s0]");
  // s/(1+s) = a e^{−2t}
  const double a = s0 / (1.0 + s0);
  return 0.5 * std::log(a * (1.0 + s) / s);
}

// ---- spectral solver ----

namespace {

class CosineGalerkin {
 public:
  CosineGalerkin(int modes, int points, double length) : n_(modes), q_(points), length_(length) {
    basis_.resize(static_cast<std::size_t>(q_) * n_);
    wave2_.resize(n_);
    for (int j = 0; j < n_; ++j) wave2_[j] = std::pow(j * M_PI / length_, 2);
    for (int i = 0; i < q_; ++i) {
      const double x = (i + 0.5) * length_ / q_;
      for (int j = 0; j < n_; ++j) basis_[static_cast<std::size_t>(i) * n_ + j] = std::cos(j * M_PI * x / length_);
    }
  }

  int modes() const { return n_; }
  double wave2(int j) const { return wave2_[j]; }
  double point(int i) const { return (i + 0.5) * length_ / q_; }

  /// Quadrature projection of point values onto the modes.
  std::vector<Vec3> project(const std::vector<Vec3>& f) const {
    std::vector<Vec3> a(n_);
    for (int i = 0; i < q_; ++i)
      for (int j = 0; j < n_; ++j) a[j] += basis_[static_cast<std::size_t>(i) * n_ + j] * f[i];
    for (int j = 0; j < n_; ++j) a[j] *= (j == 0 ? 1.0 : 2.0) / q_;
    return a;
  }

  std::vector<Vec3> synthesize(const std::vector<Vec3>& a, bool laplacian) const {
    std::vector<Vec3> f(q_);
    for (int i = 0; i < q_; ++i)
      for (int j = 0; j < n_; ++j)
        f[i] += (basis_[static_cast<std::size_t>(i) * n_ + j] * (laplacian ? -wave2_[j] : 1.0)) * a[j];
    return f;
  }

  /// 𝒫[m×Δm + m×u − (1+|m|²)m + u]
  std::vector<Vec3> nonlinear(const std::vector<Vec3>& a, double t, const ControlProfile& u) const {
    const auto m = synthesize(a, false);
    const auto lap = synthesize(a, true);
    std::vector<Vec3> f(q_);
    for (int i = 0; i < q_; ++i) {
      const Vec3 ui = u(t, point(i));
      f[i] = cross(m[i], lap[i]) + cross(m[i], ui) - (1.0 + norm2(m[i])) * m[i] + ui;
    }
    return project(f);
  }

  VectorField sample(const std::vector<Vec3>& a, const Grid& grid) const {
    VectorField out(grid);
    for (std::size_t c = 0; c < out.size(); ++c) {
      const double x = grid.center(c)[0];
      Vec3 v{};
      for (int j = 0; j < n_; ++j) v += std::cos(j * M_PI * x / length_) * a[j];
      out[c] = v;
    }
    return out;
  }

 private:
  int n_;
  int q_;
  double length_;
  std::vector<double> basis_;
  std::vector<double> wave2_;
};

using Coeffs = std::vector<Vec3>;

Coeffs combine(const Coeffs& a, double s, const Coeffs& b) {
  Coeffs r = a;
  for (std::size_t j = 0; j < r.size(); ++j) r[j] += s * b[j];
  return r;
}

Coeffs decay(const CosineGalerkin& gal, const Coeffs& a, double h) {
  Coeffs r = a;
  for (int j = 0; j < gal.modes(); ++j) r[j] *= std::exp(-gal.wave2(j) * h);
  return r;
}

/// Lawson integrating-factor RK4 for a' = −k²a + 𝒩(a, t).
Coeffs if_rk4_step(const CosineGalerkin& gal, const Coeffs& a, double t, double h, const ControlProfile& u) {
  const Coeffs k1 = gal.nonlinear(a, t, u);
  const Coeffs half_a = decay(gal, a, 0.5 * h);
  const Coeffs k2 = gal.nonlinear(combine(half_a, 0.5 * h, decay(gal, k1, 0.5 * h)), t + 0.5 * h, u);
  const Coeffs k3 = gal.nonlinear(combine(half_a, 0.5 * h, k2), t + 0.5 * h, u);
  const Coeffs k4 = gal.nonlinear(combine(decay(gal, a, h), h, decay(gal, k3, 0.5 * h)), t + h, u);
  Coeffs next = decay(gal, a, h);
  const Coeffs k1e = decay(gal, k1, h);
  const Coeffs k23 = decay(gal, combine(k2, 1.0, k3), 0.5 * h);
  for (std::size_t j = 0; j < next.size(); ++j) next[j] += (h / 6.0) * (k1e[j] + 2.0 * k23[j] + k4[j]);
  return next;
}

/// f(x) = Σ_j b_j cos(jπx/L) through the cell values of a 1D field.
std::vector<Vec3> cosine_interpolant(const VectorField& f) {
  const Grid& g = f.grid();
  const int n = g.cells[0];
  std::vector<Vec3> b(n);
  for (int j = 0; j < n; ++j) {
    for (int c = 0; c < n; ++c) b[j] += std::cos(j * M_PI * (c + 0.5) / n) * f[c];
    b[j] *= (j == 0 ? 1.0 : 2.0) / n;
  }
  return b;
}

Vec3 eval_cosine(const std::vector<Vec3>& b, double x, double length) {
  Vec3 v{};
  for (std::size_t j = 0; j < b.size(); ++j) v += std::cos(j * M_PI * x / length) * b[j];
  return v;
}

}  // namespace

StateTrajectory spectral_simulate_1d(const Grid& grid, const InitialProfile& m0, const ControlProfile& u, double T,
                                     const SpectralConfig& config) {
  require(grid.dim == 1, ErrorKind::grid_mismatch, "the spectral oracle is one-dimensional");
  require(config.modes >= 2, ErrorKind::invalid_argument, "at least two modes are required");
  require(config.length > 0.0, ErrorKind::invalid_argument, "interval length must be positive");
  require(std::abs(config.length - grid.extent[0]) <= 1e-12 * config.length, ErrorKind::grid_mismatch,
          "interval length differs from the grid extent");
  require(T > 0.0 && config.dt > 0.0, ErrorKind::invalid_argument, "T and dt must be positive");
  const int points = config.quadrature_points > 0 ? config.quadrature_points
                                                  : (config.dealias ? 2 * config.modes : config.modes);
  require(config.modes <= points, ErrorKind::out_of_range,
          "mode count " + std::to_string(config.modes) + " exceeds the quadrature resolution " +
              std::to_string(points));

  const CosineGalerkin gal(config.modes, points, config.length);
  std::vector<Vec3> init(points);
  for (int i = 0; i < points; ++i) init[i] = m0(gal.point(i));
  Coeffs a = gal.project(init);

  StateTrajectory traj;
  traj.config.dt = config.dt;
  traj.config.horizon = T;
  traj.times = step_times(T, config.dt);
  traj.frames.reserve(traj.times.size());
  traj.frames.push_back(gal.sample(a, grid));
  for (std::size_t n = 0; n + 1 < traj.times.size(); ++n) {
    const double h = traj.times[n + 1] - traj.times[n];
    a = if_rk4_step(gal, a, traj.times[n], h, u);
    for (const auto& v : a)
      if (!is_finite(v)) fail(ErrorKind::diverged, "spectral solution became non-finite");
    traj.frames.push_back(gal.sample(a, grid));
  }
  return traj;
}

StateTrajectory spectral_simulate_1d(const VectorField& m0, const ControlTrajectory& u, double T,
                                     const SpectralConfig& config) {
  const Grid& g = m0.grid();
  require(g.dim == 1, ErrorKind::grid_mismatch, "the spectral oracle is one-dimensional");
  require(u.grid() == g, ErrorKind::grid_mismatch, "control lives on a different grid");
  const double length = g.extent[0];
  const auto b0 = cosine_interpolant(m0);
  std::vector<std::vector<Vec3>> bu;
  for (const auto& f : u.frames()) bu.push_back(cosine_interpolant(f));
  const InitialProfile m0_fn = [&](double x) { return eval_cosine(b0, x, length); };
  const ControlProfile u_fn = [&](double t, double x) {
    Vec3 v{};
    for (const auto& [k, w] : u.basis_weights(t)) v += w * eval_cosine(bu[k], x, length);
    return v;
  };
  return spectral_simulate_1d(g, m0_fn, u_fn, T, config);
}

// ---- Taylor sweeps ----

const char* to_string(SweepKind kind) noexcept {
  switch (kind) {
    case SweepKind::state1: return "state1";
    case SweepKind::state2: return "state2";
    case SweepKind::time1: return "time1";
    case SweepKind::time2: return "time2";
    case SweepKind::gradient: return "gradient";
  }
  return "unknown";
}

SweepKind parse_sweep_kind(const std::string& name) {
  for (auto k : {SweepKind::state1, SweepKind::state2, SweepKind::time1, SweepKind::time2, SweepKind::gradient})
    if (name == to_string(k)) return k;
  fail(ErrorKind::parse, "unknown sweep kind '" + name + "'");
}

double expected_order(SweepKind kind) noexcept {
  return (kind == SweepKind::state2 || kind == SweepKind::time2) ? 3.0 : 2.0;
}

std::vector<double> default_rho(double rho_max, int count) {
  std::vector<double> r(count);
  for (int k = 0; k < count; ++k) r[k] = std::ldexp(rho_max, -k);
  return r;
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size() && x.size() >= 2, ErrorKind::invalid_argument, "slope fit needs two or more points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

namespace {

double trajectory_remainder(const StateTrajectory& perturbed, const StateTrajectory& base,
                            const LinearizedTrajectory& z, const SecondVariationTrajectory* xi, double rho) {
  double worst = 0.0;
  for (std::size_t n = 0; n < base.frames.size(); ++n) {
    VectorField e = perturbed.frames[n] - base.frames[n];
    axpy(-rho, z.frames[n], e);
    if (xi) axpy(-0.5 * rho * rho, xi->frames[n], e);
    worst = std::max(worst, l2_norm(e));
  }
  return worst;
}

bool excluded_error(ErrorKind k) {
  return k == ErrorKind::target_unreachable || k == ErrorKind::diverged || k == ErrorKind::trivial_case;
}

}  // namespace

SweepReport taylor_sweep(SweepKind kind, const Problem& problem, const ControlTrajectory& u,
                         const ControlTrajectory& h, const std::vector<double>& rho, const SweepOptions& options) {
  require(!rho.empty(), ErrorKind::invalid_argument, "empty ρ list");
  for (std::size_t i = 0; i < rho.size(); ++i) {
    require(rho[i] > 0.0 && std::isfinite(rho[i]), ErrorKind::invalid_argument, "ρ must be positive");
    if (i > 0) require(rho[i] < rho[i - 1], ErrorKind::invalid_argument, "ρ must be strictly decreasing");
  }
  require_same_nodes(u, h);

  SweepReport rep;
  rep.kind = kind;
  rep.expected = expected_order(kind);

  const Evaluation ev = evaluate(u, problem);
  const bool state_kind = kind == SweepKind::state1 || kind == SweepKind::state2;
  LinearizedTrajectory z = solve_linearized(ev.state, h);
  SecondVariationTrajectory xi;
  if (kind == SweepKind::state2) xi = solve_second_variation(ev.state, z);

  double D = 0.0, G = 0.0, Y = 0.0;
  if (!state_kind) {
    const AdjointTrajectory phi = solve_adjoint(ev.state, ev.hp, problem.transversality_eps);
    if (kind == SweepKind::gradient) {
      Y = first_order_Y(h, phi, u, problem.metric);
    } else {
      const CurvatureTerms c = curvature_G(z, ev.state, ev.hp, phi, problem.transversality_eps);
      D = c.D;
      G = options.curvature_sign * c.G;
    }
  }

  for (double r : rho) {
    const ControlTrajectory ur = u + r * h;
    double res = 0.0;
    try {
      if (state_kind) {
        const StateTrajectory st = simulate(problem.m0, ur, problem.solver);
        res = trajectory_remainder(st, ev.state, z, kind == SweepKind::state2 ? &xi : nullptr, r);
      } else {
        const Evaluation er = evaluate(ur, problem);
        const double dT = er.hp.time() - ev.hp.time();
        switch (kind) {
          case SweepKind::time1: res = std::abs(dT - r * D); break;
          case SweepKind::time2: res = std::abs(dT - r * D - r * r * G); break;
          default: res = std::abs(er.cost.total - ev.cost.total - r * Y); break;
        }
      }
    } catch (const Error& e) {
      if (!excluded_error(e.kind())) throw;
      rep.excluded.push_back(r);
      continue;
    }
    rep.rho.push_back(r);
    rep.residual.push_back(res);
  }

  std::vector<double> fx, fy;
  bool all_zero = !rep.residual.empty();
  for (std::size_t i = 0; i < rep.rho.size(); ++i) {
    if (rep.residual[i] != 0.0) all_zero = false;
    if (rep.residual[i] > 0.0) {
      fx.push_back(rep.rho[i]);
      fy.push_back(rep.residual[i]);
    }
  }
  if (all_zero) {
    rep.exact = true;
    rep.pass = true;
    rep.slope = std::numeric_limits<double>::infinity();
    return rep;
  }
  if (fx.size() >= 5) {
    fx = std::vector<double>(fx.begin() + 1, fx.end() - 1);
    fy = std::vector<double>(fy.begin() + 1, fy.end() - 1);
  }
  if (fx.size() < 2) {
    rep.slope = std::numeric_limits<double>::quiet_NaN();
    rep.pass = false;
    return rep;
  }
  rep.slope = fit_slope(fx, fy);
  rep.pass = rep.slope >= rep.expected - options.slope_tolerance;
  return rep;
}

std::string sweep_csv(const SweepReport& report) {
  std::ostringstream out;
  out.precision(17);
  out << "rho,residual\n";
  for (std::size_t i = 0; i < report.rho.size(); ++i) out << report.rho[i] << ',' << report.residual[i] << '\n';
  return out.str();
}

nlohmann::json to_json(const SweepReport& report) {
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  return {{"kind", to_string(report.kind)}, {"rho", report.rho},        {"residual", report.residual},
          {"excluded", report.excluded},    {"slope", num(report.slope)}, {"expected", report.expected},
          {"pass", report.pass},            {"exact", report.exact}};
}

}  // namespace llbtoc
