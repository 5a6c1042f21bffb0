#include "llbtoc/forward.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "llbtoc/error.hpp"
#include "llbtoc/metric.hpp"

namespace llbtoc {

std::size_t StateTrajectory::interval_of(double t) const {
  if (t <= times.front()) return 0;
  if (t >= times.back()) return steps() - 1;
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  return std::min<std::size_t>(static_cast<std::size_t>(it - times.begin()) - 1, steps() - 1);
}

VectorField StateTrajectory::linear_at(double t) const {
  require(t >= times.front() - 1e-12 && t <= times.back() + 1e-12, ErrorKind::out_of_range,
          "time " + std::to_string(t) + " outside the trajectory");
  const std::size_t n = interval_of(t);
  const double theta = std::clamp((t - times[n]) / step(n), 0.0, 1.0);
  VectorField out = (1.0 - theta) * frames[n];
  axpy(theta, frames[n + 1], out);
  return out;
}

VectorField llb_rhs(const VectorField& m, const VectorField& u) {
  require_same_grid(m, u);
  const VectorField lap = laplacian(m);
  VectorField out(m.grid());
  for (std::size_t i = 0; i < m.size(); ++i) {
    const Vec3& mi = m[i];
    out[i] = cross(mi, lap[i]) + cross(mi, u[i]) - (1.0 + norm2(mi)) * mi + u[i];
  }
  return out;
}

VectorField step_semi_implicit(const VectorField& m, const VectorField& u, double dt, double cg_tol) {
  require(dt > 0.0, ErrorKind::invalid_argument, "time step must be positive");
  VectorField rhs = llb_rhs(m, u);
  rhs *= dt;
  rhs += m;
  require(rhs.all_finite(), ErrorKind::diverged, "non-finite state in the explicit part of the step");
  return solve_shifted_laplacian(rhs, 1.0, dt, cg_tol);
}

std::vector<double> step_times(double horizon, double dt) {
  require(horizon > 0.0, ErrorKind::invalid_argument, "horizon must be positive");
  require(dt > 0.0, ErrorKind::invalid_argument, "time step must be positive");
  const auto k = static_cast<std::size_t>(std::max(1.0, std::ceil(horizon / dt - 1e-9)));
  std::vector<double> t(k + 1);
  for (std::size_t n = 0; n < k; ++n) t[n] = static_cast<double>(n) * dt;
  t[k] = horizon;
  return t;
}

StateTrajectory simulate(const VectorField& m0, const ControlTrajectory& u, const SolverConfig& config) {
  require(m0.all_finite(), ErrorKind::invalid_argument, "initial state contains non-finite values");
  require(u.grid() == m0.grid(), ErrorKind::grid_mismatch, "control and initial state on different grids");
  require(config.blowup_cap > 0.0, ErrorKind::invalid_argument, "blow-up cap must be positive");
  StateTrajectory traj;
  traj.times = step_times(config.horizon, config.dt);
  traj.control = u;
  traj.config = config;
  const std::size_t k = traj.steps();
  traj.frames.reserve(k + 1);
  traj.step_controls.reserve(k);
  traj.frames.push_back(m0);
  for (std::size_t n = 0; n < k; ++n) {
    const double tau = traj.step(n);
    traj.step_controls.push_back(u.sample(traj.times[n] + 0.5 * tau));
    VectorField next = step_semi_implicit(traj.frames.back(), traj.step_controls.back(), tau, config.cg_tol);
    const double sup = linf_norm(next);
    require(next.all_finite() && sup <= config.blowup_cap, ErrorKind::diverged,
            "state exceeded the blow-up cap at t = " + std::to_string(traj.times[n + 1]) +
                " (‖m‖_∞ = " + std::to_string(sup) + ")");
    traj.frames.push_back(std::move(next));
  }
  return traj;
}

double distance_to_target(const VectorField& m, const TargetSpec& target) { return l2_norm(m - target.m_omega); }

namespace {

struct SquaredDistance {
  std::vector<double> nodes;
  std::vector<std::vector<double>> gram;
  double delta2;

  double value(double t) const {
    const auto w = lagrange_weights(nodes, t);
    return quad(w.value, w.value) - delta2;
  }
  double slope(double t) const {
    const auto w = lagrange_weights(nodes, t);
    return 2.0 * quad(w.first, w.value);
  }
  double quad(const std::vector<double>& a, const std::vector<double>& b) const {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = 0; j < b.size(); ++j) s += a[i] * gram[i][j] * b[j];
    return s;
  }
};

double first_root(const SquaredDistance& q, double a, double b) {
  constexpr int scan = 16;
  double lo = a;
  double hi = b;
  for (int s = 1; s <= scan; ++s) {
    const double x = s == scan ? b : a + (b - a) * s / scan;
    if (q.value(x) <= 0.0) {
      hi = x;
      break;
    }
    lo = x;
  }
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double fx = q.value(x);
    if (fx == 0.0) return x;
    if (fx > 0.0) lo = x; else hi = x;
    const double d = q.slope(x);
    double next = d != 0.0 ? x - fx / d : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-16 * std::max(1.0, std::abs(x)) || hi - lo <= 4e-16 * std::max(1.0, std::abs(x))) {
      return next;
    }
    x = next;
  }
  return x;
}

}  // namespace

std::optional<HitResult> hitting_time(const StateTrajectory& traj, const TargetSpec& target) {
  require(target.delta > 0.0, ErrorKind::invalid_argument, "tube radius δ must be positive");
  require(target.m_omega.grid() == traj.grid(), ErrorKind::grid_mismatch, "target lives on a different grid");
  const double delta2 = target.delta * target.delta;
  std::vector<double> d2(traj.frames.size());
  for (std::size_t n = 0; n < traj.frames.size(); ++n) {
    const VectorField r = traj.frames[n] - target.m_omega;
    d2[n] = l2_inner(r, r);
  }
  require(d2[0] > delta2, ErrorKind::trivial_case,
          "initial state already inside the tube: ‖m₀ − m_Ω‖ = " + std::to_string(std::sqrt(d2[0])) +
              " ≤ δ = " + std::to_string(target.delta));
  std::size_t n = 0;
  while (n + 1 < d2.size() && d2[n + 1] > delta2) ++n;
  if (n + 1 == d2.size()) return std::nullopt;

  HitResult hit;
  hit.interval = n;
  hit.stencil = cubic_stencil(n, traj.frames.size());
  SquaredDistance q;
  q.delta2 = delta2;
  std::vector<VectorField> residuals;
  for (auto i : hit.stencil) {
    q.nodes.push_back(traj.times[i]);
    residuals.push_back(traj.frames[i] - target.m_omega);
  }
  q.gram.assign(residuals.size(), std::vector<double>(residuals.size()));
  for (std::size_t i = 0; i < residuals.size(); ++i)
    for (std::size_t j = 0; j <= i; ++j) q.gram[i][j] = q.gram[j][i] = l2_inner(residuals[i], residuals[j]);
  hit.time = first_root(q, traj.times[n], traj.times[n + 1]);
  hit.weights = lagrange_weights(q.nodes, hit.time);
  hit.distance = std::sqrt(std::max(0.0, q.quad(hit.weights.value, hit.weights.value)));
  return hit;
}

HitResult require_hit(const StateTrajectory& traj, const TargetSpec& target) {
  auto hit = hitting_time(traj, target);
  if (!hit) {
    fail(ErrorKind::target_unreachable, "trajectory never enters the δ-tube before t = " +
                                            std::to_string(traj.final_time()));
  }
  return *hit;
}

EnergyReport energy_diagnostics(const StateTrajectory& traj, const ControlTrajectory& u, const EnergyOptions& options) {
  EnergyReport rep;
  std::vector<double> h3(traj.frames.size());
  for (std::size_t n = 0; n < traj.frames.size(); ++n) {
    const VectorField& m = traj.frames[n];
    const VectorField lap = laplacian(m);
    const double l2 = l2_inner(m, m);
    rep.h2eq_history.push_back(l2 + l2_inner(lap, lap));
    h3[n] = l2 + gradient_inner(lap, lap);
  }
  rep.sup_h2eq = *std::max_element(rep.h2eq_history.begin(), rep.h2eq_history.end());
  for (std::size_t n = 0; n < traj.steps(); ++n) rep.int_h3eq += 0.5 * traj.step(n) * (h3[n] + h3[n + 1]);

  const auto w = u.trapezoid_weights();
  double u_l2h1 = 0.0;
  double u_l2l2 = 0.0;
  for (std::size_t k = 0; k < u.node_count(); ++k) {
    u_l2l2 += w[k] * l2_inner(u.frames()[k], u.frames()[k]);
    u_l2h1 += w[k] * inner_product(u.frames()[k], u.frames()[k], InnerKind::H1);
  }
  const VectorField& m0 = traj.frames.front();
  rep.prefactor = rep.h2eq_history.front() + u_l2h1;
  rep.e1 = std::pow(1.0 + inner_product(m0, m0, InnerKind::H1) + u_l2l2, 2);
  rep.e2 = u_l2h1;
  const double c = options.constant;
  rep.m_proxy = rep.prefactor * std::exp(c * rep.e1 * std::exp(c * rep.e2));
  if (!std::isfinite(rep.m_proxy)) rep.m_proxy = std::numeric_limits<double>::max();
  rep.smallness_exceeded = traj.grid().dim == 3 && rep.m_proxy > options.threshold;
  return rep;
}

void write_trajectory_csv(const std::filesystem::path& path, const StateTrajectory& traj, const TargetSpec& target) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorKind::io, "cannot write " + path.string());
  out.precision(17);
  out << "t,dist_to_target_L2,norm_H2eq\n";
  for (std::size_t n = 0; n < traj.frames.size(); ++n) {
    const VectorField& m = traj.frames[n];
    const VectorField lap = laplacian(m);
    out << traj.times[n] << ',' << distance_to_target(m, target) << ','
        << std::sqrt(l2_inner(m, m) + l2_inner(lap, lap)) << '\n';
  }
}

}  // namespace llbtoc
