#include "llbtoc/adjoint.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "llbtoc/error.hpp"
#include "llbtoc/metric.hpp"

namespace llbtoc {

TransversalityCheck check_transversality(const VectorField& residual, const VectorField& m_t, double t_hit,
                                         double rel_eps) {
  TransversalityCheck c;
  c.numerator = t_hit;
  c.denominator = l2_inner(residual, m_t);
  c.epsilon = rel_eps * l2_norm(residual) * l2_norm(m_t);
  c.pass = c.denominator < -c.epsilon;
  return c;
}

TerminalCondition terminal_condition(const VectorField& residual, const VectorField& m_t, double t_hit,
                                     double rel_eps) {
  TerminalCondition tc;
  tc.check = check_transversality(residual, m_t, t_hit, rel_eps);
  if (!tc.check.pass) {
    fail(ErrorKind::transversality_violation,
         "no transversal crossing of the tube: (m(T) − m_Ω, m_t(T)) = " + std::to_string(tc.check.denominator) +
             " is not below −" + std::to_string(tc.check.epsilon));
  }
  tc.lambda = t_hit / tc.check.denominator;
  tc.phi_T = -tc.lambda * residual;
  return tc;
}

TerminalCondition terminal_condition(const HittingPoint& hp, double rel_eps) {
  return terminal_condition(hp.residual, hp.m_t, hp.time(), rel_eps);
}

VectorField apply_adjoint_operator(const VectorField& p, const VectorField& m, const VectorField& u) {
  require_same_grid(p, m);
  require_same_grid(p, u);
  const VectorField lap_m = laplacian(m);
  const VectorField lap_pm = laplacian(cross_field(p, m));
  VectorField out(p.grid());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Vec3& pi = p[i];
    const Vec3& mi = m[i];
    out[i] = cross(lap_m[i], pi) + lap_pm[i] + cross(u[i], pi) - (1.0 + norm2(mi)) * pi - (2.0 * dot(mi, pi)) * mi;
  }
  return out;
}

namespace {

AdjointEntry make_entry(double weight, double control_time, double state_time, std::size_t frame, VectorField dual,
                        const VectorField& m) {
  AdjointEntry e;
  e.weight = weight;
  e.control_time = control_time;
  e.state_time = state_time;
  e.frame = frame;
  e.psi = dual + cross_field(dual, m);
  e.dual = std::move(dual);
  return e;
}

void solve_discrete(const StateTrajectory& m, const HittingPoint& hp, AdjointTrajectory& out) {
  const auto& stencil = hp.hit.stencil;
  const auto& c = hp.hit.weights.value;
  const std::size_t last = stencil.back();
  auto seed = [&](std::size_t n, VectorField& p) {
    for (std::size_t i = 0; i < stencil.size(); ++i)
      if (stencil[i] == n) axpy(c[i], out.phi_T, p);
  };
  VectorField p(m.grid());
  seed(last, p);
  std::vector<AdjointEntry> rev;
  rev.reserve(last);
  for (std::size_t n = last; n-- > 0;) {
    const double tau = m.step(n);
    VectorField q = solve_shifted_laplacian(p, 1.0, tau, m.config.cg_tol);
    p = q;
    axpy(tau, apply_adjoint_operator(q, m.frames[n], m.step_controls[n]), p);
    seed(n, p);
    require(p.all_finite(), ErrorKind::diverged, "non-finite adjoint state");
    rev.push_back(make_entry(tau, m.times[n] + 0.5 * tau, m.times[n], n, std::move(q), m.frames[n]));
  }
  out.entries.assign(std::make_move_iterator(rev.rbegin()), std::make_move_iterator(rev.rend()));
}

void solve_continuous(const StateTrajectory& m, const HittingPoint& hp, AdjointTrajectory& out) {
  const double t_hit = hp.time();
  std::size_t n = std::min(hp.hit.interval, m.steps() - 1);
  while (n > 0 && m.times[n] >= t_hit) --n;
  std::vector<double> nodes(m.times.begin(), m.times.begin() + static_cast<std::ptrdiff_t>(n) + 1);
  if (t_hit > nodes.back()) nodes.push_back(t_hit);
  const std::size_t count = nodes.size();
  auto state_at = [&](std::size_t j) { return j <= n && nodes[j] == m.times[j] ? m.frames[j] : m.linear_at(nodes[j]); };
  auto frame_index = [&](std::size_t j) { return j <= n ? j : AdjointEntry::off_grid; };

  std::vector<VectorField> phi(count);
  phi[count - 1] = out.phi_T;
  for (std::size_t j = count - 1; j-- > 0;) {
    const double tau = nodes[j + 1] - nodes[j];
    const VectorField u = m.control.sample(0.5 * (nodes[j] + nodes[j + 1]));
    VectorField rhs = phi[j + 1];
    axpy(tau, apply_adjoint_operator(phi[j + 1], state_at(j + 1), u), rhs);
    require(rhs.all_finite(), ErrorKind::diverged, "non-finite adjoint state");
    phi[j] = solve_shifted_laplacian(rhs, 1.0, tau, m.config.cg_tol);
  }
  out.entries.reserve(count);
  for (std::size_t j = 0; j < count; ++j) {
    double w = 0.0;
    if (j > 0) w += 0.5 * (nodes[j] - nodes[j - 1]);
    if (j + 1 < count) w += 0.5 * (nodes[j + 1] - nodes[j]);
    out.entries.push_back(make_entry(w, nodes[j], nodes[j], frame_index(j), std::move(phi[j]), state_at(j)));
  }
}

}  // namespace

AdjointTrajectory solve_adjoint(const StateTrajectory& m, const HittingPoint& hp, const VectorField& phi_T,
                                double lambda) {
  require(phi_T.grid() == m.grid(), ErrorKind::grid_mismatch, "terminal adjoint on a different grid");
  require(hp.hit.stencil.size() >= 2 && hp.hit.stencil.back() < m.frames.size(), ErrorKind::invalid_argument,
          "hitting point does not belong to this trajectory");
  AdjointTrajectory out;
  out.mode = hp.mode;
  out.t_hit = hp.time();
  out.lambda = lambda;
  out.phi_T = phi_T;
  out.check = check_transversality(hp.residual, hp.m_t, hp.time());
  if (hp.mode == AdjointMode::discrete) {
    solve_discrete(m, hp, out);
  } else {
    solve_continuous(m, hp, out);
  }
  return out;
}

AdjointTrajectory solve_adjoint(const StateTrajectory& m, const HittingPoint& hp, double rel_eps) {
  const TerminalCondition tc = terminal_condition(hp, rel_eps);
  AdjointTrajectory out = solve_adjoint(m, hp, tc.phi_T, tc.lambda);
  out.check = tc.check;
  return out;
}

double source_pairing(const AdjointTrajectory& phi, const ControlTrajectory& h) {
  double sum = 0.0;
  for (const auto& e : phi.entries) sum += e.weight * l2_inner(e.psi, h.sample(e.control_time));
  return sum;
}

double duality_residual(const LinearizedTrajectory& z, const AdjointTrajectory& phi, const StateTrajectory& m,
                        const HittingPoint& hp) {
  require(std::abs(phi.t_hit - hp.time()) <= 1e-14 * std::max(1.0, hp.time()) && phi.mode == hp.mode,
          ErrorKind::invalid_argument, "adjoint and hitting point describe different windows");
  const double terminal = l2_inner(value_at_hit(z.frames, m, hp), phi.phi_T);
  const double source = source_pairing(phi, z.direction);
  const double scale = std::max(std::abs(terminal), std::abs(source));
  if (scale == 0.0) return 0.0;
  return std::abs(terminal - source) / scale;
}

VectorField frame_at_entry(const std::vector<VectorField>& frames, const StateTrajectory& m, const AdjointEntry& e) {
  if (e.frame != AdjointEntry::off_grid) return frames.at(e.frame);
  const std::size_t n = m.interval_of(e.state_time);
  const double theta = std::clamp((e.state_time - m.times[n]) / m.step(n), 0.0, 1.0);
  VectorField out = (1.0 - theta) * frames[n];
  axpy(theta, frames[n + 1], out);
  return out;
}

}  // namespace llbtoc
