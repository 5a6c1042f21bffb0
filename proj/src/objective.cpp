#include "llbtoc/objective.hpp"

#include <cmath>
#include <string>

#include "llbtoc/error.hpp"

namespace llbtoc {

Evaluation evaluate(const ControlTrajectory& u, const Problem& problem) {
  Evaluation ev;
  ev.state = simulate(problem.m0, u, problem.solver);
  ev.hp = hitting_point(ev.state, problem.target, problem.mode);
  ev.cost.t_star = ev.hp.time();
  ev.cost.time_term = 0.5 * ev.cost.t_star * ev.cost.t_star;
  const double un = norm_U(u, problem.metric);
  ev.cost.control_term = 0.5 * un * un;
  ev.cost.total = ev.cost.time_term + ev.cost.control_term;
  return ev;
}

CostBreakdown cost(const ControlTrajectory& u, const Problem& problem) { return evaluate(u, problem).cost; }

double first_order_Y(const ControlTrajectory& h, const AdjointTrajectory& phi, const ControlTrajectory& u,
                     const SobolevMetric& metric) {
  return source_pairing(phi, h) + inner_U(u, h, metric);
}

ControlTrajectory adjoint_load(const AdjointTrajectory& phi, const ControlTrajectory& shape) {
  ControlTrajectory b = ControlTrajectory::zeros(shape.grid(), shape.times());
  for (const auto& e : phi.entries)
    for (const auto& [k, w] : shape.basis_weights(e.control_time)) axpy(e.weight * w, e.psi, b.frames()[k]);
  return b;
}

ControlTrajectory riesz_gradient(const AdjointTrajectory& phi, const ControlTrajectory& u, const SobolevMetric& metric,
                                 double rtol, CgStats* stats) {
  ControlTrajectory g = solve_gram(adjoint_load(phi, u), metric, rtol, stats);
  g += u;
  return g;
}

namespace {

double guarded_denominator(const HittingPoint& hp, double rel_eps) {
  const auto check = check_transversality(hp.residual, hp.m_t, hp.time(), rel_eps);
  if (!check.pass) {
    fail(ErrorKind::transversality_violation,
         "hitting-time derivatives need a transversal crossing; (r, m_t) = " + std::to_string(check.denominator));
  }
  return check.denominator;
}

}  // namespace

double hitting_time_derivative_D(const VectorField& z_hit, const HittingPoint& hp, double rel_eps) {
  return -l2_inner(z_hit, hp.residual) / guarded_denominator(hp, rel_eps);
}

double hitting_time_derivative_D(const LinearizedTrajectory& z, const StateTrajectory& m, const HittingPoint& hp,
                                 double rel_eps) {
  return hitting_time_derivative_D(value_at_hit(z.frames, m, hp), hp, rel_eps);
}

double phi_weighted_quadratic(const LinearizedTrajectory& z, const AdjointTrajectory& phi, const StateTrajectory& m) {
  double sum = 0.0;
  for (const auto& e : phi.entries) {
    const VectorField ze = frame_at_entry(z.frames, m, e);
    if (linf_norm(ze) == 0.0) continue;
    const VectorField me = frame_at_entry(m.frames, m, e);
    const VectorField x = 0.5 * second_variation_source(ze, me, z.direction.sample(e.control_time));
    sum += e.weight * l2_inner(x, e.dual);
  }
  return sum;
}

namespace {

CurvatureTerms state_side_terms(const LinearizedTrajectory& z, const StateTrajectory& m, const HittingPoint& hp,
                                double rel_eps) {
  CurvatureTerms c;
  c.denominator = guarded_denominator(hp, rel_eps);
  const VectorField z_hit = value_at_hit(z.frames, m, hp);
  c.D = -l2_inner(z_hit, hp.residual) / c.denominator;
  VectorField v = c.D * hp.m_t;
  v += z_hit;
  c.norm_term = 0.5 * l2_inner(v, v);
  VectorField w = (0.5 * c.D * c.D) * hp.m_tt;
  axpy(c.D, rate_at_hit(z, m, hp), w);
  c.rate_term = l2_inner(w, hp.residual);
  return c;
}

}  // namespace

CurvatureTerms curvature_G(const LinearizedTrajectory& z, const StateTrajectory& m, const HittingPoint& hp,
                           const AdjointTrajectory& phi, double rel_eps) {
  CurvatureTerms c = state_side_terms(z, m, hp, rel_eps);
  c.phi_integral = phi_weighted_quadratic(z, phi, m);
  const double t_hit = hp.time();
  c.G = (-c.norm_term - c.rate_term + (c.denominator / t_hit) * c.phi_integral) / c.denominator;
  return c;
}

double curvature_G_xi(const LinearizedTrajectory& z, const SecondVariationTrajectory& xi, const StateTrajectory& m,
                      const HittingPoint& hp, double rel_eps) {
  const CurvatureTerms c = state_side_terms(z, m, hp, rel_eps);
  const double xi_r = l2_inner(value_at_hit(xi.frames, m, hp), hp.residual);
  return (-c.norm_term - c.rate_term - 0.5 * xi_r) / c.denominator;
}

double quadratic_Q(double D, double G, double t_hit, double h_norm2) { return D * D + 2.0 * t_hit * G + h_norm2; }

}  // namespace llbtoc
