#pragma once

#include "llbtoc/adjoint.hpp"
#include "llbtoc/metric.hpp"

namespace llbtoc {

/// Everything needed to evaluate J(u) = ½T*(u)² + ½‖u‖²_𝒰.
struct Problem {
  VectorField m0;
  TargetSpec target;
  SolverConfig solver;
  SobolevMetric metric;
  AdjointMode mode = AdjointMode::discrete;
  /// Relative transversality guard ε = rel_eps·‖r‖·‖m_t‖.
  double transversality_eps = 1e-8;
  /// Relative tolerance of the space-time Gram solve in the Riesz gradient.
  double gram_tol = 1e-12;

  Problem(VectorField m0_, TargetSpec target_, SolverConfig solver_)
      : m0(std::move(m0_)), target(std::move(target_)), solver(solver_), metric(m0.grid()) {}
};

struct CostBreakdown {
  double t_star = 0.0;
  double time_term = 0.0;
  double control_term = 0.0;
  double total = 0.0;
};

/// Forward solve, hitting point and cost for one control.
struct Evaluation {
  StateTrajectory state;
  HittingPoint hp;
  CostBreakdown cost;
};

/// Throws target_unreachable when the run never enters the tube.
Evaluation evaluate(const ControlTrajectory& u, const Problem& problem);
CostBreakdown cost(const ControlTrajectory& u, const Problem& problem);

/// Y(h) = ∫∫(φ + φ×m̃)·h + ((ũ, h))_𝒰.
double first_order_Y(const ControlTrajectory& h, const AdjointTrajectory& phi, const ControlTrajectory& u,
                     const SobolevMetric& metric);

/// g = ũ + g₀ with ((g₀, h))_𝒰 = ∫∫(φ + φ×m̃)·h for every h on ũ's nodes.
ControlTrajectory riesz_gradient(const AdjointTrajectory& phi, const ControlTrajectory& u, const SobolevMetric& metric,
                                 double rtol = 1e-12, CgStats* stats = nullptr);

/// Adjoint load b with frame_inner(b, h) = Σ weight·(psi, h(control_time)).
ControlTrajectory adjoint_load(const AdjointTrajectory& phi, const ControlTrajectory& shape);

/// D = −(z(T̃), r) / (r, m_t). Throws transversality_violation when the crossing is not transversal.
double hitting_time_derivative_D(const VectorField& z_hit, const HittingPoint& hp, double rel_eps = 1e-8);
double hitting_time_derivative_D(const LinearizedTrajectory& z, const StateTrajectory& m, const HittingPoint& hp,
                                 double rel_eps = 1e-8);

/// ∫∫(z×Δz + z×h − 2(z·m̃)z − |z|²m̃)·φ on the adjoint's quadrature.
double phi_weighted_quadratic(const LinearizedTrajectory& z, const AdjointTrajectory& phi, const StateTrajectory& m);

struct CurvatureTerms {
  double D = 0.0;
  double denominator = 0.0;
  /// ½‖m_t D + z(T̃)‖²
  double norm_term = 0.0;
  /// (½ m_tt D² + z_t D, r)
  double rate_term = 0.0;
  /// ∫∫ X·φ
  double phi_integral = 0.0;
  double G = 0.0;
};

/// G·(r, m_t) = −½‖m_t D + z‖² − (½m_tt D² + z_t D, r) + ((r, m_t)/T̃)·∫∫X·φ.
CurvatureTerms curvature_G(const LinearizedTrajectory& z, const StateTrajectory& m, const HittingPoint& hp,
                           const AdjointTrajectory& phi, double rel_eps = 1e-8);

/// The same curvature with the φ-integral replaced by its state-side value −½(ξ(T̃), r).
double curvature_G_xi(const LinearizedTrajectory& z, const SecondVariationTrajectory& xi, const StateTrajectory& m,
                      const HittingPoint& hp, double rel_eps = 1e-8);

/// Q = D² + 2T̃·G + ‖h‖²_𝒰.
double quadratic_Q(double D, double G, double t_hit, double h_norm2);

}  // namespace llbtoc
