#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "llbtoc/sensitivity.hpp"

namespace llbtoc {

struct TransversalityCheck {
  double numerator = 0.0;    // T̃
  double denominator = 0.0;  // (m̃(T̃) − m_Ω, m̃_t(T̃))
  double epsilon = 0.0;      // rel_eps·‖m̃(T̃) − m_Ω‖·‖m̃_t(T̃)‖
  bool pass = false;
};

struct TerminalCondition {
  VectorField phi_T;
  double lambda = 0.0;
  TransversalityCheck check;
};

TransversalityCheck check_transversality(const VectorField& residual, const VectorField& m_t, double t_hit,
                                         double rel_eps = 1e-8);

/// λ = T̃ / (r, m_t), φ_T = −λ r with r = m̃(T̃) − m_Ω. Throws transversality_violation unless
/// (r, m_t) < −ε.
TerminalCondition terminal_condition(const VectorField& residual, const VectorField& m_t, double t_hit,
                                     double rel_eps = 1e-8);
TerminalCondition terminal_condition(const HittingPoint& hp, double rel_eps = 1e-8);

/// Δm×p + Δ(p×m) + u×p − (1+|m|²)p − 2(m·p)m, the L²-transpose of linearized_rhs(·; m, u).
VectorField apply_adjoint_operator(const VectorField& p, const VectorField& m, const VectorField& u);

/// One quadrature node of the space-time pairing ∫∫(φ + φ×m̃)·h ≈ Σ weight·(psi, h(control_time)).
struct AdjointEntry {
  static constexpr std::size_t off_grid = std::numeric_limits<std::size_t>::max();
  double weight = 0.0;
  double control_time = 0.0;
  double state_time = 0.0;
  /// Index of the state frame at state_time, or off_grid when state_time = T̃ lies between frames.
  std::size_t frame = off_grid;
  VectorField dual;
  /// dual + dual × m̃(state_time)
  VectorField psi;
};

/// Backward solution on [0, T̃].
///  discrete   — exact transpose of the linearized stepper with the terminal pairing placed on the
///               cubic hit stencil; entries are per step (weight τₙ, midpoint control time, frame n).
///  continuous — semi-implicit backward march of the adjoint equation on t₀ … t_n, T̃ with
///               trapezoid entries.
struct AdjointTrajectory {
  AdjointMode mode = AdjointMode::discrete;
  double t_hit = 0.0;
  double lambda = 0.0;
  VectorField phi_T;
  TransversalityCheck check;
  std::vector<AdjointEntry> entries;
};

AdjointTrajectory solve_adjoint(const StateTrajectory& m, const HittingPoint& hp, const VectorField& phi_T,
                                double lambda = 0.0);
/// Computes the terminal condition first.
AdjointTrajectory solve_adjoint(const StateTrajectory& m, const HittingPoint& hp, double rel_eps = 1e-8);

/// Σ_e weight_e (psi_e, h(control_time_e)).
double source_pairing(const AdjointTrajectory& phi, const ControlTrajectory& h);

/// |(z(T̃), φ_T) − Σ weight·(psi, h)| / max(|·|, |·|), with 0/0 read as 0.
double duality_residual(const LinearizedTrajectory& z, const AdjointTrajectory& phi, const StateTrajectory& m,
                        const HittingPoint& hp);

/// State-type frame sequence evaluated at an entry's state time (linear interpolation when off grid).
VectorField frame_at_entry(const std::vector<VectorField>& frames, const StateTrajectory& m, const AdjointEntry& e);

}  // namespace llbtoc
