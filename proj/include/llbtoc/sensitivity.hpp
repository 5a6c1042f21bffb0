#pragma once

#include <vector>

#include "llbtoc/control.hpp"
#include "llbtoc/forward.hpp"

namespace llbtoc {

/// z⁰…z^K on the state trajectory's time nodes, for direction h.
struct LinearizedTrajectory {
  std::vector<VectorField> frames;
  ControlTrajectory direction;
  /// h sampled at the step midpoints, as seen by the forward stepper.
  std::vector<VectorField> step_directions;
};

struct SecondVariationTrajectory {
  std::vector<VectorField> frames;
};

/// −z×Δm − m×Δz − z×u + 2(m·z)m + (1+|m|²)z.
VectorField apply_linearized_operator(const VectorField& z, const VectorField& m, const VectorField& u);

/// The same tail with reversed sign, i.e. the derivative of N(·, u) at m applied to z.
VectorField linearized_rhs(const VectorField& z, const VectorField& m, const VectorField& u);

/// 2z×Δz + 2z×h − 4(z·m)z − 2|z|²m.
VectorField second_variation_source(const VectorField& z, const VectorField& m, const VectorField& h);

/// Marches (I − τΔ) z⁺ = z + τ(linearized_rhs(z; mⁿ, uⁿ) + hⁿ + mⁿ×hⁿ), z⁰ = 0, with the forward
/// run's steps, frames and midpoint sampling.
LinearizedTrajectory solve_linearized(const StateTrajectory& m, const ControlTrajectory& h);

/// Same splitting with source second_variation_source(zⁿ, mⁿ, hⁿ), ξ⁰ = 0.
SecondVariationTrajectory solve_second_variation(const StateTrajectory& m, const LinearizedTrajectory& z);

struct TemporalDerivatives {
  VectorField m_t;
  VectorField m_tt;
};

/// m_t = Δm + N(m, u) and its time derivative, evaluated on the linearly interpolated frame at t
/// with u and u_t taken from the control.
TemporalDerivatives temporal_derivatives(const StateTrajectory& m, double t);

/// z_t = Δz + linearized_rhs(z; m, u) + h + m×h at t (linear interpolation of all frames).
VectorField z_t_at(const LinearizedTrajectory& z, const StateTrajectory& m, double t);

/// How quantities at the hitting time are evaluated.
///  discrete   — value, rate and curvature of the same local cubic interpolant that defines T̃; these
///               are the exact derivatives of the computed hitting time.
///  continuous — linear interpolation of frames and rates from the differential equations.
enum class AdjointMode { discrete, continuous };

struct HittingPoint {
  AdjointMode mode = AdjointMode::discrete;
  HitResult hit;
  VectorField m;
  /// m̃(T̃) − m_Ω
  VectorField residual;
  VectorField m_t;
  VectorField m_tt;
  double time() const noexcept { return hit.time; }
  /// (m̃(T̃) − m_Ω, m̃_t(T̃))_{L²}
  double denominator() const { return l2_inner(residual, m_t); }
};

HittingPoint hitting_point(const StateTrajectory& m, const TargetSpec& target, AdjointMode mode = AdjointMode::discrete);
HittingPoint hitting_point(const StateTrajectory& m, const TargetSpec& target, const HitResult& hit,
                           AdjointMode mode = AdjointMode::discrete);

/// Value of a per-frame sequence (z or ξ) at T̃ in the hitting point's mode.
VectorField value_at_hit(const std::vector<VectorField>& frames, const StateTrajectory& m, const HittingPoint& hp);

/// z_t(T̃): interpolant rate (discrete) or z_t_at (continuous).
VectorField rate_at_hit(const LinearizedTrajectory& z, const StateTrajectory& m, const HittingPoint& hp);

}  // namespace llbtoc
