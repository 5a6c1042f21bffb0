#pragma once

#include <filesystem>
#include <limits>
#include <optional>
#include <vector>

#include "llbtoc/control.hpp"
#include "llbtoc/field.hpp"
#include "llbtoc/time_stencil.hpp"

namespace llbtoc {

struct SolverConfig {
  double dt = 1e-3;
  double horizon = 1.0;
  /// Relative residual of the implicit diffusion solves.
  double cg_tol = 1e-13;
  /// ‖m‖_{L∞} above this aborts the run with `diverged`.
  double blowup_cap = 1e6;
};

struct TargetSpec {
  VectorField m_omega;
  double delta = 0.0;
};

/// Forward solution m⁰…m^K on times t₀ = 0 < … < t_K = T together with the control values
/// used in each step.
struct StateTrajectory {
  std::vector<double> times;
  std::vector<VectorField> frames;
  /// u sampled at the midpoint of step n, n = 0…K−1.
  std::vector<VectorField> step_controls;
  ControlTrajectory control;
  SolverConfig config;

  const Grid& grid() const { return frames.front().grid(); }
  std::size_t steps() const noexcept { return times.size() - 1; }
  double step(std::size_t n) const { return times[n + 1] - times[n]; }
  double final_time() const noexcept { return times.back(); }
  /// Index n of the step [t_n, t_{n+1}] containing t (clamped to the first/last step).
  std::size_t interval_of(double t) const;
  /// Piecewise-linear interpolation of the frames.
  VectorField linear_at(double t) const;
};

/// N(m, u) = m×Δm + m×u − (1+|m|²)m + u.
VectorField llb_rhs(const VectorField& m, const VectorField& u);

/// One step of (I − Δt·Δ_h) m⁺ = m + Δt·N(m, u).
VectorField step_semi_implicit(const VectorField& m, const VectorField& u, double dt, double cg_tol = 1e-13);

/// K = ceil(T/Δt) steps on [0, config.horizon]; the last step may be short.
std::vector<double> step_times(double horizon, double dt);

StateTrajectory simulate(const VectorField& m0, const ControlTrajectory& u, const SolverConfig& config);

/// First entry into the δ-tube. The squared distance is represented on the bracketing step by the
/// local cubic interpolant through four neighbouring frames (fewer if the run is shorter).
struct HitResult {
  double time = 0.0;
  std::size_t interval = 0;
  double distance = 0.0;
  std::vector<std::size_t> stencil;
  LagrangeWeights weights;
};

/// Throws trivial_case when ‖m₀ − m_Ω‖ ≤ δ, invalid_argument for δ ≤ 0 or a foreign grid.
std::optional<HitResult> hitting_time(const StateTrajectory& traj, const TargetSpec& target);

/// Same as above but requires a hit (target_unreachable otherwise).
HitResult require_hit(const StateTrajectory& traj, const TargetSpec& target);

double distance_to_target(const VectorField& m, const TargetSpec& target);

struct EnergyOptions {
  /// The generic constant of the smallness factor; not computable, supplied by the user.
  double constant = 1.0;
  double threshold = std::numeric_limits<double>::infinity();
};

struct EnergyReport {
  /// sup_t ‖m‖²_{H²eq} = sup_t (‖m‖² + ‖Δm‖²).
  double sup_h2eq = 0.0;
  /// ∫₀^T (‖m‖² + ‖∇Δm‖²) dt (trapezoid).
  double int_h3eq = 0.0;
  std::vector<double> h2eq_history;
  /// M ≈ P·exp(C·E1·exp(C·E2)), P = ‖m₀‖²_{H²eq} + ‖u‖²_{L²H¹}, E1 = (1 + ‖m₀‖²_{H¹} + ‖u‖²_{L²L²})²,
  /// E2 = ‖u‖²_{L²H¹}.
  double prefactor = 0.0;
  double e1 = 0.0;
  double e2 = 0.0;
  double m_proxy = 0.0;
  bool smallness_exceeded = false;
};

EnergyReport energy_diagnostics(const StateTrajectory& traj, const ControlTrajectory& u,
                                const EnergyOptions& options = {});

/// CSV columns: t, dist_to_target_L2, norm_H2eq.
void write_trajectory_csv(const std::filesystem::path& path, const StateTrajectory& traj, const TargetSpec& target);

}  // namespace llbtoc
