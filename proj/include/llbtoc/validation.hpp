#pragma once

#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "llbtoc/objective.hpp"

namespace llbtoc {

// ---- closed-form constant-field solution ----

/// s(t) = |m(t)|² for a spatially constant state with u = 0 and s(0) = s0:
/// s(t) = a e^{−2t}/(1 − a e^{−2t}), a = s0/(1+s0).
double radial_oracle(double s0, double t);

/// Time at which s(t) = s. Throws out_of_range unless 0 < s ≤ s0.
double radial_oracle_inverse(double s0, double s);

// ---- 1D cosine Galerkin solver ----

struct SpectralConfig {
  /// Modes cos(jπx/L), j = 0…modes−1.
  int modes = 32;
  double length = 1.0;
  double dt = 1e-4;
  /// Quadrature on 2·modes midpoints when set, on `modes` otherwise.
  bool dealias = true;
  /// Explicit quadrature size; 0 keeps the default above.
  int quadrature_points = 0;
};

using InitialProfile = std::function<Vec3(double x)>;
using ControlProfile = std::function<Vec3(double t, double x)>;

/// Integrating-factor RK4 march of the Galerkin system on [0, T], with the step sequence of the
/// finite-difference solver (K = ceil(T/dt), short last step). Nonlinear terms are projected by
/// midpoint quadrature. Frames are sampled at the grid's cell centres; `control` of the result is
/// left empty.
/// Throws grid_mismatch unless grid.dim == 1 and the lengths agree, invalid_argument for
/// modes < 2, L ≤ 0, T ≤ 0 or dt ≤ 0, and out_of_range when modes exceed the quadrature size.
StateTrajectory spectral_simulate_1d(const Grid& grid, const InitialProfile& m0, const ControlProfile& u, double T,
                                     const SpectralConfig& config);

/// Same, with m0 and each control frame read as the cosine interpolant of their cell values.
StateTrajectory spectral_simulate_1d(const VectorField& m0, const ControlTrajectory& u, double T,
                                     const SpectralConfig& config);

// ---- Taylor remainder sweeps ----

enum class SweepKind { state1, state2, time1, time2, gradient };

const char* to_string(SweepKind kind) noexcept;
/// Throws parse for an unknown name.
SweepKind parse_sweep_kind(const std::string& name);
/// Expected log-log slope: 2, 3, 2, 3, 2.
double expected_order(SweepKind kind) noexcept;

struct SweepReport {
  SweepKind kind = SweepKind::gradient;
  std::vector<double> rho;
  std::vector<double> residual;
  /// Sweep points dropped because the perturbed control missed the tube.
  std::vector<double> excluded;
  double slope = 0.0;
  double expected = 0.0;
  bool pass = false;
  /// Every residual was exactly zero (h = 0); the sweep passes trivially.
  bool exact = false;
};

struct SweepOptions {
  /// Sign applied to G in the time2 remainder; −1 is a mutation check of the sweep itself.
  double curvature_sign = 1.0;
  double slope_tolerance = 0.2;
};

/// ρ = ρ_max·2^{−k}, k = 0…count−1.
std::vector<double> default_rho(double rho_max = 1e-1, int count = 8);

/// Remainders per kind:
///   state1   max_n ‖m_ρ − m̃ − ρz‖
///   state2   max_n ‖m_ρ − m̃ − ρz − ½ρ²ξ‖
///   time1    |T_ρ − T̃ − ρD|
///   time2    |T_ρ − T̃ − ρD − ρ²G|
///   gradient |J(u+ρh) − J(u) − ρY(h)|
/// The slope is a least-squares fit of log residual against log ρ over the included points, with
/// both endpoints dropped when at least five remain. ρ must be strictly decreasing and positive.
SweepReport taylor_sweep(SweepKind kind, const Problem& problem, const ControlTrajectory& u,
                         const ControlTrajectory& h, const std::vector<double>& rho, const SweepOptions& options = {});

/// Least-squares slope of log y against log x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Columns rho,residual.
std::string sweep_csv(const SweepReport& report);
nlohmann::json to_json(const SweepReport& report);

}  // namespace llbtoc
