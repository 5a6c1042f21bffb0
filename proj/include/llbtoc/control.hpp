#pragma once

#include <utility>
#include <vector>

#include "llbtoc/field.hpp"
#include "llbtoc/metric.hpp"

namespace llbtoc {

/// Piecewise-linear control u(t, x) given by frames on time nodes 0 = t₀ < … < t_K = T.
class ControlTrajectory {
 public:
  ControlTrajectory() = default;
  ControlTrajectory(std::vector<double> times, std::vector<VectorField> frames);

  /// All-zero control on the given nodes.
  static ControlTrajectory zeros(const Grid& grid, std::vector<double> times);
  /// n+1 equispaced nodes on [0, horizon], every frame the constant `c`.
  static ControlTrajectory constant(const Grid& grid, double horizon, int intervals, Vec3 c = {});

  const Grid& grid() const noexcept { return frames_.front().grid(); }
  const std::vector<double>& times() const noexcept { return times_; }
  const std::vector<VectorField>& frames() const noexcept { return frames_; }
  std::vector<VectorField>& frames() noexcept { return frames_; }
  std::size_t node_count() const noexcept { return times_.size(); }
  double horizon() const noexcept { return times_.back(); }

  /// Linear interpolation in time; clamped to the end frames outside [0, T].
  VectorField sample(double t) const;
  /// Nonzero hat-function weights at t as (node, weight) pairs, at most two.
  std::vector<std::pair<std::size_t, double>> basis_weights(double t) const;
  /// Piecewise-constant time derivative: forward difference of the interval containing t
  /// (the last interval for t ≥ T).
  VectorField slope(double t) const;
  /// Trapezoid weights of the node grid.
  std::vector<double> trapezoid_weights() const;

  bool same_nodes(const ControlTrajectory& o) const noexcept;

  ControlTrajectory& operator+=(const ControlTrajectory& o);
  ControlTrajectory& operator-=(const ControlTrajectory& o);
  ControlTrajectory& operator*=(double s) noexcept;

 private:
  std::vector<double> times_;
  std::vector<VectorField> frames_;
};

ControlTrajectory operator+(ControlTrajectory a, const ControlTrajectory& b);
ControlTrajectory operator-(ControlTrajectory a, const ControlTrajectory& b);
ControlTrajectory operator*(double s, ControlTrajectory a);
void axpy(double alpha, const ControlTrajectory& x, ControlTrajectory& y);

/// Throws grid_mismatch / invalid_argument unless a and b share grid and nodes.
void require_same_nodes(const ControlTrajectory& a, const ControlTrajectory& b);

/// ((u, v)) = Σ_k w_k (u_k, A v_k) + Σ_i Δs_i (D_i u, A⁻¹ D_i v), D_i the forward difference
/// quotient on interval i, w_k trapezoid weights.
double inner_U(const ControlTrajectory& u, const ControlTrajectory& v, const SobolevMetric& metric);
double norm_U(const ControlTrajectory& u, const SobolevMetric& metric);

/// Σ_k (u_k, v_k)_{L²}, the frame-wise Euclidean pairing against which the Gram operator is symmetric.
double frame_inner(const ControlTrajectory& u, const ControlTrajectory& v);

/// The operator M with frame_inner(u, M v) = inner_U(u, v).
ControlTrajectory apply_gram(const ControlTrajectory& v, const SobolevMetric& metric);

/// Solves M x = b by preconditioned CG; the preconditioner diagonalises A by a cosine transform and
/// solves the resulting tridiagonal time systems exactly per spatial mode.
ControlTrajectory solve_gram(const ControlTrajectory& b, const SobolevMetric& metric, double rtol = 1e-12,
                             CgStats* stats = nullptr);

}  // namespace llbtoc
