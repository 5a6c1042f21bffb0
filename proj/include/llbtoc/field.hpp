#pragma once

#include <functional>
#include <span>
#include <vector>

#include "llbtoc/grid.hpp"
#include "llbtoc/vec3.hpp"

namespace llbtoc {

/// One R³ vector per cell centre of a Grid.
class VectorField {
 public:
  VectorField() = default;
  explicit VectorField(const Grid& grid, Vec3 constant = {});
  /// Validates the value count and that all components are finite.
  VectorField(const Grid& grid, std::vector<Vec3> values);

  /// Samples f at every cell centre.
  static VectorField from_function(const Grid& grid, const std::function<Vec3(const std::array<double, 3>&)>& f);

  const Grid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<const Vec3> values() const noexcept { return values_; }
  std::span<Vec3> values() noexcept { return values_; }
  const Vec3& operator[](std::size_t i) const noexcept { return values_[i]; }
  Vec3& operator[](std::size_t i) noexcept { return values_[i]; }

  bool all_finite() const noexcept;
  void set_zero() noexcept;

  VectorField& operator+=(const VectorField& o);
  VectorField& operator-=(const VectorField& o);
  VectorField& operator*=(double s) noexcept;

  friend bool operator==(const VectorField& a, const VectorField& b) {
    return a.grid_ == b.grid_ && a.values_ == b.values_;
  }

 private:
  Grid grid_{};
  std::vector<Vec3> values_;
};

VectorField operator+(VectorField a, const VectorField& b);
VectorField operator-(VectorField a, const VectorField& b);
VectorField operator*(double s, VectorField a);

/// y += alpha * x
void axpy(double alpha, const VectorField& x, VectorField& y);

/// Throws grid_mismatch unless a and b live on the same grid.
void require_same_grid(const VectorField& a, const VectorField& b);

/// Pointwise a × b.
VectorField cross_field(const VectorField& a, const VectorField& b);

/// Cell-centred second-order Laplacian with mirror ghost cells (∂f/∂η = 0).
VectorField laplacian(const VectorField& f);

enum class InnerKind { L2, H1, H2eq };

/// Cell-volume weighted pairings. H1 adds the face-difference gradient term; H2eq
/// pairs L² plus Laplacians (the equivalent norm ‖·‖² + ‖Δ·‖²).
double inner_product(const VectorField& a, const VectorField& b, InnerKind kind = InnerKind::L2);
double l2_inner(const VectorField& a, const VectorField& b);
double l2_norm(const VectorField& a);
double linf_norm(const VectorField& a);
/// Σ over interior faces of (difference quotient of a)·(difference quotient of b) × cell volume.
/// Equals −(a, Δb)_{L²} exactly for the mirror-ghost Laplacian.
double gradient_inner(const VectorField& a, const VectorField& b);

}  // namespace llbtoc
