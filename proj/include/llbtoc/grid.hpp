#pragma once

#include <array>
#include <cstddef>
#include <span>

namespace llbtoc {

/// Uniform cell-centred mesh of a box Ω = [0,L0]×…×[0,L_{dim-1}].
///
/// Cells are stored with axis 0 fastest: index = i0 + n0*(i1 + n1*i2), i.e. row-major
/// over (i2, i1, i0). Unused axes have one cell and unit extent.
struct Grid {
  int dim = 1;
  std::array<int, 3> cells{1, 1, 1};
  std::array<double, 3> extent{1.0, 1.0, 1.0};
  std::array<double, 3> spacing{1.0, 1.0, 1.0};

  std::size_t size() const noexcept {
    return static_cast<std::size_t>(cells[0]) * static_cast<std::size_t>(cells[1]) *
           static_cast<std::size_t>(cells[2]);
  }
  double cell_volume() const noexcept { return spacing[0] * spacing[1] * spacing[2]; }
  double volume() const noexcept { return extent[0] * extent[1] * extent[2]; }

  std::size_t index(int i0, int i1 = 0, int i2 = 0) const noexcept {
    return static_cast<std::size_t>(i0) +
           static_cast<std::size_t>(cells[0]) *
               (static_cast<std::size_t>(i1) + static_cast<std::size_t>(cells[1]) * static_cast<std::size_t>(i2));
  }
  std::array<int, 3> multi_index(std::size_t idx) const noexcept {
    const auto n0 = static_cast<std::size_t>(cells[0]);
    const auto n1 = static_cast<std::size_t>(cells[1]);
    return {static_cast<int>(idx % n0), static_cast<int>((idx / n0) % n1), static_cast<int>(idx / (n0 * n1))};
  }
  /// Cell centre at (i+½)·spacing along each axis.
  std::array<double, 3> center(std::size_t idx) const noexcept {
    const auto mi = multi_index(idx);
    return {(mi[0] + 0.5) * spacing[0], (mi[1] + 0.5) * spacing[1], (mi[2] + 0.5) * spacing[2]};
  }

  friend bool operator==(const Grid&, const Grid&) = default;
};

/// Throws invalid_argument for dim ∉ {1,2,3}, fewer than two cells on an axis, or a
/// non-positive extent.
Grid make_grid(int dim, std::span<const int> cells_per_axis, std::span<const double> extent_per_axis);

}  // namespace llbtoc
