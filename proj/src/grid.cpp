#include "llbtoc/grid.hpp"

#include <string>

#include "llbtoc/error.hpp"

namespace llbtoc {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::grid_mismatch: return "grid-mismatch";
    case ErrorKind::out_of_range: return "out-of-range";
    case ErrorKind::non_convergence: return "non-convergence";
    case ErrorKind::diverged: return "diverged";
    case ErrorKind::trivial_case: return "trivial-case";
    case ErrorKind::target_unreachable: return "target-unreachable";
    case ErrorKind::transversality_violation: return "transversality-violation";
    case ErrorKind::initial_control_misses_tube: return "initial-control-misses-tube";
    case ErrorKind::line_search_failure: return "line-search-failure";
    case ErrorKind::parse: return "parse";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

Grid make_grid(int dim, std::span<const int> cells_per_axis, std::span<const double> extent_per_axis) {
  require(dim >= 1 && dim <= 3, ErrorKind::invalid_argument, "invalid-dimension: dim must be 1, 2 or 3");
  require(cells_per_axis.size() == static_cast<std::size_t>(dim) &&
              extent_per_axis.size() == static_cast<std::size_t>(dim),
          ErrorKind::invalid_argument, "invalid-dimension: need one cell count and one extent per axis");
  Grid g;
  g.dim = dim;
  for (int a = 0; a < dim; ++a) {
    require(cells_per_axis[a] >= 2, ErrorKind::invalid_argument,
            "invalid-cells: axis " + std::to_string(a) + " needs at least 2 cells");
    require(extent_per_axis[a] > 0.0, ErrorKind::invalid_argument,
            "non-positive extent on axis " + std::to_string(a));
    g.cells[a] = cells_per_axis[a];
    g.extent[a] = extent_per_axis[a];
    g.spacing[a] = extent_per_axis[a] / cells_per_axis[a];
  }
  return g;
}

}  // namespace llbtoc
