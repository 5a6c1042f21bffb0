#include "llbtoc/metric.hpp"

#include <cmath>
#include <numbers>

#include "llbtoc/error.hpp"

namespace llbtoc {

VectorField solve_shifted_laplacian(const VectorField& f, double shift, double diffusion, double rtol,
                                    int max_iter, CgStats* stats) {
  if (max_iter <= 0) max_iter = static_cast<int>(30 * f.size());
  auto apply = [&](const VectorField& x) {
    VectorField y = laplacian(x);
    y *= -diffusion;
    axpy(shift, x, y);
    return y;
  };
  auto dot = [](const VectorField& a, const VectorField& b) { return l2_inner(a, b); };
  VectorField x;
  const CgStats s = conjugate_gradient(apply, f, x, dot, rtol, max_iter);
  if (stats) *stats = s;
  return x;
}

SobolevMetric::SobolevMetric(const Grid& grid, double rtol, int max_iter)
    : grid_(grid), rtol_(rtol), max_iter_(max_iter > 0 ? max_iter : static_cast<int>(10 * 3 * grid.size())) {
  require(rtol > 0.0, ErrorKind::invalid_argument, "linear-solve tolerance must be positive");
}

VectorField SobolevMetric::apply(const VectorField& f) const {
  VectorField y = laplacian(f);
  y *= -1.0;
  y += f;
  return y;
}

VectorField SobolevMetric::solve(const VectorField& f, CgStats* stats) const {
  require(f.grid() == grid_, ErrorKind::grid_mismatch, "metric built on a different grid");
  return solve_shifted_laplacian(f, 1.0, 1.0, rtol_, max_iter_, stats);
}

double SobolevMetric::h1_inner(const VectorField& a, const VectorField& b) const { return l2_inner(a, apply(b)); }

RieszResult riesz_h1dual(const VectorField& f, const SobolevMetric& metric) {
  RieszResult out;
  out.repr = metric.solve(f);
  out.norm = std::sqrt(std::max(0.0, l2_inner(out.repr, f)));
  return out;
}

NeumannSpectrum::NeumannSpectrum(const Grid& grid) : grid_(grid), matrices_(3), eigenvalues_(grid.size(), 0.0) {
  std::array<std::vector<double>, 3> axis_eigs;
  for (int a = 0; a < 3; ++a) {
    const int n = grid.cells[a];
    auto& m = matrices_[a];
    m.assign(static_cast<std::size_t>(n) * n, 0.0);
    axis_eigs[a].assign(n, 0.0);
    for (int k = 0; k < n; ++k) {
      const double scale = k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
      for (int i = 0; i < n; ++i) m[k * n + i] = scale * std::cos(std::numbers::pi * k * (i + 0.5) / n);
      if (a < grid.dim) {
        const double s = std::sin(std::numbers::pi * k / (2.0 * n));
        axis_eigs[a][k] = 4.0 * s * s / (grid.spacing[a] * grid.spacing[a]);
      }
    }
  }
  for (std::size_t idx = 0; idx < grid.size(); ++idx) {
    const auto mi = grid.multi_index(idx);
    eigenvalues_[idx] = axis_eigs[0][mi[0]] + axis_eigs[1][mi[1]] + axis_eigs[2][mi[2]];
  }
}

VectorField NeumannSpectrum::transform(const VectorField& f, bool transpose) const {
  require(f.grid() == grid_, ErrorKind::grid_mismatch, "spectrum built on a different grid");
  VectorField cur = f;
  for (int a = 0; a < grid_.dim; ++a) {
    const int n = grid_.cells[a];
    std::size_t stride = 1;
    for (int b = 0; b < a; ++b) stride *= static_cast<std::size_t>(grid_.cells[b]);
    const auto& m = matrices_[a];
    VectorField next(grid_);
    for (std::size_t idx = 0; idx < cur.size(); ++idx) {
      const int i = grid_.multi_index(idx)[a];
      if (i != 0) continue;  // idx is the start of a line along axis a
      for (int k = 0; k < n; ++k) {
        Vec3 acc{};
        for (int j = 0; j < n; ++j) {
          const double w = transpose ? m[j * n + k] : m[k * n + j];
          acc += w * cur[idx + j * stride];
        }
        next[idx + k * stride] = acc;
      }
    }
    cur = std::move(next);
  }
  return cur;
}

VectorField NeumannSpectrum::forward(const VectorField& f) const { return transform(f, false); }
VectorField NeumannSpectrum::inverse(const VectorField& coefficients) const { return transform(coefficients, true); }

}  // namespace llbtoc
