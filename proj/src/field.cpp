#include "llbtoc/field.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "llbtoc/error.hpp"

namespace llbtoc {

VectorField::VectorField(const Grid& grid, Vec3 constant) : grid_(grid), values_(grid.size(), constant) {}

VectorField::VectorField(const Grid& grid, std::vector<Vec3> values) : grid_(grid), values_(std::move(values)) {
  require(values_.size() == grid_.size(), ErrorKind::invalid_argument,
          "value count " + std::to_string(values_.size()) + " does not match cell count " +
              std::to_string(grid_.size()));
  require(all_finite(), ErrorKind::invalid_argument, "field contains non-finite components");
}

VectorField VectorField::from_function(const Grid& grid,
                                       const std::function<Vec3(const std::array<double, 3>&)>& f) {
  VectorField out(grid);
  for (std::size_t i = 0; i < out.size(); ++i) out.values_[i] = f(grid.center(i));
  require(out.all_finite(), ErrorKind::invalid_argument, "sampled field contains non-finite components");
  return out;
}

bool VectorField::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](const Vec3& v) { return is_finite(v); });
}

void VectorField::set_zero() noexcept { std::fill(values_.begin(), values_.end(), Vec3{}); }

VectorField& VectorField::operator+=(const VectorField& o) {
  require_same_grid(*this, o);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
  return *this;
}

VectorField& VectorField::operator-=(const VectorField& o) {
  require_same_grid(*this, o);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
  return *this;
}

VectorField& VectorField::operator*=(double s) noexcept {
  for (auto& v : values_) v *= s;
  return *this;
}

VectorField operator+(VectorField a, const VectorField& b) { return a += b; }
VectorField operator-(VectorField a, const VectorField& b) { return a -= b; }
VectorField operator*(double s, VectorField a) { return a *= s; }

void axpy(double alpha, const VectorField& x, VectorField& y) {
  require_same_grid(x, y);
  auto xs = x.values();
  auto ys = y.values();
  for (std::size_t i = 0; i < ys.size(); ++i) ys[i] += alpha * xs[i];
}

void require_same_grid(const VectorField& a, const VectorField& b) {
  require(a.grid() == b.grid() && a.size() == b.size(), ErrorKind::grid_mismatch,
          "fields live on different grids");
}

VectorField cross_field(const VectorField& a, const VectorField& b) {
  require_same_grid(a, b);
  VectorField out(a.grid());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = cross(a[i], b[i]);
  return out;
}

namespace {

std::size_t stride(const Grid& g, int axis) {
  std::size_t s = 1;
  for (int a = 0; a < axis; ++a) s *= static_cast<std::size_t>(g.cells[a]);
  return s;
}

}  // namespace

VectorField laplacian(const VectorField& f) {
  const Grid& g = f.grid();
  VectorField out(g);
  for (int axis = 0; axis < g.dim; ++axis) {
    const std::size_t s = stride(g, axis);
    const int n = g.cells[axis];
    const double inv_h2 = 1.0 / (g.spacing[axis] * g.spacing[axis]);
    for (std::size_t idx = 0; idx < f.size(); ++idx) {
      const int i = g.multi_index(idx)[axis];
      const Vec3& c = f[idx];
      const Vec3& l = i > 0 ? f[idx - s] : c;
      const Vec3& r = i < n - 1 ? f[idx + s] : c;
      out[idx] += inv_h2 * (l - 2.0 * c + r);
    }
  }
  return out;
}

double l2_inner(const VectorField& a, const VectorField& b) {
  require_same_grid(a, b);
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += dot(a[i], b[i]);
  return sum * a.grid().cell_volume();
}

double l2_norm(const VectorField& a) { return std::sqrt(std::max(0.0, l2_inner(a, a))); }

double linf_norm(const VectorField& a) {
  double m = 0.0;
  for (const auto& v : a.values()) m = std::max(m, norm(v));
  return m;
}

double gradient_inner(const VectorField& a, const VectorField& b) {
  require_same_grid(a, b);
  const Grid& g = a.grid();
  double sum = 0.0;
  for (int axis = 0; axis < g.dim; ++axis) {
    const std::size_t s = stride(g, axis);
    const int n = g.cells[axis];
    const double inv_h2 = 1.0 / (g.spacing[axis] * g.spacing[axis]);
    double axis_sum = 0.0;
    for (std::size_t idx = 0; idx < a.size(); ++idx) {
      if (g.multi_index(idx)[axis] == n - 1) continue;
      axis_sum += dot(a[idx + s] - a[idx], b[idx + s] - b[idx]);
    }
    sum += axis_sum * inv_h2;
  }
  return sum * g.cell_volume();
}

double inner_product(const VectorField& a, const VectorField& b, InnerKind kind) {
  switch (kind) {
    case InnerKind::L2: return l2_inner(a, b);
    case InnerKind::H1: return l2_inner(a, b) + gradient_inner(a, b);
    case InnerKind::H2eq: return l2_inner(a, b) + l2_inner(laplacian(a), laplacian(b));
  }
  return 0.0;
}

}  // namespace llbtoc
