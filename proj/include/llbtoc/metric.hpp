#pragma once

#include <vector>

#include "llbtoc/cg.hpp"
#include "llbtoc/field.hpp"

namespace llbtoc {

/// Solves (shift·I − diffusion·Δ_h) x = f componentwise by conjugate gradients.
VectorField solve_shifted_laplacian(const VectorField& f, double shift, double diffusion, double rtol,
                                    int max_iter = 0, CgStats* stats = nullptr);

/// The Riesz operator A = −Δ_h + I of H¹ with Neumann closure, plus its CG solver.
class SobolevMetric {
 public:
  explicit SobolevMetric(const Grid& grid, double rtol = 1e-12, int max_iter = 0);

  const Grid& grid() const noexcept { return grid_; }
  double tolerance() const noexcept { return rtol_; }
  /// 10 × unknown count unless set explicitly.
  int iteration_cap() const noexcept { return max_iter_; }

  VectorField apply(const VectorField& f) const;
  VectorField solve(const VectorField& f, CgStats* stats = nullptr) const;
  /// (a, A b)_{L²}, identical to inner_product(a, b, InnerKind::H1).
  double h1_inner(const VectorField& a, const VectorField& b) const;

 private:
  Grid grid_;
  double rtol_;
  int max_iter_;
};

struct RieszResult {
  VectorField repr;
  double norm = 0.0;
};

/// repr solves A·repr = f; norm² = (repr, f)_{L²} = ‖f‖²_{H¹*}.
RieszResult riesz_h1dual(const VectorField& f, const SobolevMetric& metric);

/// Orthonormal cosine (DCT-II) basis that diagonalises the mirror-ghost Laplacian on a grid.
/// Mode k along an axis with n cells has eigenvalue (4/h²)·sin²(πk/2n) of −Δ_h.
class NeumannSpectrum {
 public:
  explicit NeumannSpectrum(const Grid& grid);

  const Grid& grid() const noexcept { return grid_; }
  /// Eigenvalue of −Δ_h for the coefficient stored at `idx` (same layout as cells).
  double eigenvalue(std::size_t idx) const noexcept { return eigenvalues_[idx]; }
  /// Coefficients in the orthonormal basis (Euclidean norm of values is preserved).
  VectorField forward(const VectorField& f) const;
  VectorField inverse(const VectorField& coefficients) const;

 private:
  VectorField transform(const VectorField& f, bool transpose) const;

  Grid grid_;
  std::vector<std::vector<double>> matrices_;  // per axis, n×n row-major, rows are modes
  std::vector<double> eigenvalues_;
};

}  // namespace llbtoc
