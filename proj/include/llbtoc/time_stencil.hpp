#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "llbtoc/field.hpp"

namespace llbtoc {

/// Lagrange basis weights (value, first and second derivative) at t on arbitrary distinct nodes.
struct LagrangeWeights {
  std::vector<double> value;
  std::vector<double> first;
  std::vector<double> second;
};

inline LagrangeWeights lagrange_weights(const std::vector<double>& nodes, double t) {
  const std::size_t n = nodes.size();
  LagrangeWeights w{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  for (std::size_t i = 0; i < n; ++i) {
    double denom = 1.0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) denom *= nodes[i] - nodes[j];
    double v = 1.0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) v *= t - nodes[j];
    double d1 = 0.0;
    double d2 = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      if (k == i) continue;
      double p = 1.0;
      for (std::size_t j = 0; j < n; ++j)
        if (j != i && j != k) p *= t - nodes[j];
      d1 += p;
      for (std::size_t l = 0; l < n; ++l) {
        if (l == i || l == k) continue;
        double q = 1.0;
        for (std::size_t j = 0; j < n; ++j)
          if (j != i && j != k && j != l) q *= t - nodes[j];
        d2 += q;
      }
    }
    w.value[i] = v / denom;
    w.first[i] = d1 / denom;
    w.second[i] = d2 / denom;
  }
  return w;
}

/// Up to four consecutive frame indices around interval [n, n+1] of a sequence with
/// `frame_count` frames: start = clamp(n−1, 0, frame_count−4).
inline std::vector<std::size_t> cubic_stencil(std::size_t interval, std::size_t frame_count) {
  const std::size_t width = std::min<std::size_t>(4, frame_count);
  std::size_t start = interval > 0 ? interval - 1 : 0;
  start = std::min(start, frame_count - width);
  std::vector<std::size_t> idx(width);
  for (std::size_t i = 0; i < width; ++i) idx[i] = start + i;
  return idx;
}

/// Σ_i weights[i] · frames[indices[i]].
inline VectorField combine_frames(const std::vector<VectorField>& frames, const std::vector<std::size_t>& indices,
                                  const std::vector<double>& weights) {
  VectorField out(frames.at(indices.front()).grid());
  for (std::size_t i = 0; i < indices.size(); ++i) axpy(weights[i], frames.at(indices[i]), out);
  return out;
}

}  // namespace llbtoc
