#pragma once

#include <random>
#include <vector>

#include "llbtoc/control.hpp"
#include "llbtoc/field.hpp"

namespace llbtoc::testing {

inline Grid grid1d(int cells, double length = 1.0) {
  const std::vector<int> c{cells};
  const std::vector<double> e{length};
  return make_grid(1, c, e);
}

inline Grid grid2d(int nx, int ny, double lx = 1.0, double ly = 1.0) {
  const std::vector<int> c{nx, ny};
  const std::vector<double> e{lx, ly};
  return make_grid(2, c, e);
}

inline VectorField random_field(const Grid& g, std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> d(-scale, scale);
  VectorField f(g);
  for (auto& v : f.values()) v = {d(rng), d(rng), d(rng)};
  return f;
}

inline ControlTrajectory random_control(const Grid& g, const std::vector<double>& times, std::mt19937_64& rng,
                                        double scale = 1.0) {
  std::vector<VectorField> frames;
  for (std::size_t k = 0; k < times.size(); ++k) frames.push_back(random_field(g, rng, scale));
  return ControlTrajectory(times, std::move(frames));
}

inline std::vector<double> uniform_nodes(double horizon, int intervals) {
  std::vector<double> t(intervals + 1);
  for (int k = 0; k <= intervals; ++k) t[k] = horizon * k / intervals;
  return t;
}

}  // namespace llbtoc::testing
