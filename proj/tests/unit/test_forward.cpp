#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "llbtoc/error.hpp"
#include "llbtoc/forward.hpp"
#include "test_support.hpp"

using namespace llbtoc;
using llbtoc::testing::grid1d;
using llbtoc::testing::grid2d;

namespace {

// Closed-form |m(t)|² for m_t = −(1+|m|²)m with |m₀|² = s0.
double radial_s(double s0, double t) {
  const double a = s0 / (1.0 + s0);
  const double e = a * std::exp(-2.0 * t);
  return e / (1.0 - e);
}

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an llbtoc::Error");
  return ErrorKind::io;
}

// Reference for one semi-discrete step: classical RK4 on m' = Δm + N(m, u) with many substeps.
VectorField reference_step(const VectorField& m, const VectorField& u, double dt, int substeps) {
  auto f = [&](const VectorField& x) { return laplacian(x) + llb_rhs(x, u); };
  VectorField y = m;
  const double h = dt / substeps;
  for (int s = 0; s < substeps; ++s) {
    const VectorField k1 = f(y);
    const VectorField k2 = f(y + (0.5 * h) * k1);
    const VectorField k3 = f(y + (0.5 * h) * k2);
    const VectorField k4 = f(y + h * k3);
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return y;
}

StateTrajectory radial_run(double dt, double horizon, int cells = 8) {
  const Grid g = grid1d(cells);
  SolverConfig cfg;
  cfg.dt = dt;
  cfg.horizon = horizon;
  return simulate(VectorField(g, {1, 0, 0}), ControlTrajectory::constant(g, horizon, 1), cfg);
}

}  // namespace

TEST_CASE("llb_rhs examples") {
  const Grid g = grid1d(5);
  const VectorField e1(g, {1, 0, 0});
  CHECK(llb_rhs(e1, VectorField(g)) == VectorField(g, {-2, 0, 0}));
  const Vec3 c{0.1, -0.2, 0.3};
  CHECK(llb_rhs(VectorField(g), VectorField(g, c)) == VectorField(g, c));
  CHECK(linf_norm(llb_rhs(e1, VectorField(g, {0, 1, 0})) - VectorField(g, {-2, 1, 1})) < 1e-15);
  CHECK(kind_of([&] { llb_rhs(e1, VectorField(grid1d(4))); }) == ErrorKind::grid_mismatch);
}

TEST_CASE("semi-implicit step examples") {
  const Grid g = grid2d(4, 4);
  CHECK(linf_norm(step_semi_implicit(VectorField(g, {1, 0, 0}), VectorField(g), 0.1) -
                  VectorField(g, {0.8, 0, 0})) < 1e-14);
  const Vec3 c{1, 2, 3};
  CHECK(linf_norm(step_semi_implicit(VectorField(g), VectorField(g, c), 0.01) - VectorField(g, 0.01 * c)) < 1e-15);
  CHECK(kind_of([&] { step_semi_implicit(VectorField(g), VectorField(g), 0.0); }) == ErrorKind::invalid_argument);
}

TEST_CASE("one step has O(dt^2) local error against a fine reference") {
  const Grid g = grid1d(16);
  const VectorField m = VectorField::from_function(
      g, [](const auto& x) { return Vec3{0.4 * std::cos(M_PI * x[0]), 0.2, 0.3 * std::cos(2 * M_PI * x[0])}; });
  const VectorField u = VectorField::from_function(g, [](const auto& x) { return Vec3{0.0, 0.5 * x[0], 0.1}; });
  double prev = 0.0;
  for (double dt : {2e-3, 1e-3, 5e-4}) {
    const double err = l2_norm(step_semi_implicit(m, u, dt) - reference_step(m, u, dt, 200));
    if (prev > 0.0) CHECK(prev / err == doctest::Approx(4.0).epsilon(0.1));
    prev = err;
  }
}

TEST_CASE("step_times covers the horizon with a short last step") {
  const auto t = step_times(1.0, 0.3);
  REQUIRE(t.size() == 5);
  CHECK(t[3] == doctest::Approx(0.9));
  CHECK(t.back() == 1.0);
  CHECK(step_times(1.0, 0.1).size() == 11);
}

TEST_CASE("radial run matches the closed form at first order") {
  const double horizon = 0.5;
  double prev = 0.0;
  for (double dt : {4e-3, 2e-3, 1e-3}) {
    const auto traj = radial_run(dt, horizon);
    double err = 0.0;
    for (std::size_t n = 0; n < traj.frames.size(); ++n) {
      const double s = norm2(traj.frames[n][0]);
      err = std::max(err, std::abs(s - radial_s(1.0, traj.times[n])) / radial_s(1.0, traj.times[n]));
    }
    if (prev > 0.0) CHECK(std::log2(prev / err) == doctest::Approx(1.0).epsilon(0.1));
    prev = err;
  }
  // First-order scheme: the relative error at dt = 1e-3 is of the size dt itself.
  CHECK(prev < 2e-3);
}

TEST_CASE("structural properties of the forward solve") {
  const Grid g = grid2d(5, 4);
  SolverConfig cfg;
  cfg.dt = 0.01;
  cfg.horizon = 0.2;
  const auto zero_u = ControlTrajectory::constant(g, cfg.horizon, 2);
  const auto zero = simulate(VectorField(g), zero_u, cfg);
  for (const auto& f : zero.frames) CHECK(linf_norm(f) == 0.0);

  const auto cu = ControlTrajectory::constant(g, cfg.horizon, 2, {0.3, -0.1, 0.2});
  const auto flat = simulate(VectorField(g, {0.5, 0.2, -0.4}), cu, cfg);
  for (const auto& f : flat.frames)
    for (std::size_t i = 1; i < f.size(); ++i) CHECK(norm(f[i] - f[0]) < 1e-13);

  const VectorField m0 = VectorField::from_function(
      g, [](const auto& x) { return Vec3{std::cos(M_PI * x[0]), std::sin(x[1]), 0.5}; });
  const auto decay = simulate(m0, zero_u, cfg);
  CHECK(decay.frames.front() == m0);
  for (std::size_t n = 1; n < decay.frames.size(); ++n)
    CHECK(l2_norm(decay.frames[n]) <= l2_norm(decay.frames[n - 1]));

  const auto again = simulate(m0, zero_u, cfg);
  for (std::size_t n = 0; n < decay.frames.size(); ++n) CHECK(again.frames[n] == decay.frames[n]);
}

TEST_CASE("blow-up guard") {
  const Grid g = grid1d(4);
  SolverConfig cfg;
  cfg.dt = 0.1;
  cfg.horizon = 1.0;
  CHECK(kind_of([&] { simulate(VectorField(g, {100, 0, 0}), ControlTrajectory::constant(g, 1.0, 1), cfg); }) ==
        ErrorKind::diverged);
}

TEST_CASE("hitting time on the radial benchmark") {
  const auto traj = radial_run(1e-4, 1.0);
  const Grid& g = traj.grid();
  const TargetSpec target{VectorField(g), 0.5};
  const auto hit = hitting_time(traj, target);
  REQUIRE(hit);
  // |m|² = 0.25 solves s/(1+s) = ½e^{−2T}, so T* = ½ ln 2.5.
  CHECK(std::abs(hit->time - 0.5 * std::log(2.5)) < 1e-3);
  CHECK(std::abs(hit->distance - 0.5) < 1e-12);
  CHECK(traj.times[hit->interval] <= hit->time);
  CHECK(hit->time <= traj.times[hit->interval + 1]);

  CHECK(kind_of([&] { hitting_time(traj, TargetSpec{VectorField(g), 1.0}); }) == ErrorKind::trivial_case);
  CHECK(kind_of([&] { hitting_time(traj, TargetSpec{VectorField(g), 0.0}); }) == ErrorKind::invalid_argument);
  CHECK_FALSE(hitting_time(traj, TargetSpec{VectorField(g, {0, 0, 3}), 0.5}));
  CHECK(kind_of([&] { require_hit(traj, TargetSpec{VectorField(g, {0, 0, 3}), 0.5}); }) ==
        ErrorKind::target_unreachable);

  double prev = 0.0;
  for (double delta : {0.3, 0.4, 0.5, 0.6, 0.8}) {
    const double t = hitting_time(traj, TargetSpec{VectorField(g), delta})->time;
    if (prev > 0.0) CHECK(t <= prev);
    prev = t;
  }
}

TEST_CASE("hitting time is exact for a trajectory whose distance is a cubic") {
  // Oracle: frames m(t) = (1 − t)·e₁ give ‖m − 0‖² = (1−t)², so δ = 0.35 is hit at t = 0.65 exactly,
  // and the cubic interpolant reproduces linear-in-time frames exactly.
  const Grid g = grid1d(2);
  StateTrajectory traj;
  traj.times = step_times(1.0, 0.1);
  for (double t : traj.times) traj.frames.push_back(VectorField(g, {1.0 - t, 0, 0}));
  const auto hit = hitting_time(traj, TargetSpec{VectorField(g), 0.35});
  REQUIRE(hit);
  CHECK(hit->time == doctest::Approx(0.65).epsilon(1e-14));
}

TEST_CASE("energy diagnostics") {
  const Grid g = grid1d(8);
  SolverConfig cfg;
  cfg.dt = 0.01;
  cfg.horizon = 0.1;
  const auto zero_u = ControlTrajectory::constant(g, cfg.horizon, 1);
  const auto rep0 = energy_diagnostics(simulate(VectorField(g), zero_u, cfg), zero_u);
  CHECK(rep0.sup_h2eq == 0.0);
  CHECK(rep0.int_h3eq == 0.0);
  CHECK(rep0.m_proxy == 0.0);

  const auto flat = simulate(VectorField(g, {0.7, 0, 0}), zero_u, cfg);
  const auto rep = energy_diagnostics(flat, zero_u);
  for (std::size_t n = 0; n < flat.frames.size(); ++n)
    CHECK(rep.h2eq_history[n] == doctest::Approx(l2_inner(flat.frames[n], flat.frames[n])).epsilon(1e-14));
  CHECK_FALSE(rep.smallness_exceeded);

  // Refinement: the sup-norm of ‖m‖² + ‖Δm‖² converges from below for a smooth cosine start.
  double prev = 0.0;
  for (int n : {16, 32, 64}) {
    const Grid gn = grid1d(n);
    const auto un = ControlTrajectory::constant(gn, cfg.horizon, 1);
    const VectorField m0 = VectorField::from_function(gn, [](const auto& x) { return Vec3{0.3 * std::cos(M_PI * x[0]), 0, 0}; });
    const auto r = energy_diagnostics(simulate(m0, un, cfg), un);
    CHECK(std::isfinite(r.sup_h2eq));
    CHECK(std::isfinite(r.int_h3eq));
    CHECK(r.sup_h2eq >= prev);
    prev = r.sup_h2eq;
  }

  const std::vector<int> c3{2, 2, 2};
  const std::vector<double> e3{1, 1, 1};
  const Grid g3 = make_grid(3, c3, e3);
  const auto u3 = ControlTrajectory::constant(g3, cfg.horizon, 1);
  EnergyOptions strict;
  strict.threshold = 1e-3;
  CHECK(energy_diagnostics(simulate(VectorField(g3, {0.5, 0, 0}), u3, cfg), u3, strict).smallness_exceeded);
}

TEST_CASE("trajectory CSV export") {
  const auto traj = radial_run(0.01, 0.05, 4);
  const auto path = std::filesystem::temp_directory_path() / "llbtoc_traj.csv";
  write_trajectory_csv(path, traj, TargetSpec{VectorField(traj.grid()), 0.5});
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "t,dist_to_target_L2,norm_H2eq");
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  CHECK(rows == 6);
}
