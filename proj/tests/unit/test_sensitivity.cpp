#include <doctest.h>

#include <array>
#include <cmath>

#include "llbtoc/error.hpp"
#include "llbtoc/sensitivity.hpp"
#include "test_support.hpp"

using namespace llbtoc;
using llbtoc::testing::grid1d;
using llbtoc::testing::random_control;
using llbtoc::testing::random_field;
using llbtoc::testing::uniform_nodes;

namespace {

struct Setup {
  StateTrajectory base;
  ControlTrajectory u;
  ControlTrajectory h;
  SolverConfig cfg;
  VectorField m0;
};

Setup smooth_setup(double dt = 2e-3, double horizon = 0.2) {
  const Grid g = grid1d(16);
  Setup s;
  s.cfg.dt = dt;
  s.cfg.horizon = horizon;
  s.m0 = VectorField::from_function(
      g, [](const auto& x) { return Vec3{0.6 * std::cos(M_PI * x[0]), 0.3, 0.2 + 0.1 * std::cos(2 * M_PI * x[0])}; });
  const auto nodes = uniform_nodes(horizon, 4);
  std::vector<VectorField> uf, hf;
  for (double t : nodes) {
    uf.push_back(VectorField::from_function(g, [&](const auto& x) { return Vec3{0.2 * t, 0.3 * x[0], -0.1}; }));
    hf.push_back(VectorField::from_function(
        g, [&](const auto& x) { return Vec3{std::cos(M_PI * x[0]), 0.5 - t, 0.4 * std::cos(3 * t)}; }));
  }
  s.u = ControlTrajectory(nodes, uf);
  s.h = ControlTrajectory(nodes, hf);
  s.base = simulate(s.m0, s.u, s.cfg);
  return s;
}

double sup_l2(const std::vector<VectorField>& a) {
  double s = 0.0;
  for (const auto& f : a) s = std::max(s, l2_norm(f));
  return s;
}

// Spatially constant reduction: y = (m, z, ξ) for constant u, h; classical RK4.
using State9 = std::array<Vec3, 3>;

State9 reduced_rhs(const State9& y, const Vec3& u, const Vec3& h) {
  const Vec3& m = y[0];
  const Vec3& z = y[1];
  const Vec3& xi = y[2];
  const Vec3 dm = cross(m, u) - (1.0 + norm2(m)) * m + u;
  const Vec3 dz = cross(z, u) - (1.0 + norm2(m)) * z - (2.0 * dot(m, z)) * m + h + cross(m, h);
  const Vec3 dxi = cross(xi, u) - (1.0 + norm2(m)) * xi - (2.0 * dot(m, xi)) * m + 2.0 * cross(z, h) -
                   (4.0 * dot(z, m)) * z - (2.0 * norm2(z)) * m;
  return {dm, dz, dxi};
}

State9 reduced_reference(Vec3 m0, const Vec3& u, const Vec3& h, double horizon, int steps) {
  State9 y{m0, Vec3{}, Vec3{}};
  const double dt = horizon / steps;
  auto add = [](const State9& a, double s, const State9& b) {
    return State9{a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]};
  };
  for (int n = 0; n < steps; ++n) {
    const auto k1 = reduced_rhs(y, u, h);
    const auto k2 = reduced_rhs(add(y, 0.5 * dt, k1), u, h);
    const auto k3 = reduced_rhs(add(y, 0.5 * dt, k2), u, h);
    const auto k4 = reduced_rhs(add(y, dt, k3), u, h);
    for (int c = 0; c < 3; ++c) y[c] += (dt / 6.0) * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
  }
  return y;
}

}  // namespace

TEST_CASE("apply_linearized_operator examples") {
  const Grid g = grid1d(6);
  std::mt19937_64 rng(2);
  const VectorField m = random_field(g, rng);
  const VectorField u = random_field(g, rng);
  CHECK(linf_norm(apply_linearized_operator(VectorField(g), m, u)) == 0.0);
  const VectorField z = random_field(g, rng);
  CHECK(linf_norm(apply_linearized_operator(z, VectorField(g), VectorField(g)) - z) < 1e-15);
  CHECK(linf_norm(apply_linearized_operator(VectorField(g, {0, 1, 0}), VectorField(g, {1, 0, 0}), VectorField(g)) -
                  VectorField(g, {0, 2, 0})) < 1e-15);
}

TEST_CASE("linearized solve: zero direction and linearity") {
  auto s = smooth_setup();
  const auto zero = solve_linearized(s.base, 0.0 * s.h);
  CHECK(sup_l2(zero.frames) == 0.0);
  CHECK(sup_l2(solve_second_variation(s.base, zero).frames) == 0.0);

  std::mt19937_64 rng(4);
  const auto h2 = random_control(s.base.grid(), s.h.times(), rng);
  const auto z1 = solve_linearized(s.base, s.h);
  const auto z2 = solve_linearized(s.base, h2);
  const auto z12 = solve_linearized(s.base, 2.0 * s.h - 0.5 * h2);
  double worst = 0.0;
  for (std::size_t n = 0; n < z1.frames.size(); ++n) {
    const VectorField combo = 2.0 * z1.frames[n] - 0.5 * z2.frames[n];
    worst = std::max(worst, l2_norm(z12.frames[n] - combo));
  }
  CHECK(worst <= 1e-11 * sup_l2(z12.frames));
}

TEST_CASE("first- and second-order state expansions") {
  auto s = smooth_setup();
  const auto z = solve_linearized(s.base, s.h);
  const auto xi = solve_second_variation(s.base, z);
  double prev1 = 0.0, prev2 = 0.0;
  for (double rho : {1e-1, 5e-2, 2.5e-2, 1.25e-2}) {
    const auto mr = simulate(s.m0, s.u + rho * s.h, s.cfg);
    double r1 = 0.0, r2 = 0.0;
    for (std::size_t n = 0; n < mr.frames.size(); ++n) {
      VectorField e1 = mr.frames[n] - s.base.frames[n];
      axpy(-rho, z.frames[n], e1);
      r1 = std::max(r1, l2_norm(e1));
      axpy(-0.5 * rho * rho, xi.frames[n], e1);
      r2 = std::max(r2, l2_norm(e1));
    }
    if (prev1 > 0.0) {
      CHECK((r1 / rho) / (prev1 / (2 * rho)) == doctest::Approx(0.5).epsilon(0.05));
      CHECK(r2 / (rho * rho) < prev2 / (4 * rho * rho));
      CHECK(std::log2(prev2 / r2) == doctest::Approx(3.0).epsilon(0.05));
    }
    prev1 = r1;
    prev2 = r2;
  }
}

TEST_CASE("constant-field reduction matches the reduced ODE") {
  const Grid g = grid1d(2);
  const Vec3 m0{0.8, -0.3, 0.4};
  const Vec3 u{0.2, 0.5, -0.1};
  const Vec3 h{-0.4, 0.1, 0.3};
  SolverConfig cfg;
  cfg.dt = 1e-5;
  cfg.horizon = 0.3;
  const auto base = simulate(VectorField(g, m0), ControlTrajectory::constant(g, cfg.horizon, 1, u), cfg);
  const auto z = solve_linearized(base, ControlTrajectory::constant(g, cfg.horizon, 1, h));
  const auto xi = solve_second_variation(base, z);
  const auto ref = reduced_reference(m0, u, h, cfg.horizon, 3000);
  CHECK(norm(base.frames.back()[1] - ref[0]) < 1e-4);
  CHECK(norm(z.frames.back()[0] - ref[1]) < 1e-4);
  CHECK(norm(xi.frames.back()[1] - ref[2]) < 1e-4);
}

TEST_CASE("temporal derivatives") {
  const Grid g = grid1d(4);
  SolverConfig cfg;
  cfg.dt = 1e-3;
  cfg.horizon = 0.3;
  const auto zero_u = ControlTrajectory::constant(g, cfg.horizon, 3);
  const auto zero = simulate(VectorField(g), zero_u, cfg);
  const auto d0 = temporal_derivatives(zero, 0.1);
  CHECK(linf_norm(d0.m_t) == 0.0);
  CHECK(linf_norm(d0.m_tt) == 0.0);

  // Radial: m = r e₁ with r_t = −(1+r²)r and r_tt = −(1+3r²) r_t.
  const auto radial = simulate(VectorField(g, {1, 0, 0}), zero_u, cfg);
  const double t = radial.times[137];
  const double r = radial.frames[137][0].x;
  const double rt = -(1 + r * r) * r;
  const auto d = temporal_derivatives(radial, t);
  CHECK(std::abs(d.m_t[2].x - rt) < 1e-6);
  CHECK(std::abs(d.m_tt[1].x + (1 + 3 * r * r) * rt) < 1e-6);
  CHECK(std::abs(d.m_t[2].y) + std::abs(d.m_tt[2].z) < 1e-15);
  CHECK_THROWS_AS(temporal_derivatives(radial, 0.5), Error);

  auto s = smooth_setup(1e-4, 0.2);
  const double tc = 0.1;
  const double eps = 5e-3;
  const auto dd = temporal_derivatives(s.base, tc);
  VectorField fd = s.base.linear_at(tc + eps) - s.base.linear_at(tc - eps);
  fd *= 1.0 / (2 * eps);
  CHECK(l2_norm(fd - dd.m_t) < 2e-3 * l2_norm(dd.m_t));
  VectorField fd2 = s.base.linear_at(tc + eps) - 2.0 * s.base.linear_at(tc) + s.base.linear_at(tc - eps);
  fd2 *= 1.0 / (eps * eps);
  CHECK(l2_norm(fd2 - dd.m_tt) < 2e-2 * l2_norm(dd.m_tt));

  const auto z = solve_linearized(s.base, s.h);
  const auto zt = z_t_at(z, s.base, tc);
  const std::size_t n = s.base.interval_of(tc);
  VectorField zfd = z.frames[n + 50] - z.frames[n - 50];
  zfd *= 1.0 / (s.base.times[n + 50] - s.base.times[n - 50]);
  CHECK(l2_norm(zfd - zt) < 2e-3 * l2_norm(zt));
  CHECK(linf_norm(z_t_at(solve_linearized(s.base, 0.0 * s.h), s.base, tc)) == 0.0);
}

TEST_CASE("z_t matches the reduced ODE derivative for constant fields") {
  const Grid g = grid1d(2);
  const Vec3 m0{0.5, 0.2, 0.0};
  const Vec3 h{0.0, 0.3, 0.7};
  SolverConfig cfg;
  cfg.dt = 1e-3;
  cfg.horizon = 0.1;
  const auto base = simulate(VectorField(g, m0), ControlTrajectory::constant(g, cfg.horizon, 1), cfg);
  const auto z = solve_linearized(base, ControlTrajectory::constant(g, cfg.horizon, 1, h));
  const std::size_t n = 40;
  const Vec3 m = base.frames[n][0];
  const Vec3 zz = z.frames[n][0];
  const Vec3 expected = -(1.0 + norm2(m)) * zz - (2.0 * dot(m, zz)) * m + h + cross(m, h);
  CHECK(norm(z_t_at(z, base, base.times[n])[1] - expected) < 1e-13);
}

TEST_CASE("hitting point: discrete and continuous modes agree to O(dt)") {
  const Grid g = grid1d(4);
  SolverConfig cfg;
  cfg.dt = 1e-3;
  cfg.horizon = 1.0;
  const auto traj = simulate(VectorField(g, {1, 0, 0}), ControlTrajectory::constant(g, 1.0, 2), cfg);
  const TargetSpec target{VectorField(g), 0.5};
  const auto disc = hitting_point(traj, target, AdjointMode::discrete);
  const auto cont = hitting_point(traj, target, AdjointMode::continuous);
  CHECK(disc.time() == cont.time());
  CHECK(l2_norm(disc.residual) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(disc.denominator() < 0.0);
  CHECK(l2_norm(disc.m_t - cont.m_t) < 5e-3 * l2_norm(cont.m_t));
  CHECK(l2_norm(disc.m_tt - cont.m_tt) < 2e-2 * l2_norm(cont.m_tt));
}
