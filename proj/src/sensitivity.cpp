#include "llbtoc/sensitivity.hpp"

#include <algorithm>
#include <string>

#include "llbtoc/error.hpp"
#include "llbtoc/metric.hpp"

namespace llbtoc {

VectorField linearized_rhs(const VectorField& z, const VectorField& m, const VectorField& u) {
  require_same_grid(z, m);
  require_same_grid(z, u);
  const VectorField lap_m = laplacian(m);
  const VectorField lap_z = laplacian(z);
  VectorField out(z.grid());
  for (std::size_t i = 0; i < z.size(); ++i) {
    const Vec3& zi = z[i];
    const Vec3& mi = m[i];
    out[i] = cross(zi, lap_m[i]) + cross(mi, lap_z[i]) + cross(zi, u[i]) - (1.0 + norm2(mi)) * zi -
             (2.0 * dot(mi, zi)) * mi;
  }
  return out;
}

VectorField apply_linearized_operator(const VectorField& z, const VectorField& m, const VectorField& u) {
  return -1.0 * linearized_rhs(z, m, u);
}

VectorField second_variation_source(const VectorField& z, const VectorField& m, const VectorField& h) {
  require_same_grid(z, m);
  require_same_grid(z, h);
  const VectorField lap_z = laplacian(z);
  VectorField out(z.grid());
  for (std::size_t i = 0; i < z.size(); ++i) {
    const Vec3& zi = z[i];
    out[i] = 2.0 * cross(zi, lap_z[i]) + 2.0 * cross(zi, h[i]) - (4.0 * dot(zi, m[i])) * zi - (2.0 * norm2(zi)) * m[i];
  }
  return out;
}

namespace {

void require_complete(const StateTrajectory& m) {
  require(m.frames.size() == m.times.size() && m.step_controls.size() + 1 == m.times.size() && m.frames.size() >= 2,
          ErrorKind::invalid_argument, "state trajectory is incomplete");
}

template <class Source>
std::vector<VectorField> march(const StateTrajectory& m, const Source& source) {
  std::vector<VectorField> frames;
  frames.reserve(m.frames.size());
  frames.emplace_back(m.grid());
  for (std::size_t n = 0; n < m.steps(); ++n) {
    const double tau = m.step(n);
    const VectorField& z = frames.back();
    VectorField rhs = linearized_rhs(z, m.frames[n], m.step_controls[n]);
    rhs += source(n);
    rhs *= tau;
    rhs += z;
    require(rhs.all_finite(), ErrorKind::diverged, "non-finite value in a sensitivity step");
    frames.push_back(solve_shifted_laplacian(rhs, 1.0, tau, m.config.cg_tol));
  }
  return frames;
}

}  // namespace

LinearizedTrajectory solve_linearized(const StateTrajectory& m, const ControlTrajectory& h) {
  require_complete(m);
  require(h.grid() == m.grid(), ErrorKind::grid_mismatch, "direction and state on different grids");
  LinearizedTrajectory z;
  z.direction = h;
  z.step_directions.reserve(m.steps());
  for (std::size_t n = 0; n < m.steps(); ++n) z.step_directions.push_back(h.sample(m.times[n] + 0.5 * m.step(n)));
  z.frames = march(m, [&](std::size_t n) {
    const VectorField& hn = z.step_directions[n];
    return hn + cross_field(m.frames[n], hn);
  });
  return z;
}

SecondVariationTrajectory solve_second_variation(const StateTrajectory& m, const LinearizedTrajectory& z) {
  require_complete(m);
  require(z.frames.size() == m.frames.size(), ErrorKind::invalid_argument,
          "linearized trajectory does not match the state trajectory");
  SecondVariationTrajectory xi;
  xi.frames = march(m, [&](std::size_t n) {
    return second_variation_source(z.frames[n], m.frames[n], z.step_directions[n]);
  });
  return xi;
}

namespace {

void require_in_range(const StateTrajectory& m, double t) {
  require(t >= m.times.front() - 1e-12 && t <= m.times.back() + 1e-12, ErrorKind::out_of_range,
          "time " + std::to_string(t) + " outside [0, " + std::to_string(m.times.back()) + "]");
}

VectorField linear_frames(const std::vector<VectorField>& frames, const StateTrajectory& m, double t) {
  const std::size_t n = m.interval_of(t);
  const double theta = std::clamp((t - m.times[n]) / m.step(n), 0.0, 1.0);
  VectorField out = (1.0 - theta) * frames[n];
  axpy(theta, frames[n + 1], out);
  return out;
}

}  // namespace

TemporalDerivatives temporal_derivatives(const StateTrajectory& m, double t) {
  require_in_range(m, t);
  const VectorField mm = m.linear_at(t);
  const VectorField u = m.control.sample(t);
  const VectorField u_t = m.control.slope(t);
  const VectorField lap_m = laplacian(mm);
  TemporalDerivatives out;
  out.m_t = lap_m + llb_rhs(mm, u);
  const VectorField lap_mt = laplacian(out.m_t);
  out.m_tt = VectorField(mm.grid());
  for (std::size_t i = 0; i < mm.size(); ++i) {
    const Vec3& a = mm[i];
    const Vec3& b = out.m_t[i];
    out.m_tt[i] = lap_mt[i] + cross(b, lap_m[i]) + cross(a, lap_mt[i]) + cross(b, u[i]) + cross(a, u_t[i]) -
                  (1.0 + norm2(a)) * b - (2.0 * dot(a, b)) * a + u_t[i];
  }
  return out;
}

VectorField z_t_at(const LinearizedTrajectory& z, const StateTrajectory& m, double t) {
  require_in_range(m, t);
  require(z.frames.size() == m.frames.size(), ErrorKind::invalid_argument,
          "linearized trajectory does not match the state trajectory");
  const VectorField zz = linear_frames(z.frames, m, t);
  const VectorField mm = m.linear_at(t);
  const VectorField h = z.direction.sample(t);
  VectorField out = laplacian(zz) + linearized_rhs(zz, mm, m.control.sample(t));
  out += h;
  out += cross_field(mm, h);
  return out;
}

HittingPoint hitting_point(const StateTrajectory& m, const TargetSpec& target, AdjointMode mode) {
  return hitting_point(m, target, require_hit(m, target), mode);
}

HittingPoint hitting_point(const StateTrajectory& m, const TargetSpec& target, const HitResult& hit, AdjointMode mode) {
  HittingPoint hp;
  hp.mode = mode;
  hp.hit = hit;
  if (mode == AdjointMode::discrete) {
    hp.m = combine_frames(m.frames, hit.stencil, hit.weights.value);
    hp.m_t = combine_frames(m.frames, hit.stencil, hit.weights.first);
    hp.m_tt = combine_frames(m.frames, hit.stencil, hit.weights.second);
  } else {
    hp.m = m.linear_at(hit.time);
    auto d = temporal_derivatives(m, hit.time);
    hp.m_t = std::move(d.m_t);
    hp.m_tt = std::move(d.m_tt);
  }
  hp.residual = hp.m - target.m_omega;
  return hp;
}

VectorField value_at_hit(const std::vector<VectorField>& frames, const StateTrajectory& m, const HittingPoint& hp) {
  require(frames.size() == m.frames.size(), ErrorKind::invalid_argument, "frame sequence does not match the trajectory");
  if (hp.mode == AdjointMode::discrete) return combine_frames(frames, hp.hit.stencil, hp.hit.weights.value);
  return linear_frames(frames, m, hp.time());
}

VectorField rate_at_hit(const LinearizedTrajectory& z, const StateTrajectory& m, const HittingPoint& hp) {
  if (hp.mode == AdjointMode::discrete) return combine_frames(z.frames, hp.hit.stencil, hp.hit.weights.first);
  return z_t_at(z, m, hp.time());
}

}  // namespace llbtoc
