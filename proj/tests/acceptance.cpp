// Acceptance driver: one PASS/FAIL line per criterion, nonzero exit if any criterion fails.

#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "llbtoc/error.hpp"
#include "llbtoc/optimizer.hpp"
#include "llbtoc/validation.hpp"
#include "test_support.hpp"

using namespace llbtoc;
using llbtoc::testing::grid1d;
using llbtoc::testing::random_control;
using llbtoc::testing::uniform_nodes;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// s(t) for m' = −(1+|m|²)m written independently of the library: s/(1+s) = (s0/(1+s0)) e^{−2t}.
double closed_form_s(double s0, double t) {
  const double q = s0 / (1.0 + s0) * std::exp(-2.0 * t);
  return q / (1.0 - q);
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += std::log(x[i]);
    sy += std::log(y[i]);
    sxx += std::log(x[i]) * std::log(x[i]);
    sxy += std::log(x[i]) * std::log(y[i]);
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

Problem radial_problem(double dt, int cells = 64) {
  const Grid g = grid1d(cells);
  SolverConfig cfg;
  cfg.dt = dt;
  cfg.horizon = 1.0;
  return Problem(VectorField(g, {1, 0, 0}), TargetSpec{VectorField(g), 0.5}, cfg);
}

Problem smooth_problem(double dt, int cells) {
  const Grid g = grid1d(cells);
  SolverConfig cfg;
  cfg.dt = dt;
  cfg.horizon = 0.6;
  const VectorField m0 = VectorField::from_function(
      g, [](const auto& x) { return Vec3{0.9 + 0.2 * std::cos(M_PI * x[0]), 0.3 * std::cos(2 * M_PI * x[0]), 0.2}; });
  return Problem(m0, TargetSpec{VectorField(g, {0.05, 0.1, 0.1}), 0.45}, cfg);
}

ControlTrajectory smooth_control(const Grid& g, double horizon) {
  const auto nodes = uniform_nodes(horizon, 6);
  std::vector<VectorField> f;
  for (double t : nodes)
    f.push_back(VectorField::from_function(
        g, [&](const auto& x) { return Vec3{0.1 * std::cos(M_PI * x[0]), 0.2 - 0.3 * t, 0.1 * t}; }));
  return ControlTrajectory(nodes, f);
}

double max_relative_s_error(double dt) {
  const auto p = radial_problem(dt);
  const auto traj = simulate(p.m0, ControlTrajectory::constant(p.m0.grid(), 1.0, 1), p.solver);
  double worst = 0.0;
  for (std::size_t n = 0; n < traj.frames.size(); ++n) {
    const double exact = closed_form_s(1.0, traj.times[n]);
    for (std::size_t c = 0; c < traj.frames[n].size(); ++c)
      worst = std::max(worst, std::abs(norm2(traj.frames[n][c]) - exact) / exact);
  }
  return worst;
}

Outcome criterion1() {
  const double err = max_relative_s_error(1e-3);
  std::vector<double> dts{8e-3, 4e-3, 2e-3, 1e-3}, errs;
  for (double dt : dts) errs.push_back(max_relative_s_error(dt));
  const double order = slope(dts, errs);
  const bool ok = err <= 1e-4 && std::abs(order - 1.0) <= 0.1;
  return {ok, fmt("max relative error of |m|^2 at dt=1e-3: %.3e (limit 1e-4)", err) +
                  fmt(", observed order %.3f (1.0 +- 0.1)", order)};
}

Outcome criterion2() {
  const auto p = radial_problem(1e-4);
  const double t = cost(ControlTrajectory::constant(p.m0.grid(), 1.0, 1), p).t_star;
  const double exact = 0.5 * std::log(2.5);
  const double err = std::abs(t - exact);
  return {err <= 1e-3, fmt("T* = %.8f", t) + fmt(", |T* - ln(2.5)/2| = %.3e (limit 1e-3)", err)};
}

Outcome criterion3() {
  const auto p = smooth_problem(1e-3, 64);
  const auto u = smooth_control(p.m0.grid(), p.solver.horizon);
  const auto ev = evaluate(u, p);
  const auto phi = solve_adjoint(ev.state, ev.hp);
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  for (int i = 0; i < 10; ++i) {
    const auto h = random_control(p.m0.grid(), u.times(), rng);
    worst = std::max(worst, duality_residual(solve_linearized(ev.state, h), phi, ev.state, ev.hp));
  }
  // Continuous mode under joint refinement with a fixed coarse direction.
  std::mt19937_64 rng2(7);
  const auto h0 = random_control(grid1d(8), uniform_nodes(0.6, 6), rng2);
  std::vector<double> res;
  for (int level = 0; level < 3; ++level) {
    auto q = smooth_problem(4e-3 / (1 << (2 * level)), 8 << level);
    q.mode = AdjointMode::continuous;
    std::vector<VectorField> frames;
    for (const auto& f : h0.frames()) {
      VectorField fine(q.m0.grid());
      for (std::size_t c = 0; c < fine.size(); ++c) fine[c] = f[c >> level];
      frames.push_back(fine);
    }
    const ControlTrajectory h(h0.times(), frames);
    const auto uq = smooth_control(q.m0.grid(), q.solver.horizon);
    const auto e = evaluate(uq, q);
    res.push_back(duality_residual(solve_linearized(e.state, h), solve_adjoint(e.state, e.hp), e.state, e.hp));
  }
  const bool decreasing = res[1] < res[0] && res[2] < res[1];
  return {worst <= 1e-10 && decreasing, fmt("discrete max relative residual %.3e (limit 1e-10)", worst) +
                                            fmt("; continuous residuals %.3e", res[0]) + fmt(" > %.3e", res[1]) +
                                            fmt(" > %.3e", res[2])};
}

Outcome criterion4() {
  const auto p = smooth_problem(1e-3, 64);
  const auto u = smooth_control(p.m0.grid(), p.solver.horizon);
  const auto ev = evaluate(u, p);
  const auto phi = solve_adjoint(ev.state, ev.hp);
  std::mt19937_64 rng(31);
  double worst = 0.0;
  for (int i = 0; i < 10; ++i) {
    const auto h = random_control(p.m0.grid(), u.times(), rng);
    const double lhs = ev.hp.time() * hitting_time_derivative_D(solve_linearized(ev.state, h), ev.state, ev.hp);
    const double rhs = source_pairing(phi, h);
    worst = std::max(worst, std::abs(lhs - rhs) / std::abs(lhs));
  }
  return {worst <= 1e-8, fmt("max relative mismatch %.3e (limit 1e-8)", worst)};
}

Outcome criterion5() {
  const auto p = radial_problem(1e-4);
  const Grid& g = p.m0.grid();
  const auto u = ControlTrajectory::constant(g, 1.0, 4);
  const auto h = ControlTrajectory::constant(g, 1.0, 4, {1, 0, 0});
  const auto rho = default_rho(1e-1, 8);
  bool ok = true;
  std::string detail;
  for (auto k : {SweepKind::state1, SweepKind::state2, SweepKind::time1, SweepKind::time2, SweepKind::gradient}) {
    const auto rep = taylor_sweep(k, p, u, h, rho);
    const bool within = std::abs(rep.slope - rep.expected) <= 0.2 && rep.excluded.empty();
    ok = ok && within;
    detail += std::string(detail.empty() ? "" : ", ") + to_string(k) + fmt("=%.3f", rep.slope);
  }
  return {ok, "slopes " + detail + " (expected 2, 3, 2, 3, 2 within 0.2)"};
}

Outcome criterion6() {
  double worst = 0.0;
  std::string detail;
  for (auto mode : {AdjointMode::discrete, AdjointMode::continuous}) {
    auto p = smooth_problem(1e-4, 64);
    p.mode = mode;
    const auto u = smooth_control(p.m0.grid(), p.solver.horizon);
    const auto ev = evaluate(u, p);
    const auto phi = solve_adjoint(ev.state, ev.hp);
    std::mt19937_64 rng(5);
    const auto h = random_control(p.m0.grid(), u.times(), rng, 0.5);
    const auto z = solve_linearized(ev.state, h);
    const auto xi = solve_second_variation(ev.state, z);
    // (d/T̃)∫∫X·φ against −½(ξ(T̃), r), d = (r, m_t).
    const double lhs = ev.hp.denominator() / ev.hp.time() * phi_weighted_quadratic(z, phi, ev.state);
    const double rhs = -0.5 * l2_inner(value_at_hit(xi.frames, ev.state, ev.hp), ev.hp.residual);
    const double rel = std::abs(lhs - rhs) / std::abs(rhs);
    worst = std::max(worst, rel);
    detail += std::string(detail.empty() ? "" : ", ") + (mode == AdjointMode::discrete ? "discrete " : "continuous ") +
              fmt("%.3e", rel);
  }
  return {worst <= 1e-3, "relative mismatch " + detail + " (limit 1e-3)"};
}

Outcome criterion7() {
  const auto p = radial_problem(1e-3);
  const auto u0 = ControlTrajectory::constant(p.m0.grid(), 1.0, 8);
  OptimizeConfig red;
  // |Y(h)| ≤ ‖g‖ on unit probes, so this tolerance also bounds the probe check.
  red.grad_tol = 1e-8;
  const auto a = optimize(p, u0, red);
  bool monotone = true;
  for (std::size_t i = 1; i < a.history.size(); ++i) monotone = monotone && a.history[i].J <= a.history[i - 1].J;
  const double gnorm = a.history.back().grad_norm;
  const auto rep = check_optimality(a.u, p, red);
  double worst_y = 0.0, worst_q = INFINITY;
  for (const auto& pr : rep.probes) {
    if (pr.kind == "critical") worst_q = std::min(worst_q, pr.Q);
    else worst_y = std::min(worst_y, pr.Y);
  }

  OptimizeConfig pen;
  pen.mode = OptimizeMode::penalty;
  pen.report = false;
  const auto b = optimize(p, u0, pen);
  const auto st = simulate(p.m0, b.u, p.solver);
  // Feasibility from an independent linear read-out of the end state around T.
  const double feas = std::abs(distance_to_target(st.linear_at(b.T), p.target) - p.target.delta);
  const double dT = std::abs(b.T - a.T);
  const bool ok = a.converged && gnorm <= 1e-6 && monotone && worst_y >= -1e-8 && worst_q > 0.0 && b.converged &&
                  feas <= 1e-4 && dT <= 1e-3;
  return {ok, fmt("reduced |g|=%.2e", gnorm) + (monotone ? ", J monotone" : ", J NOT monotone") +
                  fmt(", min Y=%.2e", worst_y) + fmt(", min Q=%.3f", worst_q) + fmt("; penalty feasibility %.2e", feas) +
                  fmt(", |T_pen - T_red|=%.2e", dT)};
}

Outcome criterion8() {
  const double T = 0.1;
  struct Case {
    const char* name;
    InitialProfile m0;
    ControlProfile u;
  };
  const std::vector<Case> cases{
      {"cosine", [](double x) { return Vec3{0.3 * std::cos(M_PI * x), 0, 0}; }, [](double, double) { return Vec3{}; }},
      {"coupled", [](double x) { return Vec3{0.3 * std::cos(M_PI * x), 0.4 * std::cos(2 * M_PI * x), 0.6}; },
       [](double t, double x) { return Vec3{0.2 * std::cos(M_PI * x), 0.0, 0.5 - t}; }},
  };
  bool ok = true;
  std::string detail;
  for (const auto& c : cases) {
    std::vector<double> dx, err;
    for (int cells : {16, 32, 64}) {
      const Grid g = grid1d(cells);
      SpectralConfig sc;
      sc.modes = 24;
      sc.dt = 1e-4;
      const auto ref = spectral_simulate_1d(g, c.m0, c.u, T, sc);
      SolverConfig cfg;
      cfg.horizon = T;
      cfg.dt = 0.1 / (cells * cells);
      const auto nodes = uniform_nodes(T, 20);
      std::vector<VectorField> frames;
      for (double t : nodes) frames.push_back(VectorField::from_function(g, [&](const auto& x) { return c.u(t, x[0]); }));
      const auto fd = simulate(VectorField::from_function(g, [&](const auto& x) { return c.m0(x[0]); }),
                               ControlTrajectory(nodes, frames), cfg);
      dx.push_back(1.0 / cells);
      err.push_back(l2_norm(fd.frames.back() - ref.frames.back()));
    }
    const double s = slope(dx, err);
    ok = ok && std::abs(s - 2.0) <= 0.2;
    detail += std::string(detail.empty() ? "" : ", ") + c.name + fmt(" order %.3f", s);
  }
  return {ok, detail + " (expected 2)"};
}

Outcome criterion9() {
  auto expect = [](ErrorKind want, const std::function<void()>& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.kind() == want;
    }
    return false;
  };
  const auto p = radial_problem(1e-3, 8);
  const Grid& g = p.m0.grid();
  const auto u0 = ControlTrajectory::constant(g, 1.0, 2);
  const bool transversal = expect(ErrorKind::transversality_violation, [&] {
    terminal_condition(VectorField(g, {0.5, 0, 0}), VectorField(g, {0, 1, 0}), 0.4);
  });
  const bool trivial = expect(ErrorKind::trivial_case, [&] {
    auto q = p;
    q.target.delta = 2.0;
    evaluate(u0, q);
  });
  const bool unreachable = expect(ErrorKind::target_unreachable, [&] {
    auto q = p;
    q.target.m_omega = VectorField(g, {0, 0, 3});
    evaluate(u0, q);
  });
  const bool blowup = expect(ErrorKind::diverged, [&] {
    auto cfg = p.solver;
    cfg.dt = 1e-2;
    simulate(p.m0, ControlTrajectory::constant(g, 1.0, 2, {1e9, 0, 0}), cfg);
  });
  const bool ok = transversal && trivial && unreachable && blowup;
  return {ok, std::string("transversality ") + (transversal ? "ok" : "MISSING") + ", trivial " +
                  (trivial ? "ok" : "MISSING") + ", unreachable " + (unreachable ? "ok" : "MISSING") + ", blow-up " +
                  (blowup ? "ok" : "MISSING")};
}

Outcome criterion10() {
  const auto p = smooth_problem(1e-3, 32);
  const auto u0 = ControlTrajectory::zeros(p.m0.grid(), uniform_nodes(p.solver.horizon, 6));
  OptimizeConfig cfg;
  cfg.max_iters = 10;
  const auto a = iteration_log_csv(optimize(p, u0, cfg).history);
  const auto b = iteration_log_csv(optimize(p, u0, cfg).history);
  return {a == b && !a.empty(), fmt("%.0f log bytes, ", static_cast<double>(a.size())) +
                                    (a == b ? "identical" : "DIFFERENT")};
}

}  // namespace

int main() {
  const std::vector<std::function<Outcome()>> criteria{criterion1, criterion2, criterion3, criterion4, criterion5,
                                                       criterion6, criterion7, criterion8, criterion9, criterion10};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i]();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    std::printf("criterion %2zu: %s  %s\n", i + 1, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
