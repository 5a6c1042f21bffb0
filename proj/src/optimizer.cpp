#include "llbtoc/optimizer.hpp"

#include <cmath>
#include <deque>
#include <fstream>
#include <random>
#include <sstream>

#include "llbtoc/error.hpp"

namespace llbtoc {

ControlTrajectory project_Uad(const ControlTrajectory& u, const AdmissibleSet& set, const SobolevMetric& metric) {
  if (set.kind == AdmissibleSet::Kind::whole_space) return u;
  require(set.radius > 0.0, ErrorKind::invalid_argument, "ball radius must be positive");
  const double n = norm_U(u, metric);
  if (n <= set.radius) return u;
  return (set.radius / n) * u;
}

namespace {

bool recoverable(ErrorKind k) {
  return k == ErrorKind::target_unreachable || k == ErrorKind::diverged || k == ErrorKind::transversality_violation ||
         k == ErrorKind::non_convergence || k == ErrorKind::trivial_case;
}

IterationRecord record_of(int iter, const CostBreakdown& c, double grad_norm, double T, double violation) {
  return IterationRecord{iter, c.total, c.time_term, c.control_term, grad_norm, T, violation};
}

OptimizeResult optimize_reduced(const Problem& problem, const ControlTrajectory& u_init, const OptimizeConfig& cfg) {
  const SobolevMetric& metric = problem.metric;
  ControlTrajectory u = project_Uad(u_init, cfg.uad, metric);
  Evaluation ev;
  try {
    ev = evaluate(u, problem);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::target_unreachable) throw;
    fail(ErrorKind::initial_control_misses_tube, std::string("initial control misses the tube: ") + e.what());
  }

  OptimizeResult res;
  int stalled = 0;
  for (int it = 0;; ++it) {
    const AdjointTrajectory phi = solve_adjoint(ev.state, ev.hp, problem.transversality_eps);
    const ControlTrajectory g = riesz_gradient(phi, u, metric, problem.gram_tol);
    const double measure = cfg.uad.kind == AdmissibleSet::Kind::whole_space
                               ? norm_U(g, metric)
                               : norm_U(u - project_Uad(u - g, cfg.uad, metric), metric);
    res.history.push_back(record_of(it, ev.cost, measure, ev.hp.time(),
                                    std::abs(l2_norm(ev.hp.residual) - problem.target.delta)));
    if (measure <= cfg.grad_tol) {
      res.converged = true;
      res.message = "gradient tolerance reached";
      break;
    }
    if (it >= cfg.max_iters) {
      res.message = "iteration cap reached";
      break;
    }
    if (stalled >= 3) {
      res.message = "stalled: J no longer decreases in floating point";
      break;
    }
    const double J = ev.cost.total;
    double alpha = cfg.initial_step;
    bool accepted = false;
    for (int b = 0; b <= cfg.max_backtracks && !accepted; ++b, alpha *= cfg.backtrack) {
      ControlTrajectory trial = project_Uad(u - alpha * g, cfg.uad, metric);
      Evaluation ev_trial;
      try {
        ev_trial = evaluate(trial, problem);
      } catch (const Error& e) {
        if (!recoverable(e.kind())) throw;
        continue;
      }
      if (!check_transversality(ev_trial.hp.residual, ev_trial.hp.m_t, ev_trial.hp.time(), problem.transversality_eps)
               .pass) {
        continue;
      }
      // Armijo with a roundoff allowance, but never an increase of J.
      const double bound = J + cfg.c1 * inner_U(g, trial - u, metric) + 1e-14 * std::max(1.0, std::abs(J));
      if (ev_trial.cost.total <= std::min(bound, J)) {
        stalled = ev_trial.cost.total < J ? 0 : stalled + 1;
        u = std::move(trial);
        ev = std::move(ev_trial);
        accepted = true;
      }
    }
    if (!accepted) {
      fail(ErrorKind::line_search_failure, "Armijo line search failed after " + std::to_string(cfg.max_backtracks) +
                                               " backtracks at iteration " + std::to_string(it));
    }
  }
  res.u = std::move(u);
  res.T = ev.hp.time();
  return res;
}

// ---- augmented Lagrangian in (u, T) ----

struct Pair {
  ControlTrajectory u;
  double T = 0.0;
};

double pair_inner(const Pair& a, const Pair& b, const SobolevMetric& metric) {
  return inner_U(a.u, b.u, metric) + a.T * b.T;
}

Pair pair_axpy(double alpha, const Pair& x, Pair y) {
  axpy(alpha, x.u, y.u);
  y.T += alpha * x.T;
  return y;
}

Pair pair_scale(double s, Pair x) {
  x.u *= s;
  x.T *= s;
  return x;
}

/// State quantities at an arbitrary time T, evaluated on the cubic stencil like a hitting point.
HittingPoint point_at(const StateTrajectory& traj, const TargetSpec& target, double T) {
  const std::size_t n = traj.interval_of(T);
  HitResult hit;
  hit.time = T;
  hit.interval = n;
  hit.stencil = cubic_stencil(n, traj.frames.size());
  std::vector<double> nodes;
  for (auto i : hit.stencil) nodes.push_back(traj.times[i]);
  hit.weights = lagrange_weights(nodes, T);
  HittingPoint hp;
  hp.mode = AdjointMode::discrete;
  hp.hit = hit;
  hp.m = combine_frames(traj.frames, hit.stencil, hit.weights.value);
  hp.m_t = combine_frames(traj.frames, hit.stencil, hit.weights.first);
  hp.m_tt = combine_frames(traj.frames, hit.stencil, hit.weights.second);
  hp.residual = hp.m - target.m_omega;
  hit.distance = l2_norm(hp.residual);
  hp.hit.distance = hit.distance;
  return hp;
}

struct PenaltyPoint {
  Pair x;
  StateTrajectory state;
  HittingPoint hp;
  double c = 0.0;
  double J = 0.0;
  double time_term = 0.0;
  double control_term = 0.0;
  double L = 0.0;
};

PenaltyPoint penalty_eval(const Problem& problem, Pair x, double lambda, double mu) {
  require(x.T > 0.0 && x.T < problem.solver.horizon, ErrorKind::out_of_range, "final time left (0, horizon)");
  PenaltyPoint p;
  p.state = simulate(problem.m0, x.u, problem.solver);
  p.hp = point_at(p.state, problem.target, x.T);
  p.c = l2_inner(p.hp.residual, p.hp.residual) - problem.target.delta * problem.target.delta;
  p.time_term = 0.5 * x.T * x.T;
  const double un = norm_U(x.u, problem.metric);
  p.control_term = 0.5 * un * un;
  p.J = p.time_term + p.control_term;
  p.L = p.J + lambda * p.c + 0.5 * mu * p.c * p.c;
  p.x = std::move(x);
  return p;
}

Pair penalty_gradient(const Problem& problem, const PenaltyPoint& p, double lambda, double mu) {
  const double mult = lambda + mu * p.c;
  const VectorField phi_T = (2.0 * mult) * p.hp.residual;
  const AdjointTrajectory adj = solve_adjoint(p.state, p.hp, phi_T);
  Pair g;
  g.u = solve_gram(adjoint_load(adj, p.x.u), problem.metric, problem.gram_tol);
  g.u += p.x.u;
  g.T = p.x.T + 2.0 * mult * l2_inner(p.hp.residual, p.hp.m_t);
  return g;
}

OptimizeResult optimize_penalty(const Problem& problem, const ControlTrajectory& u_init, const OptimizeConfig& cfg) {
  const SobolevMetric& metric = problem.metric;
  Pair x{project_Uad(u_init, cfg.uad, metric), cfg.initial_T};
  if (x.T <= 0.0) {
    try {
      x.T = evaluate(x.u, problem).hp.time();
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::target_unreachable) throw;
      x.T = 0.5 * problem.solver.horizon;
    }
  }
  double lambda = 0.0;
  double mu = cfg.mu0;
  OptimizeResult res;
  int iter = 0;
  PenaltyPoint p = penalty_eval(problem, x, lambda, mu);
  double prev_c = std::abs(p.c);

  for (int outer = 0; outer < cfg.outer_iters; ++outer) {
    p.L = p.J + lambda * p.c + 0.5 * mu * p.c * p.c;
    Pair g = penalty_gradient(problem, p, lambda, mu);
    std::deque<std::pair<Pair, Pair>> memory;  // (s, y)
    bool inner_converged = false;
    for (int inner = 0; inner < cfg.inner_iters; ++inner) {
      const double gnorm = std::sqrt(pair_inner(g, g, metric));
      res.history.push_back(IterationRecord{iter++, p.J, p.time_term, p.control_term, gnorm, p.x.T,
                                            std::abs(std::sqrt(std::max(0.0, p.c + problem.target.delta *
                                                                                       problem.target.delta)) -
                                                     problem.target.delta)});
      if (gnorm <= cfg.inner_tol) {
        inner_converged = true;
        break;
      }
      // Two-loop recursion in the product metric.
      Pair q = g;
      std::vector<double> alphas(memory.size());
      for (std::size_t i = memory.size(); i-- > 0;) {
        const auto& [s, y] = memory[i];
        alphas[i] = pair_inner(s, q, metric) / pair_inner(y, s, metric);
        q = pair_axpy(-alphas[i], y, q);
      }
      if (!memory.empty()) {
        const auto& [s, y] = memory.back();
        q = pair_scale(pair_inner(s, y, metric) / pair_inner(y, y, metric), q);
      }
      for (std::size_t i = 0; i < memory.size(); ++i) {
        const auto& [s, y] = memory[i];
        const double beta = pair_inner(y, q, metric) / pair_inner(y, s, metric);
        q = pair_axpy(alphas[i] - beta, s, q);
      }
      Pair dir = pair_scale(-1.0, q);
      double slope = pair_inner(g, dir, metric);
      if (!(slope < 0.0)) {
        memory.clear();
        dir = pair_scale(-1.0, g);
        slope = -gnorm * gnorm;
      }
      double alpha = memory.empty() ? std::min(1.0, 0.1 / std::max(gnorm, 1e-300)) : 1.0;
      bool accepted = false;
      PenaltyPoint trial;
      for (int b = 0; b <= cfg.max_backtracks && !accepted; ++b, alpha *= cfg.backtrack) {
        Pair xt = pair_axpy(alpha, dir, p.x);
        xt.u = project_Uad(xt.u, cfg.uad, metric);
        try {
          trial = penalty_eval(problem, std::move(xt), lambda, mu);
        } catch (const Error& e) {
          if (!recoverable(e.kind()) && e.kind() != ErrorKind::out_of_range) throw;
          continue;
        }
        if (trial.L <= p.L + cfg.c1 * alpha * slope + 1e-14 * std::max(1.0, std::abs(p.L))) accepted = true;
      }
      if (!accepted) {
        if (!memory.empty()) {
          memory.clear();
          continue;
        }
        fail(ErrorKind::line_search_failure, "penalty line search failed at iteration " + std::to_string(iter));
      }
      Pair g_new = penalty_gradient(problem, trial, lambda, mu);
      Pair s = pair_axpy(-1.0, p.x, trial.x);
      Pair y = pair_axpy(-1.0, g, g_new);
      if (pair_inner(s, y, metric) > 1e-14 * std::sqrt(pair_inner(s, s, metric) * pair_inner(y, y, metric))) {
        memory.emplace_back(std::move(s), std::move(y));
        if (static_cast<int>(memory.size()) > cfg.lbfgs_memory) memory.pop_front();
      }
      p = std::move(trial);
      g = std::move(g_new);
    }
    const double c_abs = std::abs(p.c);
    if (inner_converged && c_abs <= cfg.feasibility_tol) {
      res.converged = true;
      res.message = "terminal constraint satisfied";
      break;
    }
    lambda += mu * p.c;
    if (c_abs > 0.25 * prev_c) mu = std::min(mu * cfg.mu_growth, cfg.mu_max);
    prev_c = c_abs;
    p.L = p.J + lambda * p.c + 0.5 * mu * p.c * p.c;
  }
  if (!res.converged) res.message = "outer iteration cap reached";
  res.u = p.x.u;
  res.T = p.x.T;
  return res;
}

}  // namespace

OptimizeResult optimize(const Problem& problem, const ControlTrajectory& u_init, const OptimizeConfig& config) {
  require(config.c1 > 0.0 && config.c1 < 1.0, ErrorKind::invalid_argument, "Armijo c1 must lie in (0, 1)");
  require(config.backtrack > 0.0 && config.backtrack < 1.0, ErrorKind::invalid_argument,
          "backtracking factor must lie in (0, 1)");
  require(config.grad_tol > 0.0 && config.inner_tol > 0.0 && config.feasibility_tol > 0.0,
          ErrorKind::invalid_argument, "tolerances must be positive");
  require(config.uad.kind == AdmissibleSet::Kind::whole_space || config.uad.radius > 0.0,
          ErrorKind::invalid_argument, "ball radius must be positive");
  require(u_init.grid() == problem.m0.grid(), ErrorKind::grid_mismatch, "initial control on a different grid");

  OptimizeResult res = config.mode == OptimizeMode::reduced ? optimize_reduced(problem, u_init, config)
                                                            : optimize_penalty(problem, u_init, config);
  if (config.report) {
    try {
      res.report = check_optimality(res.u, problem, config);
      res.has_report = true;
    } catch (const Error& e) {
      if (!recoverable(e.kind())) throw;
    }
  }
  return res;
}

std::vector<ControlTrajectory> smooth_probes(const ControlTrajectory& shape, const SobolevMetric& metric,
                                             const ProbeConfig& config) {
  const Grid& g = shape.grid();
  const double horizon = shape.horizon();
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  const int sm = std::max(1, config.space_modes);
  const int tm = std::max(1, config.time_modes);
  std::vector<std::array<int, 3>> space;
  for (int a = 0; a < (g.dim > 2 ? sm : 1); ++a)
    for (int b = 0; b < (g.dim > 1 ? sm : 1); ++b)
      for (int c = 0; c < sm; ++c) space.push_back({c, b, a});

  std::vector<ControlTrajectory> probes;
  for (int p = 0; p < config.count; ++p) {
    // coefficients[space][time] per component
    std::vector<Vec3> coeff(space.size() * tm);
    for (std::size_t s = 0; s < space.size(); ++s)
      for (int k = 0; k < tm; ++k) {
        const double damp = 1.0 / (1.0 + space[s][0] + space[s][1] + space[s][2] + k);
        coeff[s * tm + k] = damp * Vec3{coef(rng), coef(rng), coef(rng)};
      }
    std::vector<VectorField> frames;
    for (double t : shape.times()) {
      frames.push_back(VectorField::from_function(g, [&](const std::array<double, 3>& x) {
        Vec3 v{};
        for (std::size_t s = 0; s < space.size(); ++s) {
          double sp = 1.0;
          for (int a = 0; a < g.dim; ++a) sp *= std::cos(space[s][a] * M_PI * x[a] / g.extent[a]);
          for (int k = 0; k < tm; ++k) v += (sp * std::cos(k * M_PI * t / horizon)) * coeff[s * tm + k];
        }
        return v;
      }));
    }
    ControlTrajectory h(shape.times(), std::move(frames));
    const double n = norm_U(h, metric);
    if (n > 0.0) h *= 1.0 / n;
    probes.push_back(std::move(h));
  }
  return probes;
}

OptimalityReport check_optimality(const ControlTrajectory& u, const Problem& problem, const OptimizeConfig& config) {
  const SobolevMetric& metric = problem.metric;
  OptimalityReport rep;
  const Evaluation ev = evaluate(u, problem);
  rep.t_hit = ev.hp.time();
  rep.horizon = problem.solver.horizon;
  rep.J = ev.cost.total;
  rep.con1 = rep.t_hit > 0.0 && rep.t_hit < rep.horizon * (1.0 - 1e-9);
  rep.transversality =
      check_transversality(ev.hp.residual, ev.hp.m_t, ev.hp.time(), problem.transversality_eps);
  if (!rep.transversality.pass) {
    rep.verdict = false;
    return rep;
  }
  const AdjointTrajectory phi = solve_adjoint(ev.state, ev.hp, problem.transversality_eps);
  const ControlTrajectory g = riesz_gradient(phi, u, metric, problem.gram_tol);
  const double gg = inner_U(g, g, metric);
  rep.grad_norm = std::sqrt(gg);

  const double un = norm_U(u, metric);
  const bool ball_active =
      config.uad.kind == AdmissibleSet::Kind::ball && un >= config.uad.radius * (1.0 - 1e-10) && un > 0.0;

  rep.min_Y = std::numeric_limits<double>::infinity();
  rep.min_Q = std::numeric_limits<double>::infinity();
  auto add_y = [&](const std::string& kind, const ControlTrajectory& h) {
    ProbeResult r;
    r.kind = kind;
    r.Y = first_order_Y(h, phi, u, metric);
    rep.min_Y = std::min(rep.min_Y, r.Y);
    rep.probes.push_back(r);
  };

  const auto probes = smooth_probes(u, metric, config.probes);
  for (const auto& h : probes) {
    for (double sign : {1.0, -1.0}) {
      ControlTrajectory hh = sign * h;
      if (ball_active) {
        const double uh = inner_U(u, hh, metric);
        if (uh > 0.0) axpy(-uh / (un * un), u, hh);
        const double n = norm_U(hh, metric);
        if (n == 0.0) continue;
        hh *= 1.0 / n;
      }
      add_y("feasible", hh);
    }
  }
  if (rep.grad_norm > 0.0 && !ball_active) add_y("descent", (-1.0 / rep.grad_norm) * g);

  for (const auto& h : probes) {
    ControlTrajectory hc = h;
    if (gg > 0.0) axpy(-inner_U(g, h, metric) / gg, g, hc);
    const double n = norm_U(hc, metric);
    if (n == 0.0) continue;
    hc *= 1.0 / n;
    const auto z = solve_linearized(ev.state, hc);
    const auto curv = curvature_G(z, ev.state, ev.hp, phi, problem.transversality_eps);
    ProbeResult r;
    r.kind = "critical";
    r.Y = first_order_Y(hc, phi, u, metric);
    r.D = curv.D;
    r.G = curv.G;
    r.Q = quadratic_Q(curv.D, curv.G, ev.hp.time(), inner_U(hc, hc, metric));
    rep.min_Q = std::min(rep.min_Q, r.Q);
    rep.probes.push_back(r);
  }
  rep.y_ok = rep.min_Y >= -config.probes.y_tol;
  rep.q_ok = rep.min_Q > 0.0;
  rep.verdict = rep.y_ok && rep.q_ok && rep.transversality.pass && rep.con1;
  return rep;
}

nlohmann::json to_json(const TransversalityCheck& check) {
  return {{"numerator", check.numerator},
          {"denominator", check.denominator},
          {"epsilon", check.epsilon},
          {"pass", check.pass}};
}

nlohmann::json to_json(const OptimalityReport& report) {
  nlohmann::json probes = nlohmann::json::array();
  for (const auto& p : report.probes) probes.push_back({{"kind", p.kind}, {"Y", p.Y}, {"D", p.D}, {"G", p.G}, {"Q", p.Q}});
  auto finite_or_null = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  return {{"t_hit", report.t_hit},
          {"horizon", report.horizon},
          {"J", report.J},
          {"grad_norm", report.grad_norm},
          {"transversality", to_json(report.transversality)},
          {"con1", report.con1},
          {"min_Y", finite_or_null(report.min_Y)},
          {"min_Q", finite_or_null(report.min_Q)},
          {"y_ok", report.y_ok},
          {"q_ok", report.q_ok},
          {"verdict", report.verdict},
          {"probes", probes}};
}

std::string iteration_log_csv(const std::vector<IterationRecord>& history) {
  std::ostringstream out;
  out.precision(17);
  out << "iter,J,time_term,control_term,grad_norm,T,constraint_violation\n";
  for (const auto& r : history)
    out << r.iter << ',' << r.J << ',' << r.time_term << ',' << r.control_term << ',' << r.grad_norm << ',' << r.T
        << ',' << r.constraint_violation << '\n';
  return out.str();
}

void write_iteration_log(const std::filesystem::path& path, const std::vector<IterationRecord>& history) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorKind::io, "cannot write " + path.string());
  out << iteration_log_csv(history);
}

}  // namespace llbtoc
