// llbtoc: command-line driver for forward runs, hitting times, adjoints, Taylor checks and
// the outer optimization. Every run writes its artifacts and a manifest.json under --out.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "llbtoc/error.hpp"
#include "llbtoc/run_config.hpp"
#include "llbtoc/snapshot.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace llbtoc;

namespace {

struct Options {
  std::string config;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::string control;
  bool quiet = false;
};

class Run {
 public:
  Run(std::string subcommand, const Options& opt) : subcommand_(std::move(subcommand)), opt_(opt), out_(opt.out) {}

  RunConfig& load() {
    json patch = json::object();
    if (!opt_.control.empty()) patch["control"] = {{"preset", "file"}, {"path", fs::absolute(opt_.control).string()}};
    rc_ = load_run_config(opt_.config, opt_.seed, patch);
    fs::create_directories(out_);
    return *rc_;
  }

  const fs::path& out() const { return out_; }

  void write_text(const fs::path& rel, const std::string& text) {
    const fs::path p = out_ / rel;
    fs::create_directories(p.parent_path());
    std::ofstream f(p, std::ios::binary);
    require(static_cast<bool>(f), ErrorKind::io, "cannot write " + p.string());
    f << text;
    outputs_.push_back(rel);
  }

  /// Records a file written directly by a library call.
  void add_output(const fs::path& rel) { outputs_.push_back(rel); }

  void write_json(const fs::path& rel, const json& j) { write_text(rel, j.dump(2) + "\n"); }

  void write_field(const fs::path& rel, const VectorField& f, SnapshotRole role) {
    write_text(rel, encode_snapshot(f, role));
  }

  void write_control_files(const fs::path& rel_json, const ControlTrajectory& u) {
    fs::create_directories((out_ / rel_json).parent_path());
    write_control(out_ / rel_json, u);
    outputs_.push_back(rel_json);
    for (std::size_t k = 0; k < u.node_count(); ++k) {
      char name[64];
      std::snprintf(name, sizeof name, "%s_%04zu.llbf", rel_json.stem().string().c_str(), k);
      outputs_.push_back(rel_json.parent_path() / name);
    }
  }

  void say(const std::string& line) const {
    if (!opt_.quiet) std::cout << line << '\n';
  }

  void finish(int code, const std::string& error = {}) {
    if (!fs::exists(out_)) return;
    json m;
    m["manifest_version"] = 1;
    m["program"] = "llbtoc";
    m["version"] = kVersion;
    m["subcommand"] = subcommand_;
    m["config_path"] = fs::absolute(opt_.config).string();
    m["exit_code"] = code;
    if (!error.empty()) m["error"] = error;
    m["versions"] = {{"compiler", __VERSION__}, {"cli11", CLI11_VERSION},
                     {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                           std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                           std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
    if (rc_) {
      m["base_dir"] = rc_->base_dir.string();
      m["seed"] = rc_->seed;
      m["config"] = rc_->document;
      m["config_hash"] = config_hash(rc_->document);
      json inputs = json::array();
      for (const auto& p : rc_->inputs) inputs.push_back({{"path", p.string()}, {"fnv1a", file_hash(p)}});
      m["inputs"] = inputs;
    }
    json outputs = json::array();
    for (const auto& rel : outputs_) outputs.push_back({{"path", rel.generic_string()}, {"fnv1a", file_hash(out_ / rel)}});
    m["outputs"] = outputs;
    std::ofstream f(out_ / "manifest.json");
    f << m.dump(2) << '\n';
  }

 private:
  static std::string file_hash(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(s.str())));
    return buf;
  }

  std::string subcommand_;
  Options opt_;
  fs::path out_;
  std::optional<RunConfig> rc_;
  std::vector<fs::path> outputs_;
};

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string frame_name(const char* role, std::size_t n) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "frames/%s_%06zu.llbf", role, n);
  return buf;
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(10);
  s << v;
  return s.str();
}

int cmd_simulate(Run& run) {
  const RunConfig& rc = run.load();
  const StateTrajectory traj = simulate(rc.m0, rc.control, rc.solver);
  write_trajectory_csv(run.out() / "trajectory.csv", traj, rc.target);
  run.add_output("trajectory.csv");
  for (std::size_t n = 0; n < traj.frames.size(); ++n)
    if (n % rc.stride == 0 || n + 1 == traj.frames.size())
      run.write_field(frame_name("state", n), traj.frames[n], SnapshotRole::state);

  const EnergyReport e = energy_diagnostics(traj, rc.control, rc.energy);
  json hit = nullptr;
  bool inside_at_start = false;
  try {
    if (const auto h = hitting_time(traj, rc.target)) hit = {{"time", h->time}, {"interval", h->interval}};
  } catch (const Error& err) {
    if (err.kind() != ErrorKind::trivial_case) throw;
    inside_at_start = true;
  }
  json d;
  d["steps"] = traj.steps();
  d["final_time"] = traj.final_time();
  d["final_distance"] = distance_to_target(traj.frames.back(), rc.target);
  d["max_abs_m"] = [&] {
    double m = 0.0;
    for (const auto& f : traj.frames) m = std::max(m, linf_norm(f));
    return m;
  }();
  d["hit"] = hit;
  d["inside_tube_at_start"] = inside_at_start;
  d["energy"] = {{"sup_h2eq", num(e.sup_h2eq)},   {"int_h3eq", num(e.int_h3eq)}, {"prefactor", num(e.prefactor)},
                 {"e1", num(e.e1)},               {"e2", num(e.e2)},             {"m_proxy", num(e.m_proxy)},
                 {"smallness_exceeded", e.smallness_exceeded}};
  run.write_json("diagnostics.json", d);
  run.say("simulate: " + std::to_string(traj.steps()) + " steps to t = " + fmt(traj.final_time()) +
          ", final distance " + fmt(d["final_distance"].get<double>()));
  return 0;
}

int cmd_hit_time(Run& run) {
  const RunConfig& rc = run.load();
  const Problem p = rc.problem();
  const Evaluation ev = evaluate(rc.control, p);
  const auto tc = check_transversality(ev.hp.residual, ev.hp.m_t, ev.hp.time(), p.transversality_eps);
  json j;
  j["t_star"] = ev.hp.time();
  j["interval"] = ev.hp.hit.interval;
  j["stencil"] = ev.hp.hit.stencil;
  j["distance"] = ev.hp.hit.distance;
  j["delta"] = rc.target.delta;
  j["mode"] = rc.mode == AdjointMode::discrete ? "discrete" : "continuous";
  j["J"] = ev.cost.total;
  j["time_term"] = ev.cost.time_term;
  j["control_term"] = ev.cost.control_term;
  j["transversality"] = to_json(tc);
  run.write_json("hit_time.json", j);
  run.say("hit-time: T* = " + fmt(ev.hp.time()) + ", J = " + fmt(ev.cost.total));
  return 0;
}

int cmd_adjoint(Run& run) {
  const RunConfig& rc = run.load();
  const Problem p = rc.problem();
  const Evaluation ev = evaluate(rc.control, p);
  const AdjointTrajectory phi = solve_adjoint(ev.state, ev.hp, p.transversality_eps);
  const LinearizedTrajectory z = solve_linearized(ev.state, rc.direction);
  const double D = hitting_time_derivative_D(z, ev.state, ev.hp, p.transversality_eps);
  const double pairing = source_pairing(phi, rc.direction);
  const double residual = duality_residual(z, phi, ev.state, ev.hp);
  for (std::size_t i = 0; i < phi.entries.size(); ++i)
    if (i % rc.stride == 0 || i + 1 == phi.entries.size())
      run.write_field(frame_name("adjoint", i), phi.entries[i].dual, SnapshotRole::adjoint);
  const ControlTrajectory g = riesz_gradient(phi, rc.control, p.metric, p.gram_tol);
  run.write_control_files("gradient/gradient.json", g);

  json j;
  j["t_hit"] = phi.t_hit;
  j["lambda"] = phi.lambda;
  j["mode"] = phi.mode == AdjointMode::discrete ? "discrete" : "continuous";
  j["entries"] = phi.entries.size();
  j["transversality"] = to_json(phi.check);
  j["duality_residual"] = residual;
  j["T_times_D"] = ev.hp.time() * D;
  j["source_pairing"] = pairing;
  j["gradient_norm_U"] = norm_U(g, p.metric);
  run.write_json("adjoint.json", j);
  run.say("adjoint: duality residual " + fmt(residual) + ", T*D = " + fmt(ev.hp.time() * D) +
          ", pairing = " + fmt(pairing));
  return 0;
}

int sweeps(Run& run, bool gradient_only) {
  const RunConfig& rc = run.load();
  const std::vector<SweepKind> kinds = gradient_only ? std::vector<SweepKind>{SweepKind::gradient} : rc.taylor.kinds;
  const std::string stem = gradient_only ? "grad_check" : "taylor";
  const Problem p = rc.problem();
  const auto rho = default_rho(rc.taylor.rho_max, rc.taylor.count);
  json all = json::array();
  bool pass = true;
  for (SweepKind k : kinds) {
    const SweepReport rep = taylor_sweep(k, p, rc.control, rc.direction, rho);
    const std::string name = gradient_only ? stem : stem + "_" + to_string(k);
    run.write_text(name + ".csv", sweep_csv(rep));
    all.push_back(to_json(rep));
    pass = pass && rep.pass;
    run.say(std::string(to_string(k)) + ": slope " + fmt(rep.slope) + " (expected " + fmt(rep.expected) + ") " +
            (rep.pass ? "pass" : "FAIL"));
  }
  run.write_json(stem + ".json", json{{"pass", pass}, {"sweeps", all}});
  return pass ? 0 : kExitVerificationFailed;
}

int cmd_optimize(Run& run) {
  const RunConfig& rc = run.load();
  const Problem p = rc.problem();
  const OptimizeResult res = optimize(p, rc.control, rc.optimizer);
  run.write_text("iterations.csv", iteration_log_csv(res.history));
  run.write_control_files("control/u.json", res.u);
  json j;
  j["mode"] = rc.optimizer.mode == OptimizeMode::reduced ? "reduced" : "penalty";
  j["converged"] = res.converged;
  j["message"] = res.message;
  j["T"] = res.T;
  j["iterations"] = res.history.size();
  if (!res.history.empty()) {
    j["J"] = res.history.back().J;
    j["grad_norm"] = res.history.back().grad_norm;
    j["constraint_violation"] = res.history.back().constraint_violation;
  }
  if (res.has_report) j["report"] = to_json(res.report);
  run.write_json("optimize.json", j);
  run.say("optimize: " + res.message + ", T = " + fmt(res.T) +
          (res.history.empty() ? "" : ", J = " + fmt(res.history.back().J)));
  return res.converged ? 0 : exit_code(ErrorKind::non_convergence);
}

int cmd_verify(Run& run) {
  const RunConfig& rc = run.load();
  const OptimalityReport rep = check_optimality(rc.control, rc.problem(), rc.optimizer);
  run.write_json("verify.json", to_json(rep));
  run.say(std::string("verify: ") + (rep.verdict ? "PASS" : "FAIL") + " (min Y " + fmt(rep.min_Y) + ", min Q " +
          fmt(rep.min_Q) + ", grad " + fmt(rep.grad_norm) + ")");
  return rep.verdict ? 0 : kExitVerificationFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-optimal control of the Landau-Lifshitz-Bloch equation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  Options opt;

  struct Sub {
    const char* name;
    const char* help;
  };
  const std::vector<Sub> subs{
      {"simulate", "forward run with trajectory CSV, snapshots and energy diagnostics"},
      {"hit-time", "minimal hitting time of the target tube"},
      {"adjoint", "backward solve, duality residual and Riesz gradient"},
      {"grad-check", "Taylor sweep of the reduced cost against the adjoint gradient"},
      {"taylor", "all five Taylor remainder sweeps"},
      {"optimize", "outer optimization over control (and final time in penalty mode)"},
      {"verify", "first- and second-order optimality report for a candidate control"},
  };
  for (const auto& s : subs) {
    CLI::App* sc = app.add_subcommand(s.name, s.help);
    sc->add_option("--config", opt.config, "JSON run configuration or a previous manifest.json")
        ->required()
        ->check(CLI::ExistingFile);
    sc->add_option("--out", opt.out, "output directory")->capture_default_str();
    sc->add_option("--seed", opt.seed, "seed for probes and perturbation directions");
    sc->add_option("--control", opt.control, "control JSON file replacing the configured control")
        ->check(CLI::ExistingFile);
    sc->add_flag("--quiet", opt.quiet, "suppress the summary line");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  Run run(name, opt);
  int code = 0;
  try {
    if (name == "simulate") code = cmd_simulate(run);
    else if (name == "hit-time") code = cmd_hit_time(run);
    else if (name == "adjoint") code = cmd_adjoint(run);
    else if (name == "grad-check") code = sweeps(run, true);
    else if (name == "taylor") code = sweeps(run, false);
    else if (name == "optimize") code = cmd_optimize(run);
    else if (name == "verify") code = cmd_verify(run);
    run.finish(code);
  } catch (const Error& e) {
    code = exit_code(e.kind());
    std::cerr << "llbtoc " << name << ": " << to_string(e.kind()) << ": " << e.what() << '\n';
    run.finish(code, std::string(to_string(e.kind())) + ": " + e.what());
  } catch (const std::exception& e) {
    code = 1;
    std::cerr << "llbtoc " << name << ": " << e.what() << '\n';
    run.finish(code, e.what());
  }
  return code;
}
