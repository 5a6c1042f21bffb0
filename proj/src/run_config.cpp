#include "llbtoc/run_config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "llbtoc/error.hpp"
#include "llbtoc/snapshot.hpp"

namespace llbtoc {

using nlohmann::json;
namespace fs = std::filesystem;

Problem RunConfig::problem() const {
  Problem p(m0, target, solver);
  p.mode = mode;
  p.transversality_eps = transversality_eps;
  p.gram_tol = gram_tol;
  return p;
}

json preset_document(const std::string& name) {
  if (name == "radial") {
    return json::parse(R"({
      "grid": {"dim": 1, "cells": [16], "extent": [1.0]},
      "initial": {"preset": "constant", "value": [1, 0, 0]},
      "target": {"field": {"preset": "constant", "value": [0, 0, 0]}, "delta": 0.5},
      "control": {"preset": "zero", "intervals": 8},
      "solver": {"dt": 1e-4, "horizon": 1.0},
      "output": {"stride": 100}
    })");
  }
  if (name == "smooth-1d" || name == "smooth-2d") {
    const bool two = name == "smooth-2d";
    json doc = json::parse(R"({
      "initial": {"preset": "cosine-bump", "offset": [0.9, 0.1, 0.2], "amplitude": [0.2, 0.3, 0.0]},
      "target": {"field": {"preset": "constant", "value": [0.05, 0.1, 0.1]}, "delta": 0.45},
      "control": {"preset": "zero", "intervals": 6},
      "solver": {"dt": 1e-3, "horizon": 0.6},
      "output": {"stride": 50}
    })");
    doc["grid"] = two ? json{{"dim", 2}, {"cells", {32, 32}}, {"extent", {1.0, 1.0}}}
                      : json{{"dim", 1}, {"cells", {64}}, {"extent", {1.0}}};
    doc["initial"]["modes"] = two ? json{1, 1} : json{1};
    return doc;
  }
  fail(ErrorKind::invalid_argument, "unknown preset '" + name + "' (radial, smooth-1d, smooth-2d)");
}

namespace {

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  return j.at(key).get<T>();
}

Vec3 get_vec3(const json& j) {
  const auto v = j.get<std::vector<double>>();
  require(v.size() == 3, ErrorKind::parse, "expected a three-component vector");
  return {v[0], v[1], v[2]};
}

struct Resolver {
  const fs::path& base_dir;
  std::vector<fs::path>& inputs;

  fs::path resolve(const std::string& p) const {
    const fs::path path = fs::path(p).is_absolute() ? fs::path(p) : base_dir / p;
    require(fs::exists(path), ErrorKind::io, "missing input file " + path.string());
    inputs.push_back(path);
    return path;
  }

  VectorField field(const json& spec, const Grid& grid) const {
    const std::string preset = spec.at("preset").get<std::string>();
    if (preset == "constant") return VectorField(grid, get_vec3(spec.at("value")));
    if (preset == "cosine-bump") {
      const Vec3 offset = spec.contains("offset") ? get_vec3(spec.at("offset")) : Vec3{};
      const Vec3 amplitude = get_vec3(spec.at("amplitude"));
      const auto modes = get_or<std::vector<int>>(spec, "modes", std::vector<int>(grid.dim, 1));
      require(static_cast<int>(modes.size()) == grid.dim, ErrorKind::invalid_argument,
              "cosine-bump needs one mode per axis");
      return VectorField::from_function(grid, [&](const std::array<double, 3>& x) {
        double c = 1.0;
        for (int a = 0; a < grid.dim; ++a) c *= std::cos(modes[a] * M_PI * x[a] / grid.extent[a]);
        return offset + c * amplitude;
      });
    }
    if (preset == "file") {
      Snapshot s = read_snapshot(resolve(spec.at("path").get<std::string>()));
      require(s.field.grid() == grid, ErrorKind::grid_mismatch, "snapshot grid differs from the configured grid");
      return std::move(s.field);
    }
    fail(ErrorKind::invalid_argument, "unknown field preset '" + preset + "' (constant, cosine-bump, file)");
  }

  ControlTrajectory control(const json& spec, const Grid& grid, double horizon, std::uint64_t seed) const {
    const std::string preset = spec.at("preset").get<std::string>();
    const int intervals = get_or<int>(spec, "intervals", 8);
    require(intervals >= 1, ErrorKind::invalid_argument, "a control needs at least one interval");
    ControlTrajectory u;
    if (preset == "zero") {
      u = ControlTrajectory::constant(grid, horizon, intervals);
    } else if (preset == "constant") {
      u = ControlTrajectory::constant(grid, horizon, intervals, get_vec3(spec.at("value")));
    } else if (preset == "field") {
      const VectorField f = field(spec.at("field"), grid);
      u = ControlTrajectory::constant(grid, horizon, intervals);
      for (auto& frame : u.frames()) frame = f;
    } else if (preset == "file") {
      u = read_control(resolve(spec.at("path").get<std::string>()));
      require(u.grid() == grid, ErrorKind::grid_mismatch, "control grid differs from the configured grid");
    } else if (preset == "probe") {
      u = probe(ControlTrajectory::constant(grid, horizon, intervals), get_or<std::uint64_t>(spec, "seed", seed));
      u *= get_or<double>(spec, "scale", 1.0);
    } else {
      fail(ErrorKind::invalid_argument, "unknown control preset '" + preset + "' (zero, constant, field, file, probe)");
    }
    if (spec.contains("perturb")) {
      const json& p = spec.at("perturb");
      axpy(p.at("scale").get<double>(), probe(u, get_or<std::uint64_t>(p, "seed", seed)), u);
    }
    return u;
  }

  static ControlTrajectory probe(const ControlTrajectory& shape, std::uint64_t seed) {
    ProbeConfig pc;
    pc.count = 1;
    pc.seed = seed;
    return smooth_probes(shape, SobolevMetric(shape.grid()), pc).front();
  }
};

Grid parse_grid(const json& j) {
  const int dim = j.at("dim").get<int>();
  const auto cells = j.at("cells").get<std::vector<int>>();
  const auto extent = get_or<std::vector<double>>(j, "extent", std::vector<double>(cells.size(), 1.0));
  require(static_cast<int>(cells.size()) == dim && static_cast<int>(extent.size()) == dim,
          ErrorKind::invalid_argument, "grid cells and extent need one entry per axis");
  return make_grid(dim, cells, extent);
}

OptimizeConfig parse_optimizer(const json& j, std::uint64_t seed) {
  OptimizeConfig c;
  const std::string mode = get_or<std::string>(j, "mode", "reduced");
  if (mode == "reduced") {
    c.mode = OptimizeMode::reduced;
  } else if (mode == "penalty") {
    c.mode = OptimizeMode::penalty;
  } else {
    fail(ErrorKind::invalid_argument, "optimizer mode must be reduced or penalty");
  }
  c.max_iters = get_or(j, "max_iters", c.max_iters);
  c.c1 = get_or(j, "c1", c.c1);
  c.backtrack = get_or(j, "backtrack", c.backtrack);
  c.max_backtracks = get_or(j, "max_backtracks", c.max_backtracks);
  c.initial_step = get_or(j, "initial_step", c.initial_step);
  c.grad_tol = get_or(j, "grad_tol", c.grad_tol);
  c.mu0 = get_or(j, "mu0", c.mu0);
  c.mu_growth = get_or(j, "mu_growth", c.mu_growth);
  c.mu_max = get_or(j, "mu_max", c.mu_max);
  c.outer_iters = get_or(j, "outer_iters", c.outer_iters);
  c.inner_iters = get_or(j, "inner_iters", c.inner_iters);
  c.lbfgs_memory = get_or(j, "lbfgs_memory", c.lbfgs_memory);
  c.inner_tol = get_or(j, "inner_tol", c.inner_tol);
  c.feasibility_tol = get_or(j, "feasibility_tol", c.feasibility_tol);
  c.initial_T = get_or(j, "initial_T", c.initial_T);
  if (j.contains("uad")) {
    const json& u = j.at("uad");
    const std::string kind = u.at("kind").get<std::string>();
    if (kind == "ball") {
      c.uad = {AdmissibleSet::Kind::ball, u.at("radius").get<double>()};
      require(c.uad.radius > 0.0, ErrorKind::invalid_argument, "ball radius must be positive");
    } else {
      require(kind == "whole_space", ErrorKind::invalid_argument, "uad kind must be whole_space or ball");
    }
  }
  c.probes.seed = seed;
  if (j.contains("probes")) {
    const json& p = j.at("probes");
    c.probes.count = get_or(p, "count", c.probes.count);
    c.probes.seed = get_or<std::uint64_t>(p, "seed", seed);
    c.probes.space_modes = get_or(p, "space_modes", c.probes.space_modes);
    c.probes.time_modes = get_or(p, "time_modes", c.probes.time_modes);
    c.probes.y_tol = get_or(p, "y_tol", c.probes.y_tol);
  }
  return c;
}

RunConfig parse_impl(json doc, const fs::path& base_dir, std::optional<std::uint64_t> seed_override) {
  require(doc.is_object(), ErrorKind::parse, "config must be a JSON object");
  if (doc.contains("preset")) {
    json merged = preset_document(doc.at("preset").get<std::string>());
    json rest = doc;
    rest.erase("preset");
    merged.merge_patch(rest);
    doc = std::move(merged);
  }
  if (seed_override) doc["seed"] = *seed_override;

  RunConfig rc;
  rc.base_dir = base_dir;
  rc.seed = get_or<std::uint64_t>(doc, "seed", 0);
  const Resolver res{rc.base_dir, rc.inputs};

  rc.grid = parse_grid(doc.at("grid"));
  const json solver = doc.value("solver", json::object());
  rc.solver.dt = get_or(solver, "dt", rc.solver.dt);
  rc.solver.horizon = get_or(solver, "horizon", rc.solver.horizon);
  rc.solver.cg_tol = get_or(solver, "cg_tol", rc.solver.cg_tol);
  rc.solver.blowup_cap = get_or(solver, "blowup_cap", rc.solver.blowup_cap);
  require(rc.solver.horizon > 0.0, ErrorKind::invalid_argument, "horizon must be positive");
  require(rc.solver.dt > 0.0, ErrorKind::invalid_argument, "dt must be positive");

  rc.m0 = res.field(doc.at("initial"), rc.grid);
  const json& target = doc.at("target");
  rc.target.m_omega = res.field(target.at("field"), rc.grid);
  rc.target.delta = target.at("delta").get<double>();
  require(rc.target.delta > 0.0, ErrorKind::invalid_argument, "delta must be positive");

  const json adjoint = doc.value("adjoint", json::object());
  const std::string mode = get_or<std::string>(adjoint, "mode", "discrete");
  require(mode == "discrete" || mode == "continuous", ErrorKind::invalid_argument,
          "adjoint mode must be discrete or continuous");
  rc.mode = mode == "discrete" ? AdjointMode::discrete : AdjointMode::continuous;
  rc.transversality_eps = get_or(adjoint, "transversality_eps", rc.transversality_eps);
  rc.gram_tol = get_or(adjoint, "gram_tol", rc.gram_tol);

  rc.control = res.control(doc.value("control", json{{"preset", "zero"}}), rc.grid, rc.solver.horizon, rc.seed);
  // Without an explicit direction, a seeded smooth probe on the control's own nodes.
  rc.direction = doc.contains("direction") ? res.control(doc.at("direction"), rc.grid, rc.solver.horizon, rc.seed)
                                           : Resolver::probe(rc.control, rc.seed);

  rc.optimizer = parse_optimizer(doc.value("optimizer", json::object()), rc.seed);

  const json taylor = doc.value("taylor", json::object());
  rc.taylor.rho_max = get_or(taylor, "rho_max", rc.taylor.rho_max);
  rc.taylor.count = get_or(taylor, "count", rc.taylor.count);
  require(rc.taylor.rho_max > 0.0 && rc.taylor.count >= 2, ErrorKind::invalid_argument,
          "taylor sweep needs rho_max > 0 and at least two points");
  if (taylor.contains("kinds")) {
    rc.taylor.kinds.clear();
    for (const auto& k : taylor.at("kinds")) rc.taylor.kinds.push_back(parse_sweep_kind(k.get<std::string>()));
  }

  const json energy = doc.value("energy", json::object());
  rc.energy.constant = get_or(energy, "constant", rc.energy.constant);
  if (energy.contains("threshold")) rc.energy.threshold = energy.at("threshold").get<double>();

  const json output = doc.value("output", json::object());
  rc.stride = get_or<std::size_t>(output, "stride", rc.stride);
  require(rc.stride >= 1, ErrorKind::invalid_argument, "output stride must be at least 1");

  rc.document = std::move(doc);
  return rc;
}

}  // namespace

RunConfig parse_run_config(const json& document, const fs::path& base_dir, std::optional<std::uint64_t> seed_override,
                           const json& patch) {
  try {
    json doc = document;
    if (doc.is_object()) doc.merge_patch(patch);
    return parse_impl(std::move(doc), base_dir, seed_override);
  } catch (const json::exception& e) {
    fail(ErrorKind::parse, std::string("config: ") + e.what());
  }
}

RunConfig load_run_config(const fs::path& path, std::optional<std::uint64_t> seed_override, const json& patch) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::io, "cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorKind::parse, "config " + path.string() + ": " + e.what());
  }
  fs::path base = fs::absolute(path).parent_path();
  if (doc.is_object() && doc.contains("manifest_version")) {
    try {
      base = doc.at("base_dir").get<std::string>();
      doc = doc.at("config");
    } catch (const json::exception& e) {
      fail(ErrorKind::parse, "manifest " + path.string() + ": " + e.what());
    }
  }
  return parse_run_config(doc, base, seed_override, patch);
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string config_hash(const json& document) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(document.dump())));
  return buf;
}

int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::parse:
    case ErrorKind::invalid_argument:
    case ErrorKind::grid_mismatch:
    case ErrorKind::out_of_range:
      return 2;
    case ErrorKind::target_unreachable:
    case ErrorKind::initial_control_misses_tube:
      return 3;
    case ErrorKind::transversality_violation:
      return 4;
    case ErrorKind::diverged:
      return 5;
    case ErrorKind::non_convergence:
    case ErrorKind::line_search_failure:
      return 6;
    case ErrorKind::trivial_case:
      return 7;
    case ErrorKind::io:
      return 1;
  }
  return 1;
}

}  // namespace llbtoc
