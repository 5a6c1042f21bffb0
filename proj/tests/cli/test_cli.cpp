#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "llbtoc/snapshot.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path work_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("llbtoc_cli_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int run(const std::string& args) {
  const std::string cmd = std::string(LLBTOC_CLI) + " " + args + " --quiet > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path write_config(const std::string& name, const json& doc) {
  const fs::path p = work_dir() / name;
  std::ofstream(p) << doc.dump(2);
  return p;
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string out(const std::string& name) { return (work_dir() / name).string(); }

}  // namespace

TEST_CASE("hit-time on the radial preset") {
  const auto cfg = write_config("radial.json", {{"preset", "radial"}});
  REQUIRE(run("hit-time --config " + cfg.string() + " --out " + out("hit")) == 0);
  const json r = read_json(out("hit") + "/hit_time.json");
  CHECK(std::abs(r["t_star"].get<double>() - 0.45815) < 1e-3);
  CHECK(r["transversality"]["pass"] == true);
  const json m = read_json(out("hit") + "/manifest.json");
  CHECK(m["subcommand"] == "hit-time");
  CHECK(m["config_hash"].get<std::string>().size() == 16);
  CHECK(m["exit_code"] == 0);
}

TEST_CASE("simulate with zero initial data writes zero frames") {
  const json doc = {{"preset", "radial"},
                    {"initial", {{"preset", "constant"}, {"value", {0, 0, 0}}}},
                    {"solver", {{"dt", 1e-2}, {"horizon", 0.2}}},
                    {"output", {{"stride", 5}}}};
  const auto cfg = write_config("zero.json", doc);
  REQUIRE(run("simulate --config " + cfg.string() + " --out " + out("zero")) == 0);
  int frames = 0;
  for (const auto& e : fs::directory_iterator(out("zero") + "/frames")) {
    const auto s = llbtoc::read_snapshot(e.path());
    CHECK(llbtoc::linf_norm(s.field) == 0.0);
    ++frames;
  }
  CHECK(frames == 5);
  const json d = read_json(out("zero") + "/diagnostics.json");
  CHECK(d["max_abs_m"] == 0.0);
  CHECK(d["energy"]["sup_h2eq"] == 0.0);
  CHECK(d["energy"]["int_h3eq"] == 0.0);
  CHECK(d["inside_tube_at_start"] == true);
}

TEST_CASE("optimize, verify and a perturbed candidate") {
  const json doc = {{"preset", "radial"}, {"solver", {{"dt", 1e-3}}}, {"optimizer", {{"grad_tol", 1e-8}}}};
  const auto cfg = write_config("opt.json", doc);
  REQUIRE(run("optimize --config " + cfg.string() + " --out " + out("opt")) == 0);
  const std::string u = out("opt") + "/control/u.json";
  CHECK(run("verify --config " + cfg.string() + " --control " + u + " --out " + out("ver")) == 0);
  CHECK(read_json(out("ver") + "/verify.json")["verdict"] == true);

  json pert = doc;
  pert["control"] = {{"preset", "file"}, {"path", u}, {"perturb", {{"scale", 0.05}, {"seed", 3}}}};
  const auto pcfg = write_config("pert.json", pert);
  CHECK(run("verify --config " + pcfg.string() + " --out " + out("pert")) == 8);
  const json v = read_json(out("pert") + "/verify.json");
  CHECK(v["y_ok"] == false);
  CHECK(v["verdict"] == false);
}

TEST_CASE("identical runs and manifest replays are bit-identical") {
  const json doc = {{"preset", "smooth-1d"}, {"optimizer", {{"max_iters", 5}}}};
  const auto cfg = write_config("det.json", doc);
  const int a = run("optimize --config " + cfg.string() + " --out " + out("det_a"));
  const int b = run("optimize --config " + cfg.string() + " --out " + out("det_b"));
  CHECK(a == b);
  CHECK(slurp(out("det_a") + "/iterations.csv") == slurp(out("det_b") + "/iterations.csv"));
  CHECK(run("optimize --config " + out("det_a") + "/manifest.json --out " + out("det_c")) == a);
  const json ma = read_json(out("det_a") + "/manifest.json");
  const json mc = read_json(out("det_c") + "/manifest.json");
  CHECK(ma["outputs"] == mc["outputs"]);
  CHECK(ma["config_hash"] == mc["config_hash"]);
}

TEST_CASE("taylor and grad-check sweeps pass on the smooth preset") {
  const json doc = {{"preset", "smooth-1d"}, {"grid", {{"dim", 1}, {"cells", {16}}}}, {"taylor", {{"rho_max", 4e-2}, {"count", 6}}}};
  const auto cfg = write_config("taylor.json", doc);
  CHECK(run("taylor --config " + cfg.string() + " --out " + out("taylor")) == 0);
  CHECK(read_json(out("taylor") + "/taylor.json")["pass"] == true);
  CHECK(run("grad-check --config " + cfg.string() + " --out " + out("grad")) == 0);
  CHECK(fs::exists(out("grad") + "/grad_check.csv"));
}

TEST_CASE("exit codes per error class") {
  std::ofstream(work_dir() / "broken.json") << "{ not json";
  CHECK(run("hit-time --config " + out("broken.json") + " --out " + out("e2")) == 2);
  CHECK(run("hit-time --config " + write_config("neg.json", {{"preset", "radial"}, {"target", {{"delta", -1.0}}}}).string() +
            " --out " + out("e2b")) == 2);
  CHECK(run("frobnicate") == 2);
  CHECK(run("--help") == 0);

  const json far = {{"preset", "radial"}, {"target", {{"field", {{"preset", "constant"}, {"value", {0, 0, 3}}}}}}};
  CHECK(run("hit-time --config " + write_config("far.json", far).string() + " --out " + out("e3")) == 3);
  CHECK(run("optimize --config " + write_config("far2.json", far).string() + " --out " + out("e3b")) == 3);

  const json blow = {{"preset", "radial"},
                     {"solver", {{"dt", 1e-2}}},
                     {"control", {{"preset", "constant"}, {"value", {1e9, 0, 0}}, {"intervals", 2}}}};
  CHECK(run("simulate --config " + write_config("blow.json", blow).string() + " --out " + out("e5")) == 5);

  const json inside = {{"preset", "radial"}, {"target", {{"delta", 2.0}}}};
  CHECK(run("hit-time --config " + write_config("inside.json", inside).string() + " --out " + out("e7")) == 7);

  const json missing = {{"preset", "radial"}, {"initial", {{"preset", "file"}, {"path", "nope.llbf"}}}};
  CHECK(run("hit-time --config " + write_config("missing.json", missing).string() + " --out " + out("e1")) == 1);
  const json m = read_json(out("e3") + "/manifest.json");
  CHECK(m["exit_code"] == 3);
  CHECK(m["error"].get<std::string>().find("target-unreachable") == 0);
}
