#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "artdelay/cli.hpp"
#include "artdelay/sdp.hpp"
#include "artdelay/sim.hpp"
#include "fixtures.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace artdelay;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path fresh_dir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / "artdelay_tests" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

json tripint_config(double h) {
  return json{
      {"mode", "analyze"},
      {"system",
       {{"kind", "lti"},
        {"A", {{0, 1, 0}, {0, 0, 1}, {0, 0, 0}}},
        {"B", {0, 0, 1}},
        {"C", {{1, 0, 0}}}}},
      {"controller", {{"gains", {-2e-4, -0.06, -0.342}}}},
      {"parameters", {{"alpha", 1e-3}, {"h", h}, {"q", {30, 60}}}}};
}

json servo_config(const std::string& mode) {
  return json{{"mode", mode},
              {"system", {{"kind", "pid"}, {"a1", 8.4}, {"a2", 0.0}, {"b", 35.71}}},
              {"controller", {{"kp", -10.0}, {"ki", -40.0}, {"kd", -0.65}}},
              {"parameters", {{"alpha", 5.0}, {"h", 4.7e-3}, {"q", 7}}}};
}

json load_json(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  return json::parse(in);
}

fs::path write_config(const fs::path& dir, const json& j) {
  fs::path p = dir / "config.json";
  std::ofstream out(p);
  out << j.dump(2);
  return p;
}

int run_cli(std::vector<std::string> args) {
  std::vector<const char*> argv{"artdelay"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return cli_main(static_cast<int>(argv.size()), argv.data());
}

std::string pointer_of(const json& cfg) {
  try {
    parse_config(cfg);
  } catch (const ConfigError& e) {
    return e.pointer;
  }
  return "";
}

}  // namespace

TEST_CASE("parse_config populates an LTI analyze run") {
  RunConfig cfg = parse_config(tripint_config(0.044));
  CHECK(cfg.mode == "analyze");
  REQUIRE(cfg.lti.has_value());
  CHECK_FALSE(cfg.is_pid());
  CHECK(cfg.lti->n() == 3);
  REQUIRE(cfg.lti_gains.has_value());
  CHECK(cfg.lti_gains->r() == 3);
  CHECK(cfg.alpha == 1e-3);
  REQUIRE(cfg.h.has_value());
  CHECK(*cfg.h == 0.044);
  REQUIRE(cfg.q.has_value());
  CHECK(*cfg.q == std::vector<int>{30, 60});
  CHECK(cfg.sigma == 0.0);
  CHECK(cfg.seed == 42);
}

TEST_CASE("parse_config reports violations by JSON pointer") {
  json base = tripint_config(0.044);

  json no_h = base;
  no_h["parameters"].erase("h");
  CHECK(pointer_of(no_h) == "/parameters/h");

  json bad_kind = base;
  bad_kind["system"]["kind"] = "dc-motor";
  CHECK(pointer_of(bad_kind) == "/system/kind");

  json bad_mode = base;
  bad_mode["mode"] = "optimize";
  CHECK(pointer_of(bad_mode) == "/mode");

  json bad_q = base;
  bad_q["parameters"]["q"] = {60, 30};
  CHECK(pointer_of(bad_q) == "/parameters/q");

  json bad_x0 = base;
  bad_x0["parameters"]["x0"] = {1.0, 2.0, 3.0, 4.0};
  CHECK(pointer_of(bad_x0) == "/parameters/x0");

  json bad_alpha = base;
  bad_alpha["parameters"]["alpha"] = -1.0;
  CHECK(pointer_of(bad_alpha) == "/parameters/alpha");

  // sweep-q is a PID-only search
  json lti_sweep = base;
  lti_sweep["mode"] = "search";
  lti_sweep["search"] = {{"parameter", "sweep-q"}, {"range", {1e-3, 0.05}}};
  CHECK(pointer_of(lti_sweep) == "/search/parameter");

  json bad_gain_shape = base;
  bad_gain_shape["controller"]["gains"] = {{{1.0, 2.0}}, {{3.0, 4.0}}, {{5.0, 6.0}}};
  CHECK(pointer_of(bad_gain_shape).rfind("/controller/gains", 0) == 0);
}

TEST_CASE("controller JSON round-trips") {
  auto ctrl = map_gains(fixtures::triple_integrator_gains(), 0.044, {30, 60});
  SampledController back = lti_controller_from_json(controller_to_json(ctrl));
  CHECK(back.h == ctrl.h);
  CHECK(back.q == ctrl.q);
  REQUIRE(back.K.size() == ctrl.K.size());
  for (size_t i = 0; i < ctrl.K.size(); ++i)
    CHECK((back.K[i] - ctrl.K[i]).norm() == 0.0);

  auto pid = map_pid_gains(fixtures::servo_gains(), 4e-3, 7, 9e-3);
  SampledPidController pback = pid_controller_from_json(controller_to_json(pid));
  CHECK(pback.h == pid.h);
  CHECK(pback.q == pid.q);
  CHECK(pback.kp == pid.kp);
  CHECK(pback.ki == pid.ki);
  CHECK(pback.kd == pid.kd);
  CHECK(pback.sigma == pid.sigma);
}

TEST_CASE("run_analyze writes a reloadable, re-verifiable certificate") {
  fs::path dir = fresh_dir("analyze_ok");
  RunConfig cfg = parse_config(tripint_config(0.044));
  json out = run_analyze(cfg, dir.string());

  CHECK(out["ok"] == true);
  CHECK(out["relative_degree"] == 3);
  CHECK(out["status"] == "feasible");
  CHECK(out["verified"] == true);
  CHECK(out["certificate_file"] == "certificate.json");

  json cert_file = load_json(dir / "certificate.json");
  AffineLmi lmi = AffineLmi::from_json(cert_file["lmi"]);
  Certificate cert = Certificate::from_json(cert_file["certificate"]);
  auto rep = verify_certificate(lmi, cert.values);
  CHECK(rep.pass);
  CHECK(cert_file["verification"]["pass"] == true);
  CHECK(load_json(dir / "analysis.json")["ok"] == true);
}

TEST_CASE("run_analyze reports an infeasible point as a negative outcome") {
  fs::path dir = fresh_dir("analyze_no");
  json cfg_j = tripint_config(0.2);
  cfg_j["parameters"]["q"] = {6, 12};
  json out = run_analyze(parse_config(cfg_j), dir.string());
  CHECK(out["ok"] == false);
  CHECK(out["status"] == "infeasible");
  CHECK(out["lambda_max_bound"].get<double>() > 0);
  CHECK_FALSE(fs::exists(dir / "certificate.json"));
}

TEST_CASE("run_synthesize writes the mapped controller") {
  fs::path dir = fresh_dir("synth");
  json cfg_j = tripint_config(0.044);
  cfg_j["mode"] = "synthesize";
  json out = run_synthesize(parse_config(cfg_j), dir.string());
  CHECK(out["ok"] == true);
  CHECK(out["relative_degree"] == 3);

  auto expect = map_gains(fixtures::triple_integrator_gains(), 0.044, {30, 60});
  SampledController got = lti_controller_from_json(load_json(dir / "controller.json"));
  REQUIRE(got.K.size() == 3);
  for (size_t i = 0; i < 3; ++i) CHECK((got.K[i] - expect.K[i]).norm() == 0.0);
  CHECK(out["delay_free_decay_rate"].get<double>() ==
        doctest::Approx(0.0033988).epsilon(1e-3));
}

TEST_CASE("run_simulate on a single initial state") {
  fs::path dir = fresh_dir("simulate");
  json cfg_j = tripint_config(0.044);
  cfg_j["mode"] = "simulate";
  cfg_j["parameters"]["T"] = 5.0;
  cfg_j["parameters"]["x0"] = {1.0, 1.0, 1.0};
  json out = run_simulate(parse_config(cfg_j), dir.string());

  CHECK(out["ok"] == true);
  CHECK(out["certified"] == true);  // alpha > 0 and the point is feasible
  CHECK(out["event_triggered"] == false);
  REQUIRE(out["runs"].size() == 1);
  CHECK(out["runs"][0]["transmissions"] == out["runs"][0]["samples"]);
  CHECK(out["runs"][0]["lyapunov"]["monotone"] == true);

  CHECK(fs::exists(dir / "trace.csv"));
  CHECK(fs::exists(dir / "certificate.json"));
  json summary = load_json(dir / "summary.json");
  CHECK(summary["samples"] == 114);  // floor(5/0.044) + 1

  std::ifstream tr(dir / "trace.csv");
  std::string header;
  std::getline(tr, header);
  CHECK(header == "k,t,x1,x2,x3,u,transmitted,V");
}

TEST_CASE("run_simulate batches seeded initial states") {
  fs::path dir = fresh_dir("simulate_batch");
  json cfg_j = servo_config("simulate");
  cfg_j["parameters"]["T"] = 2.0;
  cfg_j["parameters"]["sigma"] = 9e-3;
  cfg_j["parameters"]["h"] = 4e-3;
  json out = run_simulate(parse_config(cfg_j), dir.string());

  CHECK(out["ok"] == true);
  CHECK(out["event_triggered"] == true);
  REQUIRE(out["runs"].size() == 10);
  CHECK(out["mean_transmissions"].get<double>() > 0);
  CHECK(out["reduction_percent"].get<double>() > 0);
  CHECK(fs::exists(dir / "trace_0.csv"));
  CHECK(fs::exists(dir / "trace_9.csv"));
  CHECK(fs::exists(dir / "events_0.json"));
  json ev = load_json(dir / "events_0.json");
  CHECK(ev["sigma"] == 9e-3);
  CHECK(ev.contains("sensor_to_controller"));
  CHECK(ev.contains("controller_to_actuator"));
}

TEST_CASE("run_search locates the sigma margin and stores its certificate") {
  fs::path dir = fresh_dir("search_sigma");
  json cfg_j = tripint_config(0.042);
  cfg_j["mode"] = "search";
  cfg_j["search"] = {{"parameter", "sigma"}, {"range", {0.0, 1e-3}}};
  json out = run_search(parse_config(cfg_j), dir.string());

  CHECK(out["ok"] == true);
  CHECK(out["found"] == true);
  CHECK(out["best"].get<double>() == 1e-3);
  CHECK(fs::exists(dir / "search.csv"));
  CHECK(fs::exists(dir / "search.json"));
  json cert_file = load_json(dir / "certificate.json");
  AffineLmi lmi = AffineLmi::from_json(cert_file["lmi"]);
  Certificate cert = Certificate::from_json(cert_file["certificate"]);
  CHECK(verify_certificate(lmi, cert.values).pass);
}

TEST_CASE("run_search sweep-q writes the sweep table") {
  fs::path dir = fresh_dir("search_sweep");
  json cfg_j = servo_config("search");
  cfg_j["parameters"].erase("h");
  cfg_j["search"] = {{"parameter", "sweep-q"},
                     {"range", {2e-4, 0.05}},
                     {"q_range", {7, 8}}};
  json out = run_search(parse_config(cfg_j), dir.string());
  CHECK(out["ok"] == true);
  CHECK(out["best_q"] == std::vector<int>{7});
  CHECK(fs::exists(dir / "sweep.csv"));
  CHECK(fs::exists(dir / "sweep.json"));
  CHECK(fs::exists(dir / "certificate.json"));
}

TEST_CASE("reproduce runs are deterministic") {
  fs::path d1 = fresh_dir("repro_a");
  fs::path d2 = fresh_dir("repro_b");
  std::ostringstream log1, log2;
  json a = run_reproduce("triple-integrator", d1.string(), log1);
  json b = run_reproduce("triple-integrator", d2.string(), log2);
  CHECK(a.dump() == b.dump());
  CHECK(a["ok"] == true);
  CHECK(log1.str() == log2.str());
  CHECK(fs::exists(d1 / "triple-integrator_report.json"));
  CHECK(fs::exists(d1 / "triple-integrator_periodic_certificate.json"));
  CHECK(fs::exists(d1 / "triple-integrator_event_certificate.json"));
}

TEST_CASE("unknown reproduce id lists the valid ones") {
  fs::path dir = fresh_dir("repro_bad");
  std::ostringstream log;
  CHECK_THROWS_WITH(run_reproduce("pendulum", dir.string(), log),
                    doctest::Contains("triple-integrator"));
}

TEST_CASE("cli_main exit codes") {
  fs::path dir = fresh_dir("exit_codes");

  // feasible analyze: 0
  fs::path ok_cfg = write_config(dir, tripint_config(0.044));
  CHECK(run_cli({"--config", ok_cfg.string(), "--out", (dir / "ok").string()}) == 0);

  // infeasible analyze: negative outcome, 2
  json bad = tripint_config(0.2);
  bad["parameters"]["q"] = {6, 12};
  fs::path bad_cfg = dir / "bad.json";
  std::ofstream(bad_cfg) << bad.dump();
  CHECK(run_cli({"--config", bad_cfg.string(), "--out", (dir / "no").string()}) == 2);

  // schema violation: 1
  json broken = tripint_config(0.044);
  broken["parameters"].erase("h");
  fs::path broken_cfg = dir / "broken.json";
  std::ofstream(broken_cfg) << broken.dump();
  CHECK(run_cli({"--config", broken_cfg.string(), "--out", (dir / "err").string()}) == 1);

  // unparseable file: 1
  fs::path garbage = dir / "garbage.json";
  std::ofstream(garbage) << "{not json";
  CHECK(run_cli({"--config", garbage.string()}) == 1);

  // unknown example: 1
  CHECK(run_cli({"--example", "pendulum", "--out", (dir / "ex").string()}) == 1);

  // reproduce with all checks green: 0
  CHECK(run_cli({"--example", "triple-integrator", "--out", (dir / "tri").string()}) == 0);

  // --mode override wins over the config file
  json synth = tripint_config(0.044);
  fs::path synth_cfg = dir / "synth.json";
  std::ofstream(synth_cfg) << synth.dump();
  CHECK(run_cli({"--config", synth_cfg.string(), "--mode", "synthesize",
                 "--out", (dir / "synth").string()}) == 0);
  CHECK(fs::exists(dir / "synth" / "controller.json"));
}
