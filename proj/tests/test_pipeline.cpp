#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "ewarn/jsonl.hpp"
#include "ewarn/pipeline.hpp"

using namespace ewarn;

namespace {

RoutePath straight_route(double length = 200.0) { return make_route({{0, 0}, {length, 0}}); }

std::string warnings_fingerprint(const std::vector<Warning>& warnings) {
  std::string out;
  for (const Warning& w : warnings) out += to_jsonl(w) + "\n";
  return out;
}

Scenario noiseless(Scenario scn) {
  scn.camera.pixel_jitter_sigma = 0.0;
  scn.camera.quantize = false;
  scn.camera.dropout_prob = 0.0;
  scn.camera.id_switch_prob = 0.0;
  scn.camera.pose_lag_frames = 0;
  scn.noise.gyro = scn.noise.accel = scn.noise.wheel = scn.noise.gps = 0.0;
  return scn;
}

}  // namespace

TEST_CASE("empty detection log replays to an empty warnings log") {
  const Scenario scn = noiseless(make_preset("leadtime"));
  const GeneratedLogs logs = generate(scn);
  const auto warnings = run_pipeline(RunConfig{}, {}, logs.ego, straight_route());
  CHECK(warnings.empty());
}

TEST_CASE("crossing scenario at 15 mph: one early warning from the scripted side") {
  const Scenario scn = noiseless(make_preset("leadtime"));
  const GeneratedLogs logs = generate(scn);
  const auto warnings =
      run_pipeline(RunConfig{}, logs.detections, logs.ego, straight_route());

  int early = 0, emergency = 0;
  for (const Warning& w : warnings) {
    if (w.severity == Severity::early) ++early;
    if (w.severity == Severity::emergency) ++emergency;
  }
  CHECK(early == 1);
  CHECK(emergency == 1);
  REQUIRE_FALSE(warnings.empty());
  // Pedestrian approaches from the right (-y).
  CHECK(warnings.front().severity == Severity::early);
  CHECK(warnings.front().direction == Direction::right);
  CHECK(warnings.front().utterance == "Watch out for the pedestrian on the right");
  CHECK(warnings.front().conflict.s_intercept <= 60.0);
  CHECK(warnings.front().conflict.t_veh < 4.0);
}

TEST_CASE("pipeline output is deterministic") {
  const Scenario scn = make_preset("leadtime");  // default camera noise on
  const GeneratedLogs logs = generate(scn);
  const auto a = run_pipeline(RunConfig{}, logs.detections, logs.ego, straight_route());
  const auto b = run_pipeline(RunConfig{}, logs.detections, logs.ego, straight_route());
  CHECK(warnings_fingerprint(a) == warnings_fingerprint(b));
}

TEST_CASE("lead time between early and emergency is 3 s in the noiseless run") {
  const Scenario scn = noiseless(make_preset("leadtime"));
  const GeneratedLogs logs = generate(scn);
  const RoutePath route = straight_route();
  const RunConfig cfg;
  const auto warnings = run_pipeline(cfg, logs.detections, logs.ego, route);
  const ScenarioEval eval = evaluate(warnings, logs.truth, route, cfg);

  REQUIRE(eval.lead_time.has_value());
  CHECK(std::abs(*eval.lead_time - 3.0) <= 1.0 / 36.0 + 1e-9);
  CHECK(eval.false_warnings == 0);
  CHECK(eval.missed_conflicts == 0);
  REQUIRE(eval.direction_accuracy.has_value());
  CHECK(*eval.direction_accuracy == 1.0);
}

TEST_CASE("parallel walker draws no warnings; any would be false by definition") {
  const Scenario scn = noiseless(make_preset("parallel"));
  const GeneratedLogs logs = generate(scn);
  const RoutePath route = straight_route();
  const RunConfig cfg;
  const auto warnings = run_pipeline(cfg, logs.detections, logs.ego, route);
  CHECK(warnings.empty());

  const ScenarioEval eval = evaluate(warnings, logs.truth, route, cfg);
  CHECK(eval.false_warnings == 0);
  CHECK(eval.missed_conflicts == 0);

  // Forged warning against this scenario counts as false.
  Warning fake;
  fake.t_issued = 3.0;
  fake.track_id = 1;
  fake.conflict.s_intercept = 30.0;
  fake.conflict.t_veh = 3.5;
  const ScenarioEval forged = evaluate({fake}, logs.truth, route, cfg);
  CHECK(forged.false_warnings == 1);
}

TEST_CASE("ghost continuation keeps warning after the pedestrian leaves the view") {
  // Stop the detection stream early; the fitted trajectory must carry the
  // conflict across the gap (up to 4 s).
  const Scenario scn = noiseless(make_preset("leadtime"));
  GeneratedLogs logs = generate(scn);
  std::vector<Detection> truncated;
  for (const Detection& det : logs.detections) {
    if (det.t <= 8.5) truncated.push_back(det);
  }
  REQUIRE_FALSE(truncated.empty());

  const auto warnings = run_pipeline(RunConfig{}, truncated, logs.ego, straight_route());
  bool emergency_from_ghost = false;
  for (const Warning& w : warnings) {
    if (w.severity == Severity::emergency && w.t_issued > 8.7) emergency_from_ghost = true;
  }
  CHECK(emergency_from_ghost);
}

TEST_CASE("id switch mid-crossing is bridged by re-association") {
  const Scenario scn = noiseless(make_preset("leadtime"));
  GeneratedLogs logs = generate(scn);
  // Force an id switch after a 0.3 s gap (past the miss gate) at t ~ 6 s.
  std::vector<Detection> edited;
  for (Detection det : logs.detections) {
    if (det.t > 6.0 && det.t <= 6.3) continue;
    if (det.t > 6.0) det.track_id = 55;
    edited.push_back(det);
  }
  const auto warnings = run_pipeline(RunConfig{}, edited, logs.ego, straight_route());
  int early = 0;
  for (const Warning& w : warnings) {
    if (w.severity == Severity::early) ++early;
  }
  CHECK(early == 1);
  // The merged track keeps the original id in the warning log.
  REQUIRE_FALSE(warnings.empty());
  CHECK(warnings.front().track_id == 1);
}

TEST_CASE("deviation triggers the reroute hook") {
  // Ego drives +y while the route runs +x: cross-track grows past 20 m.
  Scenario scn;
  scn.name = "uturn";
  scn.duration = 8.0;
  scn.ego.kind = EgoScriptKind::constant_speed;
  scn.ego.start.heading = M_PI / 2.0;
  scn.ego.speed = 6.0;
  const GeneratedLogs logs = generate(noiseless(scn));

  RunConfig cfg;
  cfg.initial_yaw = M_PI / 2.0;
  int reroutes = 0;
  const RerouteFn reroute = [&](const Pose2& pose) -> std::optional<RoutePath> {
    ++reroutes;
    return make_route({pose.position, pose.position + Vec2{0.0, 100.0}});
  };
  run_pipeline(cfg, {}, logs.ego, straight_route(), reroute);
  CHECK(reroutes >= 1);
  CHECK(reroutes <= 3);  // the new route absorbs the deviation
}

TEST_CASE("malformed log lines are reported with their line number") {
  const std::string path = "/tmp/ewarn_test_malformed.jsonl";
  {
    std::ofstream out(path);
    out << R"({"t":0.0,"id":1,"class":"pedestrian","x":10.0,"y":0.0})" << "\n";
    out << "{not json}\n";
  }
  try {
    read_detections(path);
    FAIL("expected a parse error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find(":2:") != std::string::npos);
  }
  std::remove(path.c_str());
}

TEST_CASE("timestamp regression in a log is an error") {
  const std::string path = "/tmp/ewarn_test_regress.jsonl";
  {
    std::ofstream out(path);
    out << R"({"t":1.0,"id":1,"class":"pedestrian","x":10.0,"y":0.0})" << "\n";
    out << R"({"t":0.5,"id":1,"class":"pedestrian","x":10.0,"y":0.0})" << "\n";
  }
  CHECK_THROWS_WITH_AS(read_detections(path), doctest::Contains("timestamp regression"),
                       std::runtime_error);
  std::remove(path.c_str());
}

TEST_CASE("evaluation rejects a truth log without the ego trajectory") {
  Warning w;
  w.t_issued = 1.0;
  std::vector<TruthSample> truth{{0.0, 1, {10.0, 0.0}}};  // actor rows only
  CHECK_THROWS_AS(evaluate({w}, truth, straight_route(), RunConfig{}),
                  std::invalid_argument);
}

TEST_CASE("config round-trips to a byte-stable fixed point") {
  const RunConfig cfg;
  const std::string once = config_to_json(cfg).dump(2);
  const RunConfig parsed = config_from_json(nlohmann::json::parse(once));
  const std::string twice = config_to_json(parsed).dump(2);
  CHECK(once == twice);

  // A second full cycle stays on the fixed point.
  const RunConfig parsed2 = config_from_json(nlohmann::json::parse(twice));
  CHECK(config_to_json(parsed2).dump(2) == twice);
}

TEST_CASE("config fields survive a save/load cycle") {
  RunConfig cfg;
  cfg.tracking.r_gate = 3.25;
  cfg.warning.t_warn = 5.0;
  cfg.camera.hfov_deg = 52.0;
  cfg.route_provider = RouteProviderKind::http;
  cfg.route_url = "http://localhost:9999";
  const std::string path = "/tmp/ewarn_test_config.json";
  save_config(path, cfg);
  const RunConfig back = load_config(path);
  std::remove(path.c_str());
  CHECK(back.tracking.r_gate == 3.25);
  CHECK(back.warning.t_warn == 5.0);
  CHECK(back.camera.hfov_deg == 52.0);
  CHECK(back.route_provider == RouteProviderKind::http);
  CHECK(back.route_url == "http://localhost:9999");
}

TEST_CASE("warning records validate against the JSONL schema") {
  const Scenario scn = make_preset("leadtime");
  const GeneratedLogs logs = generate(scn);
  const auto warnings = run_pipeline(RunConfig{}, logs.detections, logs.ego, straight_route());
  REQUIRE_FALSE(warnings.empty());
  for (const Warning& w : warnings) {
    const auto j = nlohmann::json::parse(to_jsonl(w));
    for (const char* key : {"t", "id", "class", "severity", "direction", "utterance",
                            "t_veh", "s"}) {
      CHECK(j.contains(key));
    }
    const Warning back = warning_from_jsonl(to_jsonl(w));
    CHECK(back.t_issued == w.t_issued);
    CHECK(back.severity == w.severity);
    CHECK(back.direction == w.direction);
    CHECK(back.utterance == w.utterance);
  }
}

TEST_CASE("maneuver due within the merge window folds into the utterance") {
  // Maneuver 10 m ahead of the conflict trigger point: due in ~1.5 s at 15 mph.
  RoutePath route = straight_route();
  route.maneuvers.push_back({63.0, "turn right"});

  const Scenario scn = noiseless(make_preset("leadtime"));
  const GeneratedLogs logs = generate(scn);
  const auto warnings = run_pipeline(RunConfig{}, logs.detections, logs.ego, route);
  REQUIRE_FALSE(warnings.empty());
  CHECK(warnings.front().utterance ==
        "turn right and watch out for pedestrian on your right");
}
