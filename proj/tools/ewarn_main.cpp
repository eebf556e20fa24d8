// ewarn: pedestrian/cyclist early-warning simulation pipeline.
//
// Subcommands: simulate (scenario -> sensor logs), run (logs -> warnings),
// eval (warnings + truth -> metrics), plot (logs -> SVG), preset (list the
// built-in scenarios).

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>

#include "ewarn/config.hpp"
#include "ewarn/jsonl.hpp"
#include "ewarn/pipeline.hpp"
#include "ewarn/plot.hpp"
#include "ewarn/prediction.hpp"
#include "ewarn/route.hpp"
#include "ewarn/scenario.hpp"
#include "ewarn/tracking.hpp"

namespace fs = std::filesystem;
using namespace ewarn;

namespace {

struct RouteOptions {
  std::string provider;  // line | file | http (empty: from config)
  std::string file;
  std::string url;
  std::vector<double> dest;
};

void add_route_options(CLI::App* cmd, RouteOptions& opts) {
  cmd->add_option("--route-provider", opts.provider, "Route provider: line|file|http")
      ->check(CLI::IsMember({"line", "file", "http"}));
  cmd->add_option("--route-file", opts.file, "Route JSON file (file provider)");
  cmd->add_option("--route-url", opts.url,
                  "Route server base URL (http provider; default $EWARN_ROUTE_URL)");
  cmd->add_option("--dest", opts.dest, "Destination x y (line/http providers)")
      ->expected(2);
}

void apply_route_options(RunConfig& cfg, const RouteOptions& opts) {
  if (opts.provider == "line") cfg.route_provider = RouteProviderKind::line;
  if (opts.provider == "file") cfg.route_provider = RouteProviderKind::file;
  if (opts.provider == "http") cfg.route_provider = RouteProviderKind::http;
  if (!opts.file.empty()) cfg.route_file = opts.file;
  if (!opts.url.empty()) cfg.route_url = opts.url;
  if (opts.dest.size() == 2) cfg.route_dest = {opts.dest[0], opts.dest[1]};
}

std::unique_ptr<RouteProvider> make_provider(const RunConfig& cfg) {
  switch (cfg.route_provider) {
    case RouteProviderKind::line:
      return std::make_unique<LineRouteProvider>();
    case RouteProviderKind::file:
      if (cfg.route_file.empty()) throw std::runtime_error("file provider needs --route-file");
      return std::make_unique<FileRouteProvider>(cfg.route_file);
    case RouteProviderKind::http: {
      std::string url = cfg.route_url;
      if (url.empty()) {
        if (const char* env = std::getenv("EWARN_ROUTE_URL")) url = env;
      }
      if (url.empty()) {
        throw std::runtime_error("http provider needs --route-url or $EWARN_ROUTE_URL");
      }
      return std::make_unique<HttpRouteProvider>(url);
    }
  }
  throw std::runtime_error("unknown route provider");
}

RoutePath acquire_route(const RunConfig& cfg, const Pose2& start) {
  auto provider = make_provider(cfg);
  return provide_route(start, cfg.route_dest, *provider);
}

Scenario resolve_scenario(const std::string& ref) {
  for (const std::string& name : preset_names()) {
    if (ref == name) return make_preset(ref);
  }
  std::ifstream in(ref);
  if (!in) throw std::runtime_error("scenario is neither a preset nor a readable file: " + ref);
  nlohmann::json j;
  in >> j;
  return scenario_from_json(j);
}

RunConfig load_run_config(const std::string& path) {
  if (path.empty()) return RunConfig{};
  return load_config(path);
}

// Analysis-frame track samples rebuilt from the raw logs, for plotting.
std::map<int, std::vector<TrackSample>> rebuild_tracks(const RunConfig& cfg,
                                                       const std::vector<Detection>& dets,
                                                       const std::vector<EgoSensorRecord>& ego) {
  VehicleState init;
  init.pose.heading = cfg.initial_yaw;
  EgoEkf ekf(cfg.ekf, init);
  const FrameSet frames = FrameSet::from_initial_heading(cfg.initial_yaw);

  std::map<int, std::vector<TrackSample>> tracks;
  std::size_t ei = 0;
  for (const Detection& det : dets) {
    while (ei < ego.size() && record_time(ego[ei]) <= det.t + 1e-9) {
      std::visit(
          [&](const auto& rec) {
            using T = std::decay_t<decltype(rec)>;
            if constexpr (std::is_same_v<T, ImuSample>) {
              ekf.predict(rec);
            } else {
              ekf.update(rec);
            }
          },
          ego[ei]);
      ++ei;
    }
    const Vec2 world = to_world_checked(det, ekf.state().pose, ekf.state().t);
    tracks[det.track_id].push_back({det.t, to_analysis(world, frames)});
  }
  return tracks;
}

int cmd_simulate(const std::string& scenario_ref, std::optional<std::uint64_t> seed,
                 const std::string& config_path, const std::string& out_dir) {
  const RunConfig cfg = load_run_config(config_path);
  Scenario scn = resolve_scenario(scenario_ref);
  if (seed) scn.seed = *seed;

  const GeneratedLogs logs = generate(scn);
  fs::create_directories(out_dir);
  write_detections((fs::path(out_dir) / "detections.jsonl").string(), logs.detections);
  write_ego_log((fs::path(out_dir) / "ego.jsonl").string(), logs.ego);
  write_truth((fs::path(out_dir) / "truth.jsonl").string(), logs.truth);
  std::ofstream scn_out(fs::path(out_dir) / "scenario.json");
  scn_out << scenario_to_json(scn).dump(2) << '\n';

  std::cout << "simulated '" << scn.name << "' seed " << scn.seed << ": "
            << logs.detections.size() << " detections, " << logs.ego.size()
            << " ego records -> " << out_dir << "\n";
  (void)cfg;
  return 0;
}

int cmd_run(const std::string& det_path, const std::string& ego_path,
            const std::string& config_path, const RouteOptions& route_opts,
            std::string out_path, const std::string& out_dir) {
  RunConfig cfg = load_run_config(config_path);
  apply_route_options(cfg, route_opts);
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    out_path = (fs::path(out_dir) / "warnings.jsonl").string();
  }

  const auto detections = read_detections(det_path);
  const auto ego_log = read_ego_log(ego_path);

  Pose2 start;
  start.heading = cfg.initial_yaw;
  const RoutePath route = acquire_route(cfg, start);

  const RerouteFn reroute = [&cfg](const Pose2& pose) -> std::optional<RoutePath> {
    try {
      return acquire_route(cfg, pose);
    } catch (const std::exception& e) {
      std::cerr << "reroute failed, keeping current route: " << e.what() << "\n";
      return std::nullopt;
    }
  };

  const auto warnings = run_pipeline(cfg, detections, ego_log, route, reroute);
  if (out_path.empty() || out_path == "-") {
    for (const Warning& w : warnings) std::cout << to_jsonl(w) << '\n';
  } else {
    write_warnings(out_path, warnings);
    std::cout << warnings.size() << " warnings -> " << out_path << "\n";
  }
  return 0;
}

int cmd_eval(const std::string& scenario_ref, int seeds, std::uint64_t seed0,
             const std::string& warnings_path, const std::string& truth_path,
             const std::string& config_path, const RouteOptions& route_opts,
             const std::string& out_path, int jobs) {
  RunConfig cfg = load_run_config(config_path);
  apply_route_options(cfg, route_opts);

  EvalReport report;
  if (!scenario_ref.empty()) {
    const Scenario base = resolve_scenario(scenario_ref);
    Pose2 start = base.ego.start;
    const RoutePath route = acquire_route(cfg, start);

    const auto run_one = [&](std::uint64_t seed) {
      Scenario scn = base;
      scn.seed = seed;
      const GeneratedLogs logs = generate(scn);
      const auto warnings = run_pipeline(cfg, logs.detections, logs.ego, route);
      return evaluate(warnings, logs.truth, route, cfg);
    };

    // Runs are independent; fan out but keep the report in seed order.
    const int parallel = std::max(1, jobs);
    std::vector<std::future<ScenarioEval>> futures;
    for (int i = 0; i < seeds; ++i) {
      futures.push_back(std::async(parallel > 1 ? std::launch::async : std::launch::deferred,
                                   run_one, seed0 + static_cast<std::uint64_t>(i)));
    }
    for (auto& f : futures) report.runs.push_back(f.get());
  } else {
    if (warnings_path.empty() || truth_path.empty()) {
      throw std::runtime_error("eval needs either --scenario or --warnings + --truth");
    }
    const auto warnings = read_warnings(warnings_path);
    const auto truth = read_truth(truth_path);
    Pose2 start;
    start.heading = cfg.initial_yaw;
    const RoutePath route = acquire_route(cfg, start);
    report.runs.push_back(evaluate(warnings, truth, route, cfg));
  }

  const std::string text = report_to_json(report).dump(2);
  if (out_path.empty() || out_path == "-") {
    std::cout << text << '\n';
  } else {
    std::ofstream out(out_path);
    out << text << '\n';
    std::cout << "report -> " << out_path << "\n";
  }
  return 0;
}

int cmd_plot(const std::string& kind, const std::string& det_path,
             const std::string& ego_path, const std::string& truth_path,
             const std::string& warnings_path, const std::string& config_path,
             const std::string& out_path) {
  const RunConfig cfg = load_run_config(config_path);

  std::string svg;
  if (kind == "trajectory") {
    const auto detections = read_detections(det_path);
    const auto ego_log = read_ego_log(ego_path);
    const auto tracks = rebuild_tracks(cfg, detections, ego_log);

    std::map<int, std::vector<TrackSample>> truth_tracks;
    if (!truth_path.empty()) {
      const FrameSet frames = FrameSet::from_initial_heading(cfg.initial_yaw);
      for (const TruthSample& s : read_truth(truth_path)) {
        if (s.id == 0) continue;
        truth_tracks[-s.id].push_back({s.t, to_analysis(s.pos, frames)});
      }
    }
    svg = trajectory_svg(tracks, truth_tracks);
  } else {
    std::map<int, std::vector<Timestamp>> det_times;
    if (!det_path.empty()) {
      for (const Detection& det : read_detections(det_path)) {
        det_times[det.track_id].push_back(det.t);
      }
    }
    std::vector<Warning> warnings;
    if (!warnings_path.empty()) warnings = read_warnings(warnings_path);
    svg = timeline_svg(det_times, warnings);
  }
  write_text_file(out_path, svg);
  std::cout << kind << " plot -> " << out_path << "\n";
  return 0;
}

int cmd_preset(const std::string& dump_name) {
  if (dump_name.empty()) {
    for (const std::string& name : preset_names()) {
      const Scenario scn = make_preset(name);
      std::cout << name << ": " << scn.actors.size() << " actor(s), "
                << scn.duration << " s, ego "
                << (scn.ego.kind == EgoScriptKind::stationary ? "stationary" : "moving")
                << "\n";
    }
    return 0;
  }
  std::cout << scenario_to_json(make_preset(dump_name)).dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ewarn: early warning of pedestrians and cyclists (simulation pipeline)"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "RunConfig JSON file")->envname("EWARN_CONFIG");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Generate sensor logs from a scenario");
  std::string sim_scenario;
  std::optional<std::uint64_t> sim_seed;
  std::string sim_out = "out";
  sim->add_option("--scenario", sim_scenario, "Preset name or scenario JSON file")
      ->required();
  sim->add_option("--seed", sim_seed, "Override the scenario seed");
  sim->add_option("--out-dir", sim_out, "Output directory");

  // run
  auto* run = app.add_subcommand("run", "Replay logs through the warning engine");
  std::string run_dets, run_ego, run_out, run_out_dir;
  RouteOptions run_route;
  run->add_option("--detections", run_dets, "Detections JSONL")->required();
  run->add_option("--ego", run_ego, "Ego sensor JSONL")->required();
  run->add_option("--out", run_out, "Warnings JSONL output ('-' = stdout)");
  run->add_option("--out-dir", run_out_dir, "Directory for warnings.jsonl");
  add_route_options(run, run_route);

  // eval
  auto* eval = app.add_subcommand("eval", "Score warnings against ground truth");
  std::string eval_scenario, eval_warnings, eval_truth, eval_out;
  int eval_seeds = 1;
  std::uint64_t eval_seed0 = 1;
  int eval_jobs = 1;
  RouteOptions eval_route;
  eval->add_option("--scenario", eval_scenario,
                   "Preset or scenario file; simulate+run+eval per seed");
  eval->add_option("--seeds", eval_seeds, "Number of seeds to run");
  eval->add_option("--seed", eval_seed0, "First seed");
  eval->add_option("--jobs", eval_jobs, "Parallel scenario runs");
  eval->add_option("--warnings", eval_warnings, "Existing warnings JSONL");
  eval->add_option("--truth", eval_truth, "Existing truth JSONL");
  eval->add_option("--out", eval_out, "Report JSON output ('-' = stdout)");
  add_route_options(eval, eval_route);

  // plot
  auto* plot = app.add_subcommand("plot", "Emit an SVG figure from logs");
  std::string plot_kind = "trajectory";
  std::string plot_dets, plot_ego, plot_truth, plot_warnings, plot_out = "plot.svg";
  plot->add_option("--kind", plot_kind, "trajectory|timeline")
      ->check(CLI::IsMember({"trajectory", "timeline"}));
  plot->add_option("--detections", plot_dets, "Detections JSONL");
  plot->add_option("--ego", plot_ego, "Ego sensor JSONL");
  plot->add_option("--truth", plot_truth, "Truth JSONL overlay");
  plot->add_option("--warnings", plot_warnings, "Warnings JSONL (timeline)");
  plot->add_option("--out", plot_out, "SVG output path");

  // preset
  auto* preset = app.add_subcommand("preset", "List built-in scenario presets");
  std::string preset_dump;
  preset->add_option("--dump", preset_dump, "Print one preset as scenario JSON");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmd_simulate(sim_scenario, sim_seed, config_path, sim_out);
    if (run->parsed()) {
      return cmd_run(run_dets, run_ego, config_path, run_route, run_out, run_out_dir);
    }
    if (eval->parsed()) {
      return cmd_eval(eval_scenario, eval_seeds, eval_seed0, eval_warnings, eval_truth,
                      config_path, eval_route, eval_out, eval_jobs);
    }
    if (plot->parsed()) {
      return cmd_plot(plot_kind, plot_dets, plot_ego, plot_truth, plot_warnings,
                      config_path, plot_out);
    }
    if (preset->parsed()) return cmd_preset(preset_dump);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
