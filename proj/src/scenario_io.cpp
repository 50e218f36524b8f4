#include "dfto/scenario_io.hpp"

#include "dfto/costs.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace dfto {

namespace {

using nlohmann::json;

constexpr double kDegToRad = M_PI / 180.0;

json stateToJson(const UavState& s) {
  return {{"position_m", {s.position.x(), s.position.y(), s.position.z()}},
          {"speed_mps", s.speed},
          {"heading_deg", s.heading / kDegToRad},
          {"flight_path_deg", s.flight_path_angle / kDegToRad}};
}

UavState stateFromJson(const json& j) {
  UavState s;
  const auto& p = j.at("position_m");
  s.position = Eigen::Vector3d(p.at(0).get<double>(), p.at(1).get<double>(),
                               p.at(2).get<double>());
  s.speed = j.at("speed_mps").get<double>();
  s.heading = j.at("heading_deg").get<double>() * kDegToRad;
  s.flight_path_angle = j.at("flight_path_deg").get<double>() * kDegToRad;
  return s;
}

json loadsToJson(const LoadControls& u) {
  return {{"nx", u.nx}, {"ny", u.ny}, {"nz", u.nz}};
}

LoadControls loadsFromJson(const json& j) {
  LoadControls u;
  u.nx = j.at("nx").get<double>();
  u.ny = j.at("ny").get<double>();
  u.nz = j.at("nz").get<double>();
  return u;
}

template <typename T>
void maybe(const json& j, const char* key, T& value) {
  if (j.contains(key)) value = j.at(key).get<T>();
}

}  // namespace

ScenarioFile scenarioFromJsonText(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InvalidScenarioError(std::string("malformed scenario JSON: ") +
                               e.what());
  }
  try {
    if (j.at("version").get<int>() != kScenarioFormatVersion) {
      throw InvalidScenarioError("unsupported scenario format version");
    }
    ScenarioFile file;
    file.name = j.value("name", "");
    Scenario& s = file.scenario;
    s.initial_state = stateFromJson(j.at("initial_state"));
    s.final_state = stateFromJson(j.at("final_state"));
    if (j.contains("initial_loads")) {
      s.initial_controls = loadsFromJson(j.at("initial_loads"));
    }
    if (j.contains("final_loads")) {
      s.final_controls = loadsFromJson(j.at("final_loads"));
    }

    const json& b = j.at("bounds");
    s.speed_min = b.at("speed_mps").at(0).get<double>();
    s.speed_max = b.at("speed_mps").at(1).get<double>();
    s.gamma_min = b.at("flight_path_deg").at(0).get<double>() * kDegToRad;
    s.gamma_max = b.at("flight_path_deg").at(1).get<double>() * kDegToRad;
    s.nx_min = b.at("nx").at(0).get<double>();
    s.nx_max = b.at("nx").at(1).get<double>();
    s.ny_min = b.at("ny").at(0).get<double>();
    s.ny_max = b.at("ny").at(1).get<double>();
    s.nz_min = b.at("nz").at(0).get<double>();
    s.nz_max = b.at("nz").at(1).get<double>();

    s.obstacles.clear();
    for (const json& jo : j.value("obstacles", json::array())) {
      Obstacle o;
      o.center = Eigen::Vector2d(jo.at("center_m").at(0).get<double>(),
                                 jo.at("center_m").at(1).get<double>());
      o.radius = jo.at("radius_m").get<double>();
      s.obstacles.push_back(o);
    }
    s.safe_distance = j.at("safe_distance_m").get<double>();

    const json& tc = j.at("time_cost");
    const std::string mode = tc.at("mode").get<std::string>();
    if (mode == "min_time") {
      s.time_cost.mode = TimeCostMode::MinTime;
    } else if (mode == "window") {
      s.time_cost.mode = TimeCostMode::Window;
      s.time_cost.window_min = tc.at("window_s").at(0).get<double>();
      s.time_cost.window_max = tc.at("window_s").at(1).get<double>();
    } else if (mode == "fixed") {
      s.time_cost.mode = TimeCostMode::Fixed;
      s.time_cost.fixed_duration = tc.at("duration_s").get<double>();
    } else {
      throw InvalidScenarioError("unknown time_cost mode: " + mode);
    }

    if (j.contains("solver")) {
      const json& c = j.at("solver");
      SolverConfig& cfg = file.config;
      maybe(c, "weight_effort", cfg.weight_effort);
      maybe(c, "weight_obstacle", cfg.weight_obstacle);
      maybe(c, "weight_speed", cfg.weight_speed);
      maybe(c, "weight_gamma", cfg.weight_gamma);
      maybe(c, "weight_nx", cfg.weight_nx);
      maybe(c, "weight_ny", cfg.weight_ny);
      maybe(c, "weight_nz", cfg.weight_nz);
      maybe(c, "margin_obstacle", cfg.margin_obstacle);
      maybe(c, "margin_speed", cfg.margin_speed);
      maybe(c, "margin_gamma", cfg.margin_gamma);
      maybe(c, "margin_nx", cfg.margin_nx);
      maybe(c, "margin_ny", cfg.margin_ny);
      maybe(c, "margin_nz", cfg.margin_nz);
      maybe(c, "samples_per_segment", cfg.samples_per_segment);
      maybe(c, "penalty_power", cfg.penalty_power);
      maybe(c, "grad_tolerance", cfg.grad_tolerance);
      maybe(c, "lbfgs_memory", cfg.lbfgs_memory);
      maybe(c, "max_iterations", cfg.max_iterations);
      maybe(c, "segments", cfg.segments);
      maybe(c, "segment_gain", cfg.segment_gain);
      maybe(c, "gravity", cfg.gravity);
      maybe(c, "filter_inactive", cfg.filter_inactive);
      if (c.contains("gradient_mode")) {
        const std::string gm = c.at("gradient_mode").get<std::string>();
        if (gm == "analytic") {
          cfg.gradient_mode = GradientMode::Analytic;
        } else if (gm == "finite_difference") {
          cfg.gradient_mode = GradientMode::FiniteDifference;
        } else {
          throw InvalidScenarioError("unknown gradient_mode: " + gm);
        }
      }
    }

    validateScenario(s);
    return file;
  } catch (const json::exception& e) {
    throw InvalidScenarioError(std::string("scenario JSON missing fields: ") +
                               e.what());
  }
}

std::string scenarioToJsonText(const ScenarioFile& file) {
  const Scenario& s = file.scenario;
  json j;
  j["version"] = kScenarioFormatVersion;
  if (!file.name.empty()) j["name"] = file.name;
  j["frame"] = "NED";
  j["initial_state"] = stateToJson(s.initial_state);
  j["final_state"] = stateToJson(s.final_state);
  j["initial_loads"] = loadsToJson(s.initial_controls);
  j["final_loads"] = loadsToJson(s.final_controls);
  j["bounds"] = {{"speed_mps", {s.speed_min, s.speed_max}},
                 {"flight_path_deg",
                  {s.gamma_min / kDegToRad, s.gamma_max / kDegToRad}},
                 {"nx", {s.nx_min, s.nx_max}},
                 {"ny", {s.ny_min, s.ny_max}},
                 {"nz", {s.nz_min, s.nz_max}}};
  j["obstacles"] = json::array();
  for (const Obstacle& o : s.obstacles) {
    j["obstacles"].push_back(
        {{"center_m", {o.center.x(), o.center.y()}}, {"radius_m", o.radius}});
  }
  j["safe_distance_m"] = s.safe_distance;
  switch (s.time_cost.mode) {
    case TimeCostMode::MinTime:
      j["time_cost"] = {{"mode", "min_time"}};
      break;
    case TimeCostMode::Window:
      j["time_cost"] = {
          {"mode", "window"},
          {"window_s", {s.time_cost.window_min, s.time_cost.window_max}}};
      break;
    case TimeCostMode::Fixed:
      j["time_cost"] = {{"mode", "fixed"},
                        {"duration_s", s.time_cost.fixed_duration}};
      break;
  }
  // Only overrides that differ from the built-in defaults are written.
  const SolverConfig defaults;
  const SolverConfig& cfg = file.config;
  json solver = json::object();
  const auto put = [&solver](const char* key, auto value, auto fallback) {
    if (value != fallback) solver[key] = value;
  };
  put("weight_effort", cfg.weight_effort, defaults.weight_effort);
  put("weight_obstacle", cfg.weight_obstacle, defaults.weight_obstacle);
  put("weight_speed", cfg.weight_speed, defaults.weight_speed);
  put("weight_gamma", cfg.weight_gamma, defaults.weight_gamma);
  put("weight_nx", cfg.weight_nx, defaults.weight_nx);
  put("weight_ny", cfg.weight_ny, defaults.weight_ny);
  put("weight_nz", cfg.weight_nz, defaults.weight_nz);
  put("margin_obstacle", cfg.margin_obstacle, defaults.margin_obstacle);
  put("margin_speed", cfg.margin_speed, defaults.margin_speed);
  put("margin_gamma", cfg.margin_gamma, defaults.margin_gamma);
  put("margin_nx", cfg.margin_nx, defaults.margin_nx);
  put("margin_ny", cfg.margin_ny, defaults.margin_ny);
  put("margin_nz", cfg.margin_nz, defaults.margin_nz);
  put("samples_per_segment", cfg.samples_per_segment,
      defaults.samples_per_segment);
  put("penalty_power", cfg.penalty_power, defaults.penalty_power);
  put("grad_tolerance", cfg.grad_tolerance, defaults.grad_tolerance);
  put("lbfgs_memory", cfg.lbfgs_memory, defaults.lbfgs_memory);
  put("max_iterations", cfg.max_iterations, defaults.max_iterations);
  put("segments", cfg.segments, defaults.segments);
  put("segment_gain", cfg.segment_gain, defaults.segment_gain);
  put("gravity", cfg.gravity, defaults.gravity);
  put("filter_inactive", cfg.filter_inactive, defaults.filter_inactive);
  if (cfg.gradient_mode != defaults.gradient_mode) {
    solver["gradient_mode"] = cfg.gradient_mode == GradientMode::Analytic
                                  ? "analytic"
                                  : "finite_difference";
  }
  if (!solver.empty()) j["solver"] = solver;
  return j.dump(2) + "\n";
}

ScenarioFile loadScenarioFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw InvalidScenarioError("cannot open scenario file: " + path);
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return scenarioFromJsonText(buffer.str());
}

void saveScenarioFile(const ScenarioFile& file, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw InvalidScenarioError("cannot write scenario file: " + path);
  }
  out << scenarioToJsonText(file);
}

}  // namespace dfto
