#include "stadia/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace stadia {

namespace {

using nlohmann::json;

std::string join_problems(const std::vector<std::string>& problems) {
    std::ostringstream oss;
    oss << "invalid scenario:";
    for (const auto& p : problems) {
        oss << "\n  - " << p;
    }
    return oss.str();
}

// Collects problems while walking the document so one pass reports them all.
struct Checker {
    std::vector<std::string> problems;

    void fail(const std::string& where, const std::string& what) {
        problems.push_back(where + ": " + what);
    }

    void check_keys(const json& obj, const std::string& where,
                    const std::set<std::string>& allowed) {
        for (const auto& [key, value] : obj.items()) {
            (void)value;
            if (!allowed.count(key)) {
                fail(where.empty() ? key : where + "." + key, "unknown field");
            }
        }
    }

    bool get_number(const json& obj, const std::string& where, const std::string& key,
                    double& out) {
        if (!obj.contains(key)) {
            return false;
        }
        if (!obj[key].is_number()) {
            fail(where + "." + key, "expected a number");
            return false;
        }
        out = obj[key].get<double>();
        return true;
    }

    bool get_bool(const json& obj, const std::string& where, const std::string& key,
                  bool& out) {
        if (!obj.contains(key)) {
            return false;
        }
        if (!obj[key].is_boolean()) {
            fail(where + "." + key, "expected a boolean");
            return false;
        }
        out = obj[key].get<bool>();
        return true;
    }

    bool get_vector(const json& obj, const std::string& where, const std::string& key,
                    NedVector& out) {
        if (!obj.contains(key)) {
            return false;
        }
        const json& v = obj[key];
        if (!v.is_array() || v.size() != 3 || !v[0].is_number() || !v[1].is_number() ||
            !v[2].is_number()) {
            fail(where + "." + key, "expected [n, e, d] numbers");
            return false;
        }
        out = NedVector{v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
        return true;
    }

    bool get_waypoints(const json& obj, const std::string& where, const std::string& key,
                       std::vector<NedVector>& out) {
        if (!obj.contains(key)) {
            return false;
        }
        const json& v = obj[key];
        if (!v.is_array()) {
            fail(where + "." + key, "expected an array of [n, e, d] points");
            return false;
        }
        std::vector<NedVector> points;
        for (const auto& p : v) {
            if (!p.is_array() || p.size() != 3 || !p[0].is_number() || !p[1].is_number() ||
                !p[2].is_number()) {
                fail(where + "." + key, "expected an array of [n, e, d] points");
                return false;
            }
            points.push_back(NedVector{p[0].get<double>(), p[1].get<double>(), p[2].get<double>()});
        }
        out = std::move(points);
        return true;
    }
};

void parse_guidance(Checker& c, const json& obj, GuidanceConfig& cfg, bool& enabled) {
    c.check_keys(obj, "guidance",
                 {"enabled", "k1", "k2", "k_net", "deadband", "has_net", "threshold",
                  "detection_interval_s", "refresh_timeout_s", "v_cap_mps", "mixing",
                  "d_sign"});
    c.get_bool(obj, "guidance", "enabled", enabled);
    c.get_number(obj, "guidance", "k1", cfg.k1);
    c.get_number(obj, "guidance", "k2", cfg.k2);
    c.get_number(obj, "guidance", "k_net", cfg.k_net);
    c.get_number(obj, "guidance", "deadband", cfg.deadband);
    c.get_bool(obj, "guidance", "has_net", cfg.has_net);
    c.get_number(obj, "guidance", "threshold", cfg.threshold);
    c.get_number(obj, "guidance", "detection_interval_s", cfg.detection_interval_s);
    c.get_number(obj, "guidance", "refresh_timeout_s", cfg.refresh_timeout_s);
    c.get_number(obj, "guidance", "v_cap_mps", cfg.v_cap_mps);
    c.get_number(obj, "guidance", "d_sign", cfg.d_sign);
    if (obj.contains("mixing")) {
        const std::string m = obj["mixing"].is_string() ? obj["mixing"].get<std::string>() : "";
        if (m == "paper") {
            cfg.mixing = LateralMixing::Paper;
        } else if (m == "standard") {
            cfg.mixing = LateralMixing::Standard;
        } else {
            c.fail("guidance.mixing", "expected \"paper\" or \"standard\"");
        }
    }
    if (!cfg.valid()) {
        c.fail("guidance", "gains and timers must be positive, deadband in (0, 1)");
    }
}

void parse_detector(Checker& c, const json& obj, DetectorModel& model) {
    c.check_keys(obj, "detector",
                 {"frame_width_px", "frame_height_px", "half_fov_x_deg", "half_fov_y_deg",
                  "max_range_m", "p_near", "p_far", "quantize_px", "z_split_m", "rng_seed"});
    c.get_number(obj, "detector", "frame_width_px", model.camera.frame_width_px);
    c.get_number(obj, "detector", "frame_height_px", model.camera.frame_height_px);
    c.get_number(obj, "detector", "half_fov_x_deg", model.camera.half_fov_x_deg);
    c.get_number(obj, "detector", "half_fov_y_deg", model.camera.half_fov_y_deg);
    c.get_number(obj, "detector", "max_range_m", model.max_range_m);
    c.get_number(obj, "detector", "p_near", model.p_near);
    c.get_number(obj, "detector", "p_far", model.p_far);
    c.get_bool(obj, "detector", "quantize_px", model.quantize_px);
    c.get_number(obj, "detector", "z_split_m", model.z_split_m);
    if (obj.contains("rng_seed")) {
        if (obj["rng_seed"].is_number_unsigned()) {
            model.rng_seed = obj["rng_seed"].get<std::uint64_t>();
        } else {
            c.fail("detector.rng_seed", "expected an unsigned integer");
        }
    }
    if (!model.valid()) {
        c.fail("detector", "frame/fov must be positive, 0 < p_far <= p_near <= 1");
    }
}

void parse_ego(Checker& c, const json& obj, EgoSetup& ego) {
    c.check_keys(obj, "ego",
                 {"position_ned_m", "velocity_ned_mps", "heading_deg", "tau_s", "mission"});
    c.get_vector(obj, "ego", "position_ned_m", ego.initial_state.position_m);
    c.get_vector(obj, "ego", "velocity_ned_mps", ego.initial_state.velocity_mps);
    if (c.get_number(obj, "ego", "heading_deg", ego.initial_state.heading_deg)) {
        double h = std::fmod(ego.initial_state.heading_deg, 360.0);
        if (h < 0.0) {
            h += 360.0;
        }
        ego.initial_state.heading_deg = h;
    }
    c.get_number(obj, "ego", "tau_s", ego.tau_s);
    if (!(ego.tau_s > 0.0)) {
        c.fail("ego.tau_s", "must be > 0");
    }

    if (!obj.contains("mission") || !obj["mission"].is_object()) {
        c.fail("ego.mission", "required object missing");
        return;
    }
    const json& m = obj["mission"];
    c.check_keys(m, "ego.mission",
                 {"waypoints_ned_m", "acceptance_radius_m", "cruise_speed_mps"});
    if (!c.get_waypoints(m, "ego.mission", "waypoints_ned_m", ego.mission.waypoints_m) ||
        ego.mission.waypoints_m.empty()) {
        c.fail("ego.mission.waypoints_ned_m", "at least one waypoint required");
    }
    c.get_number(m, "ego.mission", "acceptance_radius_m", ego.mission.acceptance_radius_m);
    c.get_number(m, "ego.mission", "cruise_speed_mps", ego.mission.cruise_speed_mps);
    if (!(ego.mission.acceptance_radius_m > 0.0)) {
        c.fail("ego.mission.acceptance_radius_m", "must be > 0");
    }
    if (!(ego.mission.cruise_speed_mps > 0.0)) {
        c.fail("ego.mission.cruise_speed_mps", "must be > 0");
    }
}

void parse_enemy(Checker& c, const json& obj, EnemyTrajectory& enemy) {
    c.check_keys(obj, "enemy", {"position_ned_m", "waypoints_ned_m", "speed_mps"});
    if (!c.get_vector(obj, "enemy", "position_ned_m", enemy.initial_position_m)) {
        c.fail("enemy.position_ned_m", "required field missing");
    }
    c.get_waypoints(obj, "enemy", "waypoints_ned_m", enemy.waypoints_m);
    c.get_number(obj, "enemy", "speed_mps", enemy.speed_mps);
    if (enemy.speed_mps < 0.0) {
        c.fail("enemy.speed_mps", "must be >= 0");
    }
}

}  // namespace

ScenarioError::ScenarioError(const std::vector<std::string>& problems)
    : std::runtime_error(join_problems(problems)), problems_(problems) {}

Scenario parse_scenario(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ScenarioError({std::string("not valid JSON: ") + e.what()});
    }
    if (!doc.is_object()) {
        throw ScenarioError({"top level: expected a JSON object"});
    }

    Checker c;
    Scenario s;
    c.check_keys(doc, "",
                 {"name", "duration_s", "dt_s", "mode", "ego", "enemy", "guidance",
                  "detector", "capture_radius_m", "capture_hold_s"});

    if (doc.contains("name")) {
        if (doc["name"].is_string()) {
            s.name = doc["name"].get<std::string>();
        } else {
            c.fail("name", "expected a string");
        }
    }
    c.get_number(doc, "", "duration_s", s.duration_s);
    c.get_number(doc, "", "dt_s", s.dt_s);
    if (!(s.duration_s > 0.0)) {
        c.fail("duration_s", "must be > 0");
    }
    if (!(s.dt_s > 0.0)) {
        c.fail("dt_s", "must be > 0");
    }
    if (doc.contains("mode")) {
        const std::string m = doc["mode"].is_string() ? doc["mode"].get<std::string>() : "";
        if (m == "inproc") {
            s.mode = RunMode::InProcess;
        } else if (m == "split") {
            s.mode = RunMode::SplitProcess;
        } else {
            c.fail("mode", "expected \"inproc\" or \"split\"");
        }
    }

    if (doc.contains("ego") && doc["ego"].is_object()) {
        parse_ego(c, doc["ego"], s.ego);
    } else {
        c.fail("ego", "required object missing");
    }
    if (doc.contains("enemy") && doc["enemy"].is_object()) {
        parse_enemy(c, doc["enemy"], s.enemy);
    } else {
        c.fail("enemy", "required object missing");
    }
    if (doc.contains("guidance")) {
        if (doc["guidance"].is_object()) {
            parse_guidance(c, doc["guidance"], s.guidance, s.guidance_enabled);
        } else {
            c.fail("guidance", "expected an object");
        }
    }
    if (doc.contains("detector")) {
        if (doc["detector"].is_object()) {
            parse_detector(c, doc["detector"], s.detector);
        } else {
            c.fail("detector", "expected an object");
        }
    }
    c.get_number(doc, "", "capture_radius_m", s.capture_radius_m);
    c.get_number(doc, "", "capture_hold_s", s.capture_hold_s);
    if (!(s.capture_radius_m > 0.0)) {
        c.fail("capture_radius_m", "must be > 0");
    }
    if (!(s.capture_hold_s > 0.0)) {
        c.fail("capture_hold_s", "must be > 0");
    }

    if (!c.problems.empty()) {
        throw ScenarioError(c.problems);
    }
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ScenarioError({"cannot open scenario file: " + path});
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

std::string scenario_to_json(const Scenario& s) {
    json doc;
    doc["name"] = s.name;
    doc["duration_s"] = s.duration_s;
    doc["dt_s"] = s.dt_s;
    doc["mode"] = s.mode == RunMode::InProcess ? "inproc" : "split";

    json ego;
    ego["position_ned_m"] = {s.ego.initial_state.position_m.n, s.ego.initial_state.position_m.e,
                             s.ego.initial_state.position_m.d};
    ego["velocity_ned_mps"] = {s.ego.initial_state.velocity_mps.n,
                               s.ego.initial_state.velocity_mps.e,
                               s.ego.initial_state.velocity_mps.d};
    ego["heading_deg"] = s.ego.initial_state.heading_deg;
    ego["tau_s"] = s.ego.tau_s;
    json mission;
    mission["waypoints_ned_m"] = json::array();
    for (const auto& w : s.ego.mission.waypoints_m) {
        mission["waypoints_ned_m"].push_back({w.n, w.e, w.d});
    }
    mission["acceptance_radius_m"] = s.ego.mission.acceptance_radius_m;
    mission["cruise_speed_mps"] = s.ego.mission.cruise_speed_mps;
    ego["mission"] = mission;
    doc["ego"] = ego;

    json enemy;
    enemy["position_ned_m"] = {s.enemy.initial_position_m.n, s.enemy.initial_position_m.e,
                               s.enemy.initial_position_m.d};
    enemy["waypoints_ned_m"] = json::array();
    for (const auto& w : s.enemy.waypoints_m) {
        enemy["waypoints_ned_m"].push_back({w.n, w.e, w.d});
    }
    enemy["speed_mps"] = s.enemy.speed_mps;
    doc["enemy"] = enemy;

    json guidance;
    guidance["enabled"] = s.guidance_enabled;
    guidance["k1"] = s.guidance.k1;
    guidance["k2"] = s.guidance.k2;
    guidance["k_net"] = s.guidance.k_net;
    guidance["deadband"] = s.guidance.deadband;
    guidance["has_net"] = s.guidance.has_net;
    guidance["threshold"] = s.guidance.threshold;
    guidance["detection_interval_s"] = s.guidance.detection_interval_s;
    guidance["refresh_timeout_s"] = s.guidance.refresh_timeout_s;
    guidance["v_cap_mps"] = s.guidance.v_cap_mps;
    guidance["mixing"] = s.guidance.mixing == LateralMixing::Paper ? "paper" : "standard";
    guidance["d_sign"] = s.guidance.d_sign;
    doc["guidance"] = guidance;

    json detector;
    detector["frame_width_px"] = s.detector.camera.frame_width_px;
    detector["frame_height_px"] = s.detector.camera.frame_height_px;
    detector["half_fov_x_deg"] = s.detector.camera.half_fov_x_deg;
    detector["half_fov_y_deg"] = s.detector.camera.half_fov_y_deg;
    detector["max_range_m"] = s.detector.max_range_m;
    detector["p_near"] = s.detector.p_near;
    detector["p_far"] = s.detector.p_far;
    detector["quantize_px"] = s.detector.quantize_px;
    detector["z_split_m"] = s.detector.z_split_m;
    detector["rng_seed"] = s.detector.rng_seed;
    doc["detector"] = detector;

    doc["capture_radius_m"] = s.capture_radius_m;
    doc["capture_hold_s"] = s.capture_hold_s;
    return doc.dump(2);
}

}  // namespace stadia
