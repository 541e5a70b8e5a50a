#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "stadia/detection_sim.hpp"
#include "stadia/guidance.hpp"
#include "stadia/ned.hpp"
#include "stadia/vehicle.hpp"

// Scenario files: one JSON document describing the ego vehicle and mission,
// the enemy trajectory, guidance and detector configuration, and the run
// timing. Field names carry explicit units; unknown fields are rejected so
// typos fail loudly instead of silently falling back to defaults.

namespace stadia {

enum class RunMode { InProcess, SplitProcess };

struct EnemyTrajectory {
    NedVector initial_position_m;
    std::vector<NedVector> waypoints_m;  // empty = hold position
    double speed_mps = 2.0;
};

struct EgoSetup {
    VehicleState initial_state;
    Mission mission;
    double tau_s = 0.3;  // velocity tracking time constant
};

struct Scenario {
    std::string name;
    double duration_s = 30.0;
    double dt_s = 0.02;
    RunMode mode = RunMode::InProcess;
    EgoSetup ego;
    EnemyTrajectory enemy;
    GuidanceConfig guidance;
    bool guidance_enabled = true;  // false = fly the mission ignoring detections
    DetectorModel detector;
    double capture_radius_m = 1.0;  // net reach
    double capture_hold_s = 1.0;    // dwell needed to count a capture
};

// Carries every problem found in a scenario document, one per line.
class ScenarioError : public std::runtime_error {
public:
    explicit ScenarioError(const std::vector<std::string>& problems);
    const std::vector<std::string>& problems() const { return problems_; }

private:
    std::vector<std::string> problems_;
};

Scenario parse_scenario(const std::string& json_text);
Scenario load_scenario(const std::string& path);
std::string scenario_to_json(const Scenario& s);

}  // namespace stadia
