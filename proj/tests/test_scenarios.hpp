#pragma once

// Canned scenarios shared by the integration and acceptance suites.

#include "stadia/scenario.hpp"

namespace stadia::testing {

// Enemy closing head-on at 2 m/s from 30 m out, slightly left of the ego
// track so the detection has a definite side.
inline Scenario head_on() {
    Scenario s;
    s.name = "head_on";
    s.duration_s = 20.0;
    s.dt_s = 0.02;
    s.ego.initial_state.position_m = {0.0, 0.0, -10.0};
    s.ego.initial_state.heading_deg = 0.0;
    s.ego.mission.waypoints_m = {{40.0, 0.0, -10.0}};
    s.ego.mission.acceptance_radius_m = 1.0;
    s.ego.mission.cruise_speed_mps = 2.0;
    s.enemy.initial_position_m = {30.0, -0.5, -10.0};
    s.enemy.waypoints_m = {{-10.0, -0.5, -10.0}};
    s.enemy.speed_mps = 2.0;
    s.detector.quantize_px = true;
    return s;
}

// Enemy parked far outside the detection envelope.
inline Scenario far_enemy() {
    Scenario s;
    s.name = "far_enemy";
    s.duration_s = 20.0;
    s.dt_s = 0.02;
    s.ego.initial_state.position_m = {0.0, 0.0, -10.0};
    s.ego.mission.waypoints_m = {{30.0, 0.0, -10.0}};
    s.ego.mission.acceptance_radius_m = 1.0;
    s.ego.mission.cruise_speed_mps = 2.0;
    s.enemy.initial_position_m = {200.0, 50.0, -10.0};
    s.detector.quantize_px = true;
    return s;
}

// Stationary enemy 6 m dead ahead, ego carrying a net.
inline Scenario tracking_net() {
    Scenario s;
    s.name = "tracking_net";
    s.duration_s = 30.0;
    s.dt_s = 0.02;
    s.ego.initial_state.position_m = {0.0, 0.0, -10.0};
    s.ego.mission.waypoints_m = {{40.0, 0.0, -10.0}};
    s.ego.mission.acceptance_radius_m = 1.0;
    s.ego.mission.cruise_speed_mps = 2.0;
    s.enemy.initial_position_m = {6.0, 0.0, -10.0};
    s.guidance.has_net = true;
    s.detector.quantize_px = true;
    return s;
}

// Enemy flying straight at a net-carrying ego: the dead-band holds the ego
// in a hover while the target walks into the net.
inline Scenario net_ambush() {
    Scenario s;
    s.name = "net_ambush";
    s.duration_s = 15.0;
    s.dt_s = 0.02;
    s.ego.initial_state.position_m = {0.0, 0.0, -10.0};
    s.ego.mission.waypoints_m = {{40.0, 0.0, -10.0}};
    s.ego.mission.acceptance_radius_m = 1.0;
    s.ego.mission.cruise_speed_mps = 2.0;
    s.enemy.initial_position_m = {10.0, 0.0, -10.0};
    s.enemy.waypoints_m = {{-10.0, 0.0, -10.0}};
    s.enemy.speed_mps = 1.0;
    s.guidance.has_net = true;
    s.detector.quantize_px = true;
    return s;
}

// Enemy crossing left-to-right through the field of view, then gone: a few
// detections at cadence, a revert to guided once they stop.
inline Scenario crossing_enemy() {
    Scenario s;
    s.name = "crossing_enemy";
    s.duration_s = 20.0;
    s.dt_s = 0.02;
    s.ego.initial_state.position_m = {0.0, 0.0, -10.0};
    s.ego.mission.waypoints_m = {{30.0, 0.0, -10.0}};
    s.ego.mission.acceptance_radius_m = 1.0;
    s.ego.mission.cruise_speed_mps = 2.0;
    s.enemy.initial_position_m = {6.0, -1.0, -10.0};
    s.enemy.waypoints_m = {{6.0, 60.0, -10.0}};
    s.enemy.speed_mps = 4.0;
    s.detector.quantize_px = true;
    return s;
}

}  // namespace stadia::testing
