#pragma once

#include <cstddef>
#include <vector>

#include "stadia/guidance.hpp"
#include "stadia/ned.hpp"

// Point-mass vehicle surrogate: first-order velocity tracking integrated
// exactly, plus a minimal waypoint follower standing in for the mission
// planner.

namespace stadia {

struct VehicleState {
    NedVector position_m;
    NedVector velocity_mps;
    double heading_deg = 0.0;  // 0 = north, clockwise positive
};

struct Mission {
    std::vector<NedVector> waypoints_m;
    double acceptance_radius_m = 1.0;
    double cruise_speed_mps = 2.0;
};

struct WaypointCommand {
    VelocitySetpointNED setpoint;
    std::size_t index = 0;  // active waypoint after any advance
    bool complete = false;
};

// Exact exponential velocity update toward the command over dt, position
// integrated trapezoidally. Heading is left untouched. Throws
// std::invalid_argument unless dt > 0 and tau > 0.
VehicleState step_dynamics(const VehicleState& state, const VelocitySetpointNED& cmd,
                           double dt_s, double tau_s);

// Heading along the horizontal command when it is faster than 0.1 m/s, else
// the fallback. Degrees in [0, 360).
double heading_from_command(const VelocitySetpointNED& cmd, double fallback_deg);

// Cruise-speed command toward the active waypoint, advancing `active_index`
// through any waypoints already inside the acceptance radius. Zero command
// once the final waypoint is reached. Throws std::invalid_argument on an
// empty mission.
WaypointCommand waypoint_velocity(const VehicleState& state, const Mission& mission,
                                  std::size_t active_index);

}  // namespace stadia
