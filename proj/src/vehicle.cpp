#include "stadia/vehicle.hpp"

#include <cmath>
#include <stdexcept>

namespace stadia {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kHeadingSpeedFloor_mps = 0.1;
}  // namespace

VehicleState step_dynamics(const VehicleState& state, const VelocitySetpointNED& cmd,
                           double dt_s, double tau_s) {
    if (!(dt_s > 0.0) || !(tau_s > 0.0)) {
        throw std::invalid_argument("step_dynamics requires dt > 0 and tau > 0");
    }
    const NedVector v_cmd{cmd.n_mps, cmd.e_mps, cmd.d_mps};
    const double decay = std::exp(-dt_s / tau_s);

    VehicleState next = state;
    next.velocity_mps = v_cmd + (state.velocity_mps - v_cmd) * decay;
    next.position_m =
        state.position_m + (state.velocity_mps + next.velocity_mps) * (dt_s / 2.0);
    return next;
}

double heading_from_command(const VelocitySetpointNED& cmd, double fallback_deg) {
    const double horizontal = std::hypot(cmd.n_mps, cmd.e_mps);
    if (horizontal <= kHeadingSpeedFloor_mps) {
        return fallback_deg;
    }
    double deg = std::atan2(cmd.e_mps, cmd.n_mps) * 180.0 / kPi;
    if (deg < 0.0) {
        deg += 360.0;
    }
    return deg;
}

WaypointCommand waypoint_velocity(const VehicleState& state, const Mission& mission,
                                  std::size_t active_index) {
    if (mission.waypoints_m.empty()) {
        throw std::invalid_argument("mission has no waypoints");
    }

    WaypointCommand out;
    out.index = active_index;
    while (out.index < mission.waypoints_m.size()) {
        const NedVector to_wp = mission.waypoints_m[out.index] - state.position_m;
        if (to_wp.norm() > mission.acceptance_radius_m) {
            break;
        }
        ++out.index;
    }
    if (out.index >= mission.waypoints_m.size()) {
        out.index = mission.waypoints_m.size();
        out.complete = true;
        return out;  // zero setpoint
    }

    const NedVector to_wp = mission.waypoints_m[out.index] - state.position_m;
    const double dist = to_wp.norm();
    const NedVector v = to_wp * (mission.cruise_speed_mps / dist);
    out.setpoint = VelocitySetpointNED{v.n, v.e, v.d};
    return out;
}

}  // namespace stadia
