#include "stadia/guidance.hpp"

#include <cmath>
#include <stdexcept>

namespace stadia {

namespace {

constexpr double kPi = 3.14159265358979323846;

VelocitySetpointNED clamp_to_cap(VelocitySetpointNED sp, double v_cap_mps) {
    const double mag = sp.norm();
    if (mag > v_cap_mps && mag > 0.0) {
        const double s = v_cap_mps / mag;
        sp.n_mps *= s;
        sp.e_mps *= s;
        sp.d_mps *= s;
    }
    return sp;
}

// Lateral (n, e) pair shared by both laws; `sign` is +1 for avoidance and
// -1 for tracking.
void lateral_terms(const BodyTarget& body, double heading_deg,
                   const GuidanceConfig& cfg, double sign, double& n, double& e) {
    const double heading_rad = heading_deg * kPi / 180.0;
    if (cfg.mixing == LateralMixing::Paper) {
        n = sign * cfg.k1 * std::sin(heading_rad) * body.forward_m;
        e = -sign * cfg.k1 * std::cos(heading_rad) * body.right_m;
    } else {
        n = sign * cfg.k1 *
            (std::cos(heading_rad) * body.forward_m - std::sin(heading_rad) * body.right_m);
        e = sign * cfg.k1 *
            (std::sin(heading_rad) * body.forward_m + std::cos(heading_rad) * body.right_m);
    }
}

}  // namespace

double VelocitySetpointNED::norm() const {
    return std::sqrt(n_mps * n_mps + e_mps * e_mps + d_mps * d_mps);
}

BodyTarget body_from_estimate(const TargetEstimate& est) {
    return BodyTarget{est.forward_m, est.right_m, est.up_m};
}

VelocitySetpointNED avoidance_setpoint(const BodyTarget& body, double heading_deg,
                                       const GuidanceConfig& cfg) {
    VelocitySetpointNED sp;
    lateral_terms(body, heading_deg, cfg, +1.0, sp.n_mps, sp.e_mps);
    sp.d_mps = cfg.d_sign * cfg.k2 * body.up_m;
    return clamp_to_cap(sp, cfg.v_cap_mps);
}

VelocitySetpointNED tracking_setpoint(const BodyTarget& body,
                                      const NormalizedCentre& centre,
                                      double heading_deg,
                                      const GuidanceConfig& cfg) {
    const bool out_x = std::abs(centre.x) > cfg.deadband;
    const bool out_y = std::abs(centre.y) > cfg.deadband;

    VelocitySetpointNED sp;
    if (out_x) {
        lateral_terms(body, heading_deg, cfg, -1.0, sp.n_mps, sp.e_mps);
        sp.d_mps = out_y ? cfg.d_sign * cfg.k_net * body.up_m : 0.0;
    } else {
        // Target horizontally centred: no lateral manoeuvre, vertical
        // channel stays active.
        sp.n_mps = 0.0;
        sp.e_mps = 0.0;
        sp.d_mps = cfg.d_sign * cfg.k_net * body.up_m;
    }
    return clamp_to_cap(sp, cfg.v_cap_mps);
}

GuidanceStepResult guidance_step(const std::optional<TargetEstimate>& detection,
                                 double heading_deg, double now_s,
                                 ModeState& state, const GuidanceConfig& cfg) {
    if (state.stepped && now_s < state.last_step_s) {
        throw std::invalid_argument("guidance clock went backwards");
    }
    state.stepped = true;
    state.last_step_s = now_s;

    const bool accepted = detection.has_value() &&
                          detection->probability >= cfg.threshold;

    GuidanceStepResult result;
    if (accepted) {
        const BodyTarget body = body_from_estimate(*detection);
        const VelocitySetpointNED sp =
            cfg.has_net ? tracking_setpoint(body, detection->centre, heading_deg, cfg)
                        : avoidance_setpoint(body, heading_deg, cfg);
        if (state.mode == FlightMode::Guided) {
            state.mode = FlightMode::Offboard;
            state.offboard_entry_s = now_s;
            result.zero_setpoint_emitted = true;
        }
        state.last_command_s = now_s;
        result.setpoint = sp;
    } else if (state.mode == FlightMode::Offboard &&
               now_s - state.last_command_s > cfg.refresh_timeout_s) {
        state.mode = FlightMode::Guided;
    }
    result.mode = state.mode;
    return result;
}

}  // namespace stadia
