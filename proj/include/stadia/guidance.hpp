#pragma once

#include <optional>

#include "stadia/cam_geometry.hpp"

// Velocity-setpoint manoeuvre generation and the guided/offboard mode
// machine.
//
// Two manoeuvre laws share the same lateral terms with opposite sign:
// avoidance (no net) flees the target, tracking (with a net) pursues it but
// only while the target sits outside a dead-band around the frame centre,
// so a centred target draws no lateral command.
//
// Mode machine: a mission planner owns the vehicle (Guided) until a valid
// detection arrives; the machine then emits a zero setpoint as the offboard
// entry handshake followed by the manoeuvre setpoint (Offboard). Offboard
// expires back to Guided when no command has been issued for
// refresh_timeout_s.

namespace stadia {

// Camera-frame estimate relabelled to body axes: (forward, right, up) =
// (depth, lateral, vertical).
struct BodyTarget {
    double forward_m = 0.0;
    double right_m = 0.0;
    double up_m = 0.0;
};

struct VelocitySetpointNED {
    double n_mps = 0.0;
    double e_mps = 0.0;
    double d_mps = 0.0;

    double norm() const;
};

// How body components mix into NED. Paper keeps n tied to the forward
// component and e to the lateral one; Standard applies the usual heading
// rotation for comparison runs.
enum class LateralMixing { Paper, Standard };

struct GuidanceConfig {
    double k1 = 1.0;     // lateral gain (both laws)
    double k2 = 0.5;     // avoidance vertical gain
    double k_net = 0.5;  // tracking vertical gain
    double deadband = 0.4;  // normalized-centre half-width, per axis
    bool has_net = false;   // selects tracking over avoidance
    double threshold = 0.7;            // detection probability gate
    double detection_interval_s = 0.5; // min spacing between detections (T_D)
    double refresh_timeout_s = 0.5;    // offboard expiry without commands (t_R)
    double v_cap_mps = 3.0;            // setpoint magnitude cap
    LateralMixing mixing = LateralMixing::Paper;
    double d_sign = 1.0;  // flips the vertical channel for experiments

    bool valid() const {
        return k1 > 0.0 && k2 > 0.0 && k_net > 0.0 && deadband > 0.0 &&
               deadband < 1.0 && detection_interval_s > 0.0 &&
               refresh_timeout_s > 0.0 && v_cap_mps > 0.0;
    }
};

enum class FlightMode { Guided, Offboard };

struct ModeState {
    FlightMode mode = FlightMode::Guided;
    double offboard_entry_s = 0.0;
    double last_command_s = 0.0;
    bool stepped = false;    // set after the first step
    double last_step_s = 0.0;
};

struct GuidanceStepResult {
    FlightMode mode = FlightMode::Guided;
    std::optional<VelocitySetpointNED> setpoint;
    // True when the offboard-entry handshake (a zero setpoint) was emitted
    // immediately before `setpoint` on this step.
    bool zero_setpoint_emitted = false;
};

// (forward, right, up) <- (depth, lateral, vertical).
BodyTarget body_from_estimate(const TargetEstimate& est);

// Avoidance law (no net):
//   n = k1 * sin(heading) * forward
//   e = -k1 * cos(heading) * right
//   d = k2 * up
// clamped to v_cap by uniform scaling.
VelocitySetpointNED avoidance_setpoint(const BodyTarget& body, double heading_deg,
                                       const GuidanceConfig& cfg);

// Tracking law (with a net). Lateral terms are the exact negation of the
// avoidance law, gated per axis by the dead-band on the normalized centre:
// in-band x zeroes the lateral channel entirely, in-band y zeroes the
// vertical channel. Clamped to v_cap.
VelocitySetpointNED tracking_setpoint(const BodyTarget& body,
                                      const NormalizedCentre& centre,
                                      double heading_deg,
                                      const GuidanceConfig& cfg);

// One step of the mode machine at time now_s. `detection` is empty when no
// (gated) detection arrived since the previous step. Throws
// std::invalid_argument if the clock runs backwards.
GuidanceStepResult guidance_step(const std::optional<TargetEstimate>& detection,
                                 double heading_deg, double now_s,
                                 ModeState& state, const GuidanceConfig& cfg);

}  // namespace stadia
