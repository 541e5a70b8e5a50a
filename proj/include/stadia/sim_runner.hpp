#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "stadia/link.hpp"
#include "stadia/scenario.hpp"

// Fixed-timestep closed loop: synthetic detector -> guidance -> point-mass
// vehicle, with the enemy flown kinematically. Detection runs every
// detection_interval_s; guidance setpoints override the waypoint mission
// exactly while the mode machine is Offboard.
//
// In-process mode wires the detector straight into guidance and is fully
// deterministic. Split-process mode spawns the detector as a child process
// that receives ground-truth frames on stdin and reports estimates back over
// the UDP detection link, exercising the real wire path.

namespace stadia {

struct LogRow {
    double t_s = 0.0;
    NedVector ego_position_m;
    double ego_heading_deg = 0.0;
    NedVector enemy_position_m;
    FlightMode mode = FlightMode::Guided;
    std::optional<std::uint64_t> det_seq;
    std::optional<TargetEstimate> detection;
    VelocitySetpointNED command;
};

struct RunReport {
    double min_separation_m = 0.0;
    double time_in_offboard_s = 0.0;
    bool capture = false;
    std::uint64_t detections_emitted = 0;
    std::optional<double> mean_detection_interval_s;
    bool mission_complete = false;
    double duration_s = 0.0;
    std::uint64_t seed = 0;
};

struct RunResult {
    std::vector<LogRow> log;
    RunReport report;
};

struct RunOptions {
    std::uint64_t seed = 0;
    std::optional<RunMode> mode_override;
    // Split mode only: executable spawned as the detection process (invoked
    // with `detect-client`), the scenario file it loads, and the link port
    // (0 binds an ephemeral port).
    std::string detector_command;
    std::string scenario_path;
    std::uint16_t det_port = kDefaultDetectionPort;
};

RunResult run_scenario(const Scenario& scenario, const RunOptions& options = {});

// Trajectory CSV, one row per dt step, real fields fixed to 6 decimals so
// identical runs produce identical bytes.
void write_log(const std::vector<LogRow>& log, const std::string& path);
void write_report(const RunReport& report, const std::string& json_path,
                  const std::string& text_path);
std::string report_to_json(const RunReport& report);
std::string report_to_text(const RunReport& report);

// Metrics recomputed from a trajectory CSV (the `report` subcommand).
// Capture needs camera geometry that the log does not carry, so it is not
// re-derived here.
struct LogMetrics {
    std::size_t rows = 0;
    double dt_s = 0.0;
    double min_separation_m = 0.0;
    double time_in_offboard_s = 0.0;
    std::uint64_t detections_emitted = 0;
    std::optional<double> mean_detection_interval_s;
};

LogMetrics metrics_from_csv(const std::string& path);

// --- split-process support -------------------------------------------------
//
// The parent streams ground-truth frame snapshots to the detector child over
// stdin and the child answers on stdout with "SENT,<seq>" or "SKIP" after
// pushing any estimate through the UDP link. Only the UDP payload is part of
// the external interface; the frame side channel is simulation plumbing.

struct FrameSnapshot {
    std::uint64_t t_ms = 0;
    VehicleState ego;
    NedVector enemy_position_m;
};

std::string format_frame_line(const FrameSnapshot& frame);
std::optional<FrameSnapshot> parse_frame_line(std::string_view line);

// Detector-side processing of one frame. Increments seq_counter only when a
// datagram is produced.
std::optional<DetectionDatagram> detect_frame(const FrameSnapshot& frame,
                                              const DetectorModel& model,
                                              double threshold,
                                              std::uint64_t& seq_counter);

// Guidance-side reconstruction of the estimate carried by a datagram.
// Returns empty for non-UAV classes or a depth outside the estimable range.
std::optional<TargetEstimate> estimate_from_datagram(const DetectionDatagram& d,
                                                     const DetectorModel& model);

// Child main loop: read frames until EOF, emit datagrams, ack each frame.
// Returns the number of datagrams sent.
std::uint64_t run_detect_client(std::istream& frames, std::ostream& acks,
                                const Scenario& scenario, UdpDetectionSender& sender);

}  // namespace stadia
