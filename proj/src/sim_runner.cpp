#include "stadia/sim_runner.hpp"

#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <memory>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace stadia {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string fmt6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

// Kinematic enemy: constant speed along its waypoint polyline, holding
// position at the end (or with no waypoints at all).
struct EnemyMover {
    NedVector position;
    const std::vector<NedVector>* waypoints = nullptr;
    std::size_t index = 0;
    double speed_mps = 0.0;

    void step(double dt_s) {
        double remaining = speed_mps * dt_s;
        while (remaining > 0.0 && waypoints && index < waypoints->size()) {
            const NedVector to_wp = (*waypoints)[index] - position;
            const double dist = to_wp.norm();
            if (dist <= remaining) {
                position = (*waypoints)[index];
                remaining -= dist;
                ++index;
            } else {
                position = position + to_wp * (remaining / dist);
                remaining = 0.0;
            }
        }
    }
};

struct CaptureTracker {
    double hold_s = 0.0;
    bool captured = false;

    void update(const VehicleState& ego, const NedVector& enemy, const Scenario& sc,
                double dt_s) {
        if (captured) {
            return;
        }
        const double separation = (enemy - ego.position_m).norm();
        const RelativeTarget rel = relative_in_camera(ego, enemy);
        bool in_band = false;
        if (rel.forward_m > 0.0) {
            const CameraModel& cam = sc.detector.camera;
            const double cx =
                std::atan(rel.right_m / rel.forward_m) * 180.0 / kPi / cam.half_fov_x_deg;
            const double cy =
                std::atan(rel.up_m / rel.forward_m) * 180.0 / kPi / cam.half_fov_y_deg;
            in_band = std::abs(cx) <= sc.guidance.deadband &&
                      std::abs(cy) <= sc.guidance.deadband;
        }
        if (separation <= sc.capture_radius_m && in_band) {
            hold_s += dt_s;
            captured = hold_s >= sc.capture_hold_s;
        } else {
            hold_s = 0.0;
        }
    }
};

// Minimal fork/exec child with line-oriented stdin/stdout pipes.
class ChildProcess {
public:
    explicit ChildProcess(const std::vector<std::string>& argv) {
        ::signal(SIGPIPE, SIG_IGN);

        int to_child[2];
        int from_child[2];
        if (::pipe(to_child) != 0 || ::pipe(from_child) != 0) {
            throw std::runtime_error("failed to create pipes for detector process");
        }
        pid_ = ::fork();
        if (pid_ < 0) {
            throw std::runtime_error("failed to fork detector process");
        }
        if (pid_ == 0) {
            ::dup2(to_child[0], STDIN_FILENO);
            ::dup2(from_child[1], STDOUT_FILENO);
            ::close(to_child[0]);
            ::close(to_child[1]);
            ::close(from_child[0]);
            ::close(from_child[1]);
            std::vector<char*> args;
            args.reserve(argv.size() + 1);
            for (const auto& a : argv) {
                args.push_back(const_cast<char*>(a.c_str()));
            }
            args.push_back(nullptr);
            ::execv(args[0], args.data());
            _exit(127);
        }
        ::close(to_child[0]);
        ::close(from_child[1]);
        stdin_fd_ = to_child[1];
        stdout_fd_ = from_child[0];
    }

    ~ChildProcess() {
        close_stdin();
        if (stdout_fd_ >= 0) {
            ::close(stdout_fd_);
        }
        if (pid_ > 0 && !waited_) {
            ::kill(pid_, SIGTERM);
            ::waitpid(pid_, nullptr, 0);
        }
    }

    void write_line(const std::string& line) {
        std::string data = line + "\n";
        std::size_t off = 0;
        while (off < data.size()) {
            const ssize_t n = ::write(stdin_fd_, data.data() + off, data.size() - off);
            if (n <= 0) {
                throw std::runtime_error("detector process is not accepting frames");
            }
            off += static_cast<std::size_t>(n);
        }
    }

    std::optional<std::string> read_line() {
        while (true) {
            const std::size_t nl = buffer_.find('\n');
            if (nl != std::string::npos) {
                std::string line = buffer_.substr(0, nl);
                buffer_.erase(0, nl + 1);
                return line;
            }
            char chunk[256];
            const ssize_t n = ::read(stdout_fd_, chunk, sizeof(chunk));
            if (n <= 0) {
                if (!buffer_.empty()) {
                    std::string line = std::move(buffer_);
                    buffer_.clear();
                    return line;
                }
                return std::nullopt;
            }
            buffer_.append(chunk, static_cast<std::size_t>(n));
        }
    }

    void close_stdin() {
        if (stdin_fd_ >= 0) {
            ::close(stdin_fd_);
            stdin_fd_ = -1;
        }
    }

    int wait() {
        int status = 0;
        if (pid_ > 0 && !waited_) {
            ::waitpid(pid_, &status, 0);
            waited_ = true;
        }
        return status;
    }

private:
    pid_t pid_ = -1;
    int stdin_fd_ = -1;
    int stdout_fd_ = -1;
    bool waited_ = false;
    std::string buffer_;
};

// Split-mode detection exchange: one frame out, one ack back, then the
// datagram (if any) is collected from the mailbox.
class SplitDetector {
public:
    explicit SplitDetector(const RunOptions& options) : server_(options.det_port, mailbox_) {
        if (options.detector_command.empty() || options.scenario_path.empty()) {
            throw std::invalid_argument(
                "split mode requires detector_command and scenario_path");
        }
        child_ = std::make_unique<ChildProcess>(std::vector<std::string>{
            options.detector_command, "detect-client", "--scenario", options.scenario_path,
            "--port", std::to_string(server_.port())});
    }

    std::optional<DetectionDatagram> exchange(const FrameSnapshot& frame) {
        child_->write_line(format_frame_line(frame));
        const auto ack = child_->read_line();
        if (!ack) {
            throw std::runtime_error("detector process exited mid-run");
        }
        if (ack->rfind("SENT,", 0) != 0) {
            return std::nullopt;
        }
        const std::uint64_t seq = std::strtoull(ack->c_str() + 5, nullptr, 10);
        const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(5);
        while (std::chrono::steady_clock::now() < deadline) {
            const auto latest = mailbox_.peek();
            if (latest && latest->seq >= seq) {
                return mailbox_.take();
            }
            std::this_thread::sleep_for(std::chrono::microseconds(100));
        }
        throw std::runtime_error("detection datagram never arrived on the UDP link");
    }

    void finish() {
        child_->close_stdin();
        child_->wait();
        server_.stop();
    }

private:
    DetectionMailbox mailbox_;
    UdpDetectionServer server_;
    std::unique_ptr<ChildProcess> child_;
};

}  // namespace

std::string format_frame_line(const FrameSnapshot& frame) {
    std::ostringstream oss;
    oss << "FRAME," << frame.t_ms << ',' << fmt6(frame.ego.position_m.n) << ','
        << fmt6(frame.ego.position_m.e) << ',' << fmt6(frame.ego.position_m.d) << ','
        << fmt6(frame.ego.heading_deg) << ',' << fmt6(frame.enemy_position_m.n) << ','
        << fmt6(frame.enemy_position_m.e) << ',' << fmt6(frame.enemy_position_m.d);
    return oss.str();
}

std::optional<FrameSnapshot> parse_frame_line(std::string_view line) {
    std::vector<std::string> fields;
    std::string current;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(current);
            current.clear();
        } else {
            current.push_back(ch);
        }
    }
    fields.push_back(current);
    if (fields.size() != 9 || fields[0] != "FRAME") {
        return std::nullopt;
    }
    try {
        FrameSnapshot frame;
        frame.t_ms = std::stoull(fields[1]);
        frame.ego.position_m = {std::stod(fields[2]), std::stod(fields[3]), std::stod(fields[4])};
        frame.ego.heading_deg = std::stod(fields[5]);
        frame.enemy_position_m = {std::stod(fields[6]), std::stod(fields[7]),
                                  std::stod(fields[8])};
        return frame;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

std::optional<DetectionDatagram> detect_frame(const FrameSnapshot& frame,
                                              const DetectorModel& model, double threshold,
                                              std::uint64_t& seq_counter) {
    const RelativeTarget rel = relative_in_camera(frame.ego, frame.enemy_position_m);
    const auto synth = synth_detection(rel, model);
    if (!synth) {
        return std::nullopt;
    }
    const auto est =
        position_from_detection(synth->box, model.camera, synth->probability, threshold);
    if (!est) {
        return std::nullopt;
    }
    DetectionDatagram d;
    d.seq = ++seq_counter;
    d.t_ms = frame.t_ms;
    d.class_id = 0;
    d.prob = est->probability;
    d.x_m = est->right_m;
    d.y_m = est->up_m;
    d.z_m = est->forward_m;
    return d;
}

std::optional<TargetEstimate> estimate_from_datagram(const DetectionDatagram& d,
                                                     const DetectorModel& model) {
    if (d.class_id != 0 || !(d.z_m > 0.0)) {
        return std::nullopt;
    }
    const auto size = size_from_depth(d.z_m, model);
    if (!size) {
        return std::nullopt;
    }
    const CameraModel& cam = model.camera;
    TargetEstimate est;
    est.right_m = d.x_m;
    est.up_m = d.y_m;
    est.forward_m = d.z_m;
    est.size = *size;
    est.centre.x = std::atan(d.x_m / d.z_m) * 180.0 / kPi / cam.half_fov_x_deg;
    est.centre.y = std::atan(d.y_m / d.z_m) * 180.0 / kPi / cam.half_fov_y_deg;
    est.probability = d.prob;
    return est;
}

std::uint64_t run_detect_client(std::istream& frames, std::ostream& acks,
                                const Scenario& scenario, UdpDetectionSender& sender) {
    std::uint64_t seq_counter = 0;
    std::string line;
    while (std::getline(frames, line)) {
        const auto frame = parse_frame_line(line);
        if (!frame) {
            acks << "SKIP\n" << std::flush;
            continue;
        }
        const auto datagram =
            detect_frame(*frame, scenario.detector, scenario.guidance.threshold, seq_counter);
        if (datagram) {
            sender.send(*datagram);
            acks << "SENT," << datagram->seq << "\n" << std::flush;
        } else {
            acks << "SKIP\n" << std::flush;
        }
    }
    return seq_counter;
}

RunResult run_scenario(const Scenario& scenario, const RunOptions& options) {
    const RunMode mode = options.mode_override.value_or(scenario.mode);
    const double dt = scenario.dt_s;
    const auto steps = static_cast<std::size_t>(std::llround(scenario.duration_s / dt));

    std::unique_ptr<SplitDetector> split;
    if (mode == RunMode::SplitProcess) {
        split = std::make_unique<SplitDetector>(options);
    }

    VehicleState ego = scenario.ego.initial_state;
    EnemyMover enemy{scenario.enemy.initial_position_m, &scenario.enemy.waypoints_m, 0,
                     scenario.enemy.speed_mps};

    ModeState mode_state;
    VelocitySetpointNED offboard_cmd;
    std::size_t mission_index = 0;
    bool mission_complete = false;
    std::uint64_t seq_counter = 0;

    CaptureTracker capture;
    double min_separation = (enemy.position - ego.position_m).norm();
    double time_in_offboard = 0.0;
    std::uint64_t detections = 0;
    double last_det_t = 0.0;
    double cadence_sum = 0.0;
    std::uint64_t cadence_count = 0;

    double next_detection_t = 0.0;

    RunResult result;
    result.log.reserve(steps);

    for (std::size_t k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) * dt;

        // Detection at the configured cadence, on the state snapshot at t.
        std::optional<TargetEstimate> detection;
        std::optional<std::uint64_t> det_seq;
        if (t >= next_detection_t - 1e-9) {
            next_detection_t = t + scenario.guidance.detection_interval_s;
            if (mode == RunMode::SplitProcess) {
                FrameSnapshot frame{static_cast<std::uint64_t>(std::llround(t * 1000.0)), ego,
                                    enemy.position};
                if (const auto dgram = split->exchange(frame)) {
                    detection = estimate_from_datagram(*dgram, scenario.detector);
                    if (detection) {
                        det_seq = dgram->seq;
                    }
                }
            } else {
                // In-process delivery skips the wire codec entirely.
                const RelativeTarget rel = relative_in_camera(ego, enemy.position);
                if (const auto synth = synth_detection(rel, scenario.detector)) {
                    detection = position_from_detection(synth->box, scenario.detector.camera,
                                                        synth->probability,
                                                        scenario.guidance.threshold);
                    if (detection) {
                        det_seq = ++seq_counter;
                    }
                }
            }
            if (detection) {
                ++detections;
                if (detections > 1) {
                    cadence_sum += t - last_det_t;
                    ++cadence_count;
                }
                last_det_t = t;
            }
        }

        // Guidance step; its setpoint overrides the mission while Offboard.
        if (scenario.guidance_enabled) {
            const GuidanceStepResult step =
                guidance_step(detection, ego.heading_deg, t, mode_state, scenario.guidance);
            if (step.setpoint) {
                offboard_cmd = *step.setpoint;
            }
        }

        VelocitySetpointNED command;
        if (mode_state.mode == FlightMode::Offboard) {
            command = offboard_cmd;
            // Offboard velocity commands carry no yaw reference: heading holds.
        } else {
            const WaypointCommand wp = waypoint_velocity(ego, scenario.ego.mission, mission_index);
            mission_index = wp.index;
            mission_complete = mission_complete || wp.complete;
            command = wp.setpoint;
            ego.heading_deg = heading_from_command(command, ego.heading_deg);
        }

        LogRow row;
        row.t_s = t;
        row.ego_position_m = ego.position_m;
        row.ego_heading_deg = ego.heading_deg;
        row.enemy_position_m = enemy.position;
        row.mode = mode_state.mode;
        row.det_seq = det_seq;
        row.detection = detection;
        row.command = command;
        result.log.push_back(row);

        min_separation = std::min(min_separation, (enemy.position - ego.position_m).norm());
        capture.update(ego, enemy.position, scenario, dt);
        if (mode_state.mode == FlightMode::Offboard) {
            time_in_offboard += dt;
        }

        ego = step_dynamics(ego, command, dt, scenario.ego.tau_s);
        enemy.step(dt);
    }

    if (split) {
        split->finish();
    }

    result.report.min_separation_m = min_separation;
    result.report.time_in_offboard_s = time_in_offboard;
    result.report.capture = capture.captured;
    result.report.detections_emitted = detections;
    if (cadence_count > 0) {
        result.report.mean_detection_interval_s = cadence_sum / static_cast<double>(cadence_count);
    }
    result.report.mission_complete = mission_complete;
    result.report.duration_s = scenario.duration_s;
    result.report.seed = options.seed;
    return result;
}

void write_log(const std::vector<LogRow>& log, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write log file: " + path);
    }
    out << "t_s,ego_n_m,ego_e_m,ego_d_m,ego_heading_deg,enemy_n_m,enemy_e_m,enemy_d_m,"
           "mode,det_seq,det_x_m,det_y_m,det_z_m,det_prob,cmd_n_mps,cmd_e_mps,cmd_d_mps\n";
    for (const auto& row : log) {
        out << fmt6(row.t_s) << ',' << fmt6(row.ego_position_m.n) << ','
            << fmt6(row.ego_position_m.e) << ',' << fmt6(row.ego_position_m.d) << ','
            << fmt6(row.ego_heading_deg) << ',' << fmt6(row.enemy_position_m.n) << ','
            << fmt6(row.enemy_position_m.e) << ',' << fmt6(row.enemy_position_m.d) << ','
            << (row.mode == FlightMode::Offboard ? "offboard" : "guided") << ',';
        if (row.det_seq) {
            out << *row.det_seq;
        }
        out << ',';
        if (row.detection) {
            out << fmt6(row.detection->right_m) << ',' << fmt6(row.detection->up_m) << ','
                << fmt6(row.detection->forward_m) << ',' << fmt6(row.detection->probability);
        } else {
            out << ",,,";
        }
        out << ',' << fmt6(row.command.n_mps) << ',' << fmt6(row.command.e_mps) << ','
            << fmt6(row.command.d_mps) << '\n';
    }
}

std::string report_to_json(const RunReport& report) {
    nlohmann::json doc;
    doc["min_separation_m"] = report.min_separation_m;
    doc["time_in_offboard_s"] = report.time_in_offboard_s;
    doc["capture"] = report.capture;
    doc["detections_emitted"] = report.detections_emitted;
    if (report.mean_detection_interval_s) {
        doc["mean_detection_interval_s"] = *report.mean_detection_interval_s;
    } else {
        doc["mean_detection_interval_s"] = nullptr;
    }
    doc["mission_complete"] = report.mission_complete;
    doc["duration_s"] = report.duration_s;
    doc["seed"] = report.seed;
    return doc.dump(2) + "\n";
}

std::string report_to_text(const RunReport& report) {
    std::ostringstream oss;
    oss << "run report\n";
    oss << "  min separation:          " << fmt6(report.min_separation_m) << " m\n";
    oss << "  time in offboard:        " << fmt6(report.time_in_offboard_s) << " s\n";
    oss << "  capture:                 " << (report.capture ? "yes" : "no") << "\n";
    oss << "  detections emitted:      " << report.detections_emitted << "\n";
    oss << "  mean detection interval: "
        << (report.mean_detection_interval_s ? fmt6(*report.mean_detection_interval_s) + " s"
                                             : std::string("n/a"))
        << "\n";
    oss << "  mission complete:        " << (report.mission_complete ? "yes" : "no") << "\n";
    oss << "  duration:                " << fmt6(report.duration_s) << " s\n";
    oss << "  seed:                    " << report.seed << "\n";
    return oss.str();
}

void write_report(const RunReport& report, const std::string& json_path,
                  const std::string& text_path) {
    std::ofstream json_out(json_path);
    if (!json_out) {
        throw std::runtime_error("cannot write report file: " + json_path);
    }
    json_out << report_to_json(report);

    std::ofstream text_out(text_path);
    if (!text_out) {
        throw std::runtime_error("cannot write report file: " + text_path);
    }
    text_out << report_to_text(report);
}

LogMetrics metrics_from_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open log file: " + path);
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error("log file is empty: " + path);
    }

    LogMetrics metrics;
    metrics.min_separation_m = std::numeric_limits<double>::infinity();
    std::vector<double> det_times;
    double first_t = 0.0;
    double second_t = 0.0;
    std::size_t offboard_rows = 0;

    while (std::getline(in, line)) {
        std::vector<std::string> fields;
        std::string current;
        for (char ch : line) {
            if (ch == ',') {
                fields.push_back(current);
                current.clear();
            } else {
                current.push_back(ch);
            }
        }
        fields.push_back(current);
        if (fields.size() != 17) {
            throw std::runtime_error("malformed log row in " + path);
        }
        const double t = std::stod(fields[0]);
        const NedVector ego{std::stod(fields[1]), std::stod(fields[2]), std::stod(fields[3])};
        const NedVector enemy{std::stod(fields[5]), std::stod(fields[6]), std::stod(fields[7])};
        metrics.min_separation_m = std::min(metrics.min_separation_m, (enemy - ego).norm());
        if (fields[8] == "offboard") {
            ++offboard_rows;
        }
        if (!fields[9].empty()) {
            det_times.push_back(t);
        }
        if (metrics.rows == 0) {
            first_t = t;
        } else if (metrics.rows == 1) {
            second_t = t;
        }
        ++metrics.rows;
    }

    if (metrics.rows >= 2) {
        metrics.dt_s = second_t - first_t;
    }
    metrics.time_in_offboard_s = static_cast<double>(offboard_rows) * metrics.dt_s;
    metrics.detections_emitted = det_times.size();
    if (det_times.size() >= 2) {
        double sum = 0.0;
        for (std::size_t i = 1; i < det_times.size(); ++i) {
            sum += det_times[i] - det_times[i - 1];
        }
        metrics.mean_detection_interval_s = sum / static_cast<double>(det_times.size() - 1);
    }
    if (metrics.rows == 0) {
        metrics.min_separation_m = 0.0;
    }
    return metrics;
}

}  // namespace stadia
