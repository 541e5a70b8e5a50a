// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Run via ctest or directly; the split-process criterion
// needs SIMCTL_BIN pointing at the simctl executable.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "stadia/sim_runner.hpp"
#include "test_scenarios.hpp"

using namespace stadia;

namespace {

struct LoggedRun {
    std::string name;
    std::vector<LogRow> log;
    double detection_interval_s = 0.0;
    double dt_s = 0.0;
};

std::vector<LoggedRun> g_runs;  // every log produced here, for the cadence check

RunResult run_and_keep(const Scenario& s, const std::string& name) {
    RunResult result = run_scenario(s);
    g_runs.push_back({name, result.log, s.guidance.detection_interval_s, s.dt_s});
    return result;
}

double elapsed_s(const std::chrono::steady_clock::time_point& start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

bool check(bool ok, const std::string& detail, std::string& why) {
    if (!ok && why.empty()) {
        why = detail;
    }
    return ok;
}

// 1. Depth-estimation error band: dead-ahead sweep through the quantized
//    detector, |z_est - z_true| <= 0.5 m below 2.5 m and <= 1.0 m to 5 m.
bool criterion_depth_band(std::string& why) {
    const auto start = std::chrono::steady_clock::now();
    DetectorModel model;
    model.quantize_px = true;
    bool ok = true;
    for (int i = 0; i <= 82; ++i) {
        const double z_true = 0.9 + 0.05 * i;
        if (z_true > 5.0) {
            break;
        }
        const auto det = synth_detection(RelativeTarget{0.0, 0.0, z_true}, model);
        ok &= check(det.has_value(), "no detection at z=" + std::to_string(z_true), why);
        if (!det) {
            continue;
        }
        const auto est = position_from_detection(det->box, model.camera, det->probability, 0.7);
        ok &= check(est.has_value(), "no estimate at z=" + std::to_string(z_true), why);
        if (!est) {
            continue;
        }
        const double err = std::abs(est->forward_m - z_true);
        const double band = z_true <= 2.5 ? 0.5 : 1.0;
        ok &= check(err <= band,
                    "depth error " + std::to_string(err) + " at z=" + std::to_string(z_true),
                    why);
    }
    ok &= check(elapsed_s(start) < 1.0, "sweep exceeded 1 s", why);
    return ok;
}

// 2. Detection envelope: nothing beyond 12 m, every probability >= 0.70, and
//    a below-threshold detection never yields a setpoint.
bool criterion_envelope(std::string& why) {
    const auto start = std::chrono::steady_clock::now();
    DetectorModel model;
    model.quantize_px = true;
    bool ok = true;
    for (double z = 0.05; z <= 16.0; z += 0.05) {
        for (double x = -6.0; x <= 6.0; x += 0.25) {
            const auto det = synth_detection(RelativeTarget{x, 0.3, z}, model);
            if (!det) {
                continue;
            }
            const double range = std::sqrt(x * x + 0.09 + z * z);
            ok &= check(range <= model.max_range_m + 1e-9,
                        "detection emitted at range " + std::to_string(range), why);
            ok &= check(det->probability >= model.p_far - 1e-12,
                        "probability below the 0.70 boundary", why);
        }
    }
    ok &= check(!synth_detection(RelativeTarget{0.0, 0.0, 15.0}, model).has_value(),
                "detection at 15 m dead ahead", why);

    // Below-threshold probability cannot reach guidance.
    const BoundingBox box{288, 216, 352, 264};
    ok &= check(!position_from_detection(box, model.camera, 0.5, 0.7).has_value(),
                "sub-threshold detection produced an estimate", why);
    TargetEstimate forged;
    forged.right_m = 0.5;
    forged.forward_m = 5.0;
    forged.size = 0.01;
    forged.centre = {0.3, 0.0};
    forged.probability = 0.69;
    GuidanceConfig cfg;  // threshold 0.7
    ModeState state;
    const auto step = guidance_step(forged, 0.0, 0.0, state, cfg);
    ok &= check(!step.setpoint.has_value() && step.mode == FlightMode::Guided,
                "sub-threshold detection drove a setpoint", why);
    ok &= check(elapsed_s(start) < 1.0, "sweep exceeded 1 s", why);
    return ok;
}

// 3. Avoidance direction: target left (x < 0) at heading 0 commands east,
//    mirrored target commands west. Exact sign check over a 10^3 grid.
bool criterion_avoidance_direction(std::string& why) {
    GuidanceConfig cfg;
    bool ok = true;
    for (int ix = 0; ix < 10; ++ix) {
        for (int iy = 0; iy < 10; ++iy) {
            for (int iz = 0; iz < 10; ++iz) {
                const double x = -3.0 + 0.295 * ix;  // [-3, -0.345]
                const double y = -1.0 + 0.22 * iy;
                const double z = 0.5 + 0.7 * iz;
                const BodyTarget left{z, x, y};
                const BodyTarget right{z, -x, y};
                const auto sp_left = avoidance_setpoint(left, 0.0, cfg);
                const auto sp_right = avoidance_setpoint(right, 0.0, cfg);
                ok &= check(sp_left.e_mps > 0.0, "left target did not command east", why);
                ok &= check(sp_right.e_mps < 0.0, "right target did not command west", why);
            }
        }
    }
    return ok;
}

// 4. Head-on avoidance efficacy: paired runs, CA on vs off.
bool criterion_head_on(std::string& why) {
    const auto start = std::chrono::steady_clock::now();
    Scenario with_ca = testing::head_on();
    Scenario without_ca = with_ca;
    without_ca.guidance_enabled = false;

    const auto on = run_and_keep(with_ca, "head_on_ca");
    const auto off = run_and_keep(without_ca, "head_on_noca");

    bool ok = true;
    ok &= check(on.report.min_separation_m >= 2.0 * off.report.min_separation_m,
                "CA did not double the miss distance (on " +
                    std::to_string(on.report.min_separation_m) + ", off " +
                    std::to_string(off.report.min_separation_m) + ")",
                why);
    ok &= check(on.report.min_separation_m >= 1.5,
                "CA miss distance " + std::to_string(on.report.min_separation_m) + " < 1.5 m",
                why);
    ok &= check(elapsed_s(start) < 5.0, "paired runs exceeded 5 s", why);
    return ok;
}

// 5. Tracking dead-band and anti-symmetry.
bool criterion_dead_band(std::string& why) {
    GuidanceConfig cfg;
    cfg.has_net = true;
    bool ok = true;

    // |x'| <= 0.4 zeroes the lateral channel for any body and heading.
    for (double cx = -0.4; cx <= 0.4 + 1e-12; cx += 0.05) {
        for (double cy = -0.9; cy <= 0.9 + 1e-12; cy += 0.15) {
            for (double heading = 0.0; heading < 360.0; heading += 45.0) {
                const BodyTarget body{1.2, -0.8, 0.5};
                const auto sp = tracking_setpoint(body, {cx, cy}, heading, cfg);
                ok &= check(sp.n_mps == 0.0 && sp.e_mps == 0.0,
                            "lateral command inside the dead-band", why);
            }
        }
    }

    // Out-of-band on both axes: tracking laterals are the exact negation of
    // the avoidance laterals.
    for (double cx : {-0.9, -0.55, 0.45, 0.8}) {
        for (double cy : {-0.85, -0.5, 0.6, 0.95}) {
            for (double heading = 0.0; heading < 360.0; heading += 30.0) {
                const BodyTarget body{1.0, 0.8, 0.5};  // small enough to never clamp
                const auto track = tracking_setpoint(body, {cx, cy}, heading, cfg);
                const auto avoid = avoidance_setpoint(body, heading, cfg);
                ok &= check(track.n_mps == -avoid.n_mps && track.e_mps == -avoid.e_mps,
                            "anti-symmetry broken at heading " + std::to_string(heading), why);
            }
        }
    }
    return ok;
}

// 6. Mode-machine timing: guided again within t_R + dt of the last
//    detection, mission distance strictly decreasing once converged, and the
//    detection cadence invariant in every log produced by this suite.
bool criterion_mode_timing(std::string& why) {
    const Scenario s = testing::crossing_enemy();
    const auto result = run_and_keep(s, "crossing_enemy");
    bool ok = true;

    ok &= check(result.report.detections_emitted >= 2, "scenario produced too few detections",
                why);
    double t0 = -1.0;
    bool saw_offboard = false;
    for (const auto& row : result.log) {
        if (row.det_seq) {
            t0 = row.t_s;
        }
        saw_offboard |= row.mode == FlightMode::Offboard;
    }
    ok &= check(saw_offboard, "vehicle never entered offboard", why);

    const double revert_deadline = t0 + s.guidance.refresh_timeout_s + s.dt_s;
    for (const auto& row : result.log) {
        if (row.t_s > revert_deadline + 1e-9) {
            ok &= check(row.mode == FlightMode::Guided,
                        "still offboard at t=" + std::to_string(row.t_s), why);
        }
    }

    // Distance to the active waypoint strictly decreases once speed tracking
    // has converged (finite-difference velocity vs the logged command).
    const NedVector wp = s.ego.mission.waypoints_m.front();
    bool converged = false;
    double prev_dist = 0.0;
    for (std::size_t k = 0; k + 1 < result.log.size(); ++k) {
        const auto& row = result.log[k];
        if (row.t_s <= revert_deadline) {
            continue;
        }
        const double dist = (wp - row.ego_position_m).norm();
        if (dist <= s.ego.mission.acceptance_radius_m) {
            break;  // mission complete; command goes to zero
        }
        if (!converged) {
            const NedVector v_fd =
                (result.log[k + 1].ego_position_m - row.ego_position_m) * (1.0 / s.dt_s);
            const NedVector v_cmd{row.command.n_mps, row.command.e_mps, row.command.d_mps};
            converged = (v_fd - v_cmd).norm() < 0.1 * s.ego.mission.cruise_speed_mps;
            prev_dist = dist;
            continue;
        }
        ok &= check(dist < prev_dist,
                    "waypoint distance not decreasing at t=" + std::to_string(row.t_s), why);
        prev_dist = dist;
    }
    ok &= check(converged, "speed tracking never converged after the revert", why);

    // Cadence invariant across every log this suite produced.
    for (const auto& run : g_runs) {
        double last_det = -1.0;
        for (const auto& row : run.log) {
            if (!row.det_seq) {
                continue;
            }
            if (last_det >= 0.0) {
                ok &= check(row.t_s - last_det >= run.detection_interval_s - run.dt_s / 2.0,
                            "cadence violation in log " + run.name, why);
            }
            last_det = row.t_s;
        }
    }
    return ok;
}

// 7. Link robustness: codec identity, fuzzed server, split-process parity.
bool criterion_link(std::string& why) {
    bool ok = true;

    std::mt19937_64 rng(20240811);
    std::uniform_int_distribution<std::uint64_t> useq(0, 1'000'000'000ULL);
    std::uniform_int_distribution<std::int64_t> ucoord(-300'000'000, 300'000'000);
    std::uniform_int_distribution<std::int64_t> uprob(0, 1'000'000);
    for (int i = 0; i < 10'000; ++i) {
        DetectionDatagram d;
        d.seq = useq(rng);
        d.t_ms = useq(rng);
        d.class_id = static_cast<std::uint32_t>(useq(rng) % 3);
        d.prob = static_cast<double>(uprob(rng)) / 1e6;
        d.x_m = static_cast<double>(ucoord(rng)) / 1e6;
        d.y_m = static_cast<double>(ucoord(rng)) / 1e6;
        d.z_m = static_cast<double>(ucoord(rng)) / 1e6;
        const auto back = decode_detection(encode_detection(d));
        const bool same = back && back->seq == d.seq && back->t_ms == d.t_ms &&
                          back->class_id == d.class_id && back->prob == d.prob &&
                          back->x_m == d.x_m && back->y_m == d.y_m && back->z_m == d.z_m;
        ok &= check(same, "codec round trip diverged", why);
        if (!same) {
            break;
        }
    }

    // Fuzz the server with garbage datagrams.
    {
        DetectionMailbox mailbox;
        UdpDetectionServer server(0, mailbox);
        UdpDetectionSender sender("127.0.0.1", server.port());
        std::uniform_int_distribution<int> ulen(0, 400);
        std::uniform_int_distribution<int> ubyte(0, 255);
        for (int i = 0; i < 10'000; ++i) {
            std::string junk(static_cast<std::size_t>(ulen(rng)), '\0');
            for (auto& ch : junk) {
                ch = static_cast<char>(ubyte(rng));
            }
            sender.send_raw(junk);
        }
        // The link still works and the mailbox contents stay well-formed.
        bool delivered = false;
        const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(5);
        while (std::chrono::steady_clock::now() < deadline) {
            sender.send({2'000'000'000ULL, 1, 0, 0.91, 0.25, -0.25, 5.5});
            const auto latest = mailbox.peek();
            if (latest && latest->seq == 2'000'000'000ULL) {
                delivered = latest->prob >= 0.0 && latest->prob <= 1.0 &&
                            std::isfinite(latest->x_m) && std::isfinite(latest->z_m);
                break;
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(1));
        }
        ok &= check(delivered, "server lost the valid datagram after the fuzz burst", why);
        server.stop();
    }

    // Split-process parity on the head-on scenario.
    const char* simctl = std::getenv("SIMCTL_BIN");
    if (!check(simctl != nullptr, "SIMCTL_BIN not set", why)) {
        return false;
    }
    const auto tmp = std::filesystem::temp_directory_path() / "stadia_acceptance";
    std::filesystem::create_directories(tmp);
    const auto scenario_path = tmp / "head_on.json";
    {
        std::ofstream out(scenario_path);
        out << scenario_to_json(testing::head_on());
    }
    const auto out_dir = tmp / "split_run";
    const std::string cmd = std::string("\"") + simctl + "\" run \"" + scenario_path.string() +
                            "\" --mode split --det-port 0 --out \"" + out_dir.string() +
                            "\" > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    ok &= check(rc == 0, "simctl split run failed", why);
    if (rc == 0) {
        std::ifstream report_in(out_dir / "report.json");
        nlohmann::json report = nlohmann::json::parse(report_in, nullptr, false);
        ok &= check(!report.is_discarded() && report.contains("min_separation_m"),
                    "split run report unreadable", why);
        if (report.contains("min_separation_m")) {
            const double split_sep = report["min_separation_m"].get<double>();
            const auto inproc = run_and_keep(testing::head_on(), "head_on_inproc_parity");
            const double ref = inproc.report.min_separation_m;
            ok &= check(split_sep >= 1.5, "split run did not avoid (min separation " +
                                              std::to_string(split_sep) + ")",
                        why);
            ok &= check(std::abs(split_sep - ref) <= 0.2 * ref,
                        "split min separation " + std::to_string(split_sep) +
                            " deviates more than 20% from in-process " + std::to_string(ref),
                        why);
        }
    }
    return ok;
}

// 8. Determinism: identical scenario and seed give byte-identical CSV logs.
bool criterion_determinism(std::string& why) {
    const auto a = run_scenario(testing::head_on());
    const auto b = run_scenario(testing::head_on());
    const auto tmp = std::filesystem::temp_directory_path() / "stadia_acceptance";
    std::filesystem::create_directories(tmp);
    const auto pa = tmp / "det_a.csv";
    const auto pb = tmp / "det_b.csv";
    write_log(a.log, pa.string());
    write_log(b.log, pb.string());

    std::ifstream fa(pa, std::ios::binary);
    std::ifstream fb(pb, std::ios::binary);
    std::stringstream sa, sb;
    sa << fa.rdbuf();
    sb << fb.rdbuf();
    const bool same = sa.str() == sb.str() && !sa.str().empty();
    return check(same, "logs differ between identical runs", why);
}

struct Criterion {
    int number;
    const char* name;
    std::function<bool(std::string&)> fn;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "depth estimation error band (0.9-5.0 m sweep)", criterion_depth_band},
        {2, "detection envelope and probability boundary", criterion_envelope},
        {3, "avoidance direction (left target -> go right)", criterion_avoidance_direction},
        {4, "head-on avoidance efficacy (paired runs)", criterion_head_on},
        {5, "tracking dead-band and anti-symmetry", criterion_dead_band},
        {6, "mode-machine timing and detection cadence", criterion_mode_timing},
        {7, "link robustness and split-process parity", criterion_link},
        {8, "determinism (byte-identical logs)", criterion_determinism},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        std::string why;
        bool ok = false;
        try {
            ok = c.fn(why);
        } catch (const std::exception& e) {
            why = std::string("exception: ") + e.what();
        }
        if (ok) {
            std::cout << "PASS  criterion " << c.number << ": " << c.name << "\n";
        } else {
            ++failures;
            std::cout << "FAIL  criterion " << c.number << ": " << c.name;
            if (!why.empty()) {
                std::cout << " [" << why << "]";
            }
            std::cout << "\n";
        }
    }
    if (failures > 0) {
        std::cout << failures << " criterion(s) failed\n";
    }
    return failures == 0 ? 0 : 1;
}
