// Scenario runner CLI.
//
//   simctl run <scenario.json> [--seed N] [--out DIR] [--mode inproc|split]
//              [--det-port P]
//   simctl report <log.csv> [--json FILE]
//   simctl detect-client --scenario <file> --port P
//
// `detect-client` is the detection-process half of split mode: it reads
// ground-truth frames on stdin and streams estimates over the UDP detection
// link. `run --mode split` spawns it automatically.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "stadia/link.hpp"
#include "stadia/scenario.hpp"
#include "stadia/sim_runner.hpp"

namespace {

std::string self_executable() {
    std::error_code ec;
    const auto path = std::filesystem::read_symlink("/proc/self/exe", ec);
    return ec ? std::string("simctl") : path.string();
}

int fail(const std::string& reason) {
    nlohmann::json err;
    err["error"] = reason;
    std::cerr << err.dump() << std::endl;
    return 1;
}

int cmd_run(const std::string& scenario_path, std::uint64_t seed, std::string out_dir,
            const std::string& mode_flag, std::optional<std::uint16_t> det_port_flag) {
    const stadia::Scenario scenario = stadia::load_scenario(scenario_path);

    stadia::RunOptions options;
    options.seed = seed;
    options.scenario_path = scenario_path;
    options.detector_command = self_executable();
    options.det_port = stadia::resolve_detection_port(det_port_flag);
    if (mode_flag == "inproc") {
        options.mode_override = stadia::RunMode::InProcess;
    } else if (mode_flag == "split") {
        options.mode_override = stadia::RunMode::SplitProcess;
    }

    const stadia::RunResult result = stadia::run_scenario(scenario, options);

    if (out_dir.empty()) {
        out_dir = "out";
    }
    std::filesystem::create_directories(out_dir);
    const auto dir = std::filesystem::path(out_dir);
    stadia::write_log(result.log, (dir / "trajectory.csv").string());
    stadia::write_report(result.report, (dir / "report.json").string(),
                         (dir / "report.txt").string());

    std::cout << stadia::report_to_text(result.report);
    std::cout << "log: " << (dir / "trajectory.csv").string() << "\n";
    return 0;
}

int cmd_report(const std::string& log_path, const std::string& json_path) {
    const stadia::LogMetrics metrics = stadia::metrics_from_csv(log_path);

    nlohmann::json doc;
    doc["rows"] = metrics.rows;
    doc["dt_s"] = metrics.dt_s;
    doc["min_separation_m"] = metrics.min_separation_m;
    doc["time_in_offboard_s"] = metrics.time_in_offboard_s;
    doc["detections_emitted"] = metrics.detections_emitted;
    if (metrics.mean_detection_interval_s) {
        doc["mean_detection_interval_s"] = *metrics.mean_detection_interval_s;
    } else {
        doc["mean_detection_interval_s"] = nullptr;
    }

    if (!json_path.empty()) {
        std::ofstream out(json_path);
        if (!out) {
            throw std::runtime_error("cannot write " + json_path);
        }
        out << doc.dump(2) << "\n";
    }
    std::cout << doc.dump(2) << "\n";
    return 0;
}

int cmd_detect_client(const std::string& scenario_path, std::uint16_t port) {
    const stadia::Scenario scenario = stadia::load_scenario(scenario_path);
    stadia::UdpDetectionSender sender("127.0.0.1", port);
    stadia::run_detect_client(std::cin, std::cout, scenario, sender);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"stadia scenario runner"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::uint64_t seed = 0;
    std::string out_dir;
    std::string mode_flag;
    std::optional<std::uint16_t> det_port_flag;

    auto* run = app.add_subcommand("run", "run a scenario and write trajectory + report");
    run->add_option("scenario", scenario_path, "scenario JSON file")->required();
    run->add_option("--seed", seed, "run seed recorded in the report");
    run->add_option("--out", out_dir, "output directory (default: out)");
    run->add_option("--mode", mode_flag, "override the scenario run mode")
        ->check(CLI::IsMember({"inproc", "split"}));
    run->add_option("--det-port", det_port_flag,
                    "UDP detection port for split mode (0 = ephemeral; overrides "
                    "STADIA_DET_PORT)");

    std::string log_path;
    std::string json_path;
    auto* report = app.add_subcommand("report", "recompute metrics from a trajectory CSV");
    report->add_option("log", log_path, "trajectory CSV file")->required();
    report->add_option("--json", json_path, "also write the metrics to this file");

    std::string client_scenario;
    std::uint16_t client_port = stadia::kDefaultDetectionPort;
    auto* client = app.add_subcommand(
        "detect-client", "detection process for split mode (frames on stdin, UDP out)");
    client->add_option("--scenario", client_scenario, "scenario JSON file")->required();
    client->add_option("--port", client_port, "UDP detection port")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            return cmd_run(scenario_path, seed, out_dir, mode_flag, det_port_flag);
        }
        if (report->parsed()) {
            return cmd_report(log_path, json_path);
        }
        if (client->parsed()) {
            return cmd_detect_client(client_scenario, client_port);
        }
    } catch (const std::exception& e) {
        return fail(e.what());
    }
    return fail("no subcommand given");
}
