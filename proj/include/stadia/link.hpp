#pragma once

#include <atomic>
#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>

// Detection wire link: the detection process (UDP client) streams target
// estimates to the guidance process (UDP server).
//
// Payload is a single UTF-8 line, no trailing newline:
//
//   DET,<seq>,<t_ms>,<class_id>,<prob>,<x>,<y>,<z>
//
// with the four real fields printed to exactly 6 decimal places; x/y/z are
// the camera-frame metric estimate (right, up, forward) in metres. The
// server keeps only the newest datagram (stale estimates are useless for
// manoeuvring) and drops anything with a non-increasing sequence number.

namespace stadia {

inline constexpr std::uint16_t kDefaultDetectionPort = 4560;
inline constexpr const char* kDetectionPortEnvVar = "STADIA_DET_PORT";

struct DetectionDatagram {
    std::uint64_t seq = 0;
    std::uint64_t t_ms = 0;
    std::uint32_t class_id = 0;  // 0 = UAV
    double prob = 0.0;           // in [0, 1]
    double x_m = 0.0;            // right
    double y_m = 0.0;            // up
    double z_m = 0.0;            // forward (depth)
};

std::string encode_detection(const DetectionDatagram& d);

// Strict parse of the wire format; empty on any malformed input (wrong tag,
// wrong field count, non-numeric or non-finite fields, prob outside [0, 1]).
std::optional<DetectionDatagram> decode_detection(std::string_view payload);

// Port resolution: explicit flag value wins, then the environment variable,
// then the default.
std::uint16_t resolve_detection_port(std::optional<std::uint16_t> flag_value);

// Latest-value handoff between the intake thread and the guidance loop.
// offer() replaces the stored value only for strictly increasing sequence
// numbers; take() consumes it.
class DetectionMailbox {
public:
    bool offer(const DetectionDatagram& d);
    std::optional<DetectionDatagram> take();
    std::optional<DetectionDatagram> peek() const;

private:
    mutable std::mutex mutex_;
    std::optional<DetectionDatagram> latest_;
    std::optional<std::uint64_t> last_seq_;
};

// Datagram intake running on its own thread. Malformed datagrams are counted
// and dropped, never fatal. Construction throws std::runtime_error when the
// port cannot be bound; port 0 binds an ephemeral port (see port()).
class UdpDetectionServer {
public:
    UdpDetectionServer(std::uint16_t port, DetectionMailbox& mailbox);
    ~UdpDetectionServer();

    UdpDetectionServer(const UdpDetectionServer&) = delete;
    UdpDetectionServer& operator=(const UdpDetectionServer&) = delete;

    std::uint16_t port() const { return port_; }
    std::uint64_t accepted_count() const { return accepted_.load(); }
    std::uint64_t malformed_count() const { return malformed_.load(); }
    std::uint64_t stale_count() const { return stale_.load(); }

    void stop();

private:
    void run();

    int fd_ = -1;
    std::uint16_t port_ = 0;
    DetectionMailbox& mailbox_;
    std::atomic<bool> stopping_{false};
    std::atomic<std::uint64_t> accepted_{0};
    std::atomic<std::uint64_t> malformed_{0};
    std::atomic<std::uint64_t> stale_{0};
    std::thread thread_;
};

// Fire-and-forget datagram sender (the detection-process side).
class UdpDetectionSender {
public:
    UdpDetectionSender(const std::string& host, std::uint16_t port);
    ~UdpDetectionSender();

    UdpDetectionSender(const UdpDetectionSender&) = delete;
    UdpDetectionSender& operator=(const UdpDetectionSender&) = delete;

    void send(const DetectionDatagram& d);
    void send_raw(std::string_view payload);

private:
    int fd_ = -1;
};

}  // namespace stadia
