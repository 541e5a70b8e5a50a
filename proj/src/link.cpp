#include "stadia/link.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <stdexcept>
#include <vector>

namespace stadia {

namespace {

std::vector<std::string_view> split_fields(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = s.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(s.substr(start));
            break;
        }
        out.push_back(s.substr(start, comma - start));
        start = comma + 1;
    }
    return out;
}

template <typename T>
bool parse_unsigned(std::string_view field, T& out) {
    if (field.empty()) {
        return false;
    }
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
    return ec == std::errc{} && ptr == field.data() + field.size();
}

bool parse_real(std::string_view field, double& out) {
    if (field.empty()) {
        return false;
    }
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
    return ec == std::errc{} && ptr == field.data() + field.size() && std::isfinite(out);
}

}  // namespace

std::string encode_detection(const DetectionDatagram& d) {
    char buf[256];
    const int n = std::snprintf(buf, sizeof(buf), "DET,%llu,%llu,%u,%.6f,%.6f,%.6f,%.6f",
                                static_cast<unsigned long long>(d.seq),
                                static_cast<unsigned long long>(d.t_ms), d.class_id,
                                d.prob, d.x_m, d.y_m, d.z_m);
    return std::string(buf, static_cast<std::size_t>(n));
}

std::optional<DetectionDatagram> decode_detection(std::string_view payload) {
    const auto fields = split_fields(payload);
    if (fields.size() != 8 || fields[0] != "DET") {
        return std::nullopt;
    }
    DetectionDatagram d;
    if (!parse_unsigned(fields[1], d.seq) || !parse_unsigned(fields[2], d.t_ms) ||
        !parse_unsigned(fields[3], d.class_id)) {
        return std::nullopt;
    }
    if (!parse_real(fields[4], d.prob) || !parse_real(fields[5], d.x_m) ||
        !parse_real(fields[6], d.y_m) || !parse_real(fields[7], d.z_m)) {
        return std::nullopt;
    }
    if (d.prob < 0.0 || d.prob > 1.0) {
        return std::nullopt;
    }
    return d;
}

std::uint16_t resolve_detection_port(std::optional<std::uint16_t> flag_value) {
    if (flag_value) {
        return *flag_value;
    }
    if (const char* env = std::getenv(kDetectionPortEnvVar)) {
        unsigned long parsed = 0;
        const char* end = env + std::strlen(env);
        const auto [ptr, ec] = std::from_chars(env, end, parsed);
        if (ec == std::errc{} && ptr == end && parsed <= 65535) {
            return static_cast<std::uint16_t>(parsed);
        }
    }
    return kDefaultDetectionPort;
}

bool DetectionMailbox::offer(const DetectionDatagram& d) {
    std::lock_guard lock(mutex_);
    if (last_seq_ && d.seq <= *last_seq_) {
        return false;
    }
    last_seq_ = d.seq;
    latest_ = d;
    return true;
}

std::optional<DetectionDatagram> DetectionMailbox::take() {
    std::lock_guard lock(mutex_);
    auto out = latest_;
    latest_.reset();
    return out;
}

std::optional<DetectionDatagram> DetectionMailbox::peek() const {
    std::lock_guard lock(mutex_);
    return latest_;
}

UdpDetectionServer::UdpDetectionServer(std::uint16_t port, DetectionMailbox& mailbox)
    : mailbox_(mailbox) {
    fd_ = ::socket(AF_INET, SOCK_DGRAM, 0);
    if (fd_ < 0) {
        throw std::runtime_error("failed to create UDP socket");
    }

    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = htons(port);
    if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
        ::close(fd_);
        fd_ = -1;
        throw std::runtime_error("failed to bind detection port " + std::to_string(port));
    }

    socklen_t len = sizeof(addr);
    ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);

    timeval timeout{};
    timeout.tv_usec = 50 * 1000;  // wake periodically to observe stop()
    ::setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &timeout, sizeof(timeout));

    thread_ = std::thread(&UdpDetectionServer::run, this);
}

UdpDetectionServer::~UdpDetectionServer() { stop(); }

void UdpDetectionServer::stop() {
    stopping_.store(true);
    if (thread_.joinable()) {
        thread_.join();
    }
    if (fd_ >= 0) {
        ::close(fd_);
        fd_ = -1;
    }
}

void UdpDetectionServer::run() {
    std::array<char, 2048> buf;
    while (!stopping_.load()) {
        const ssize_t n = ::recvfrom(fd_, buf.data(), buf.size(), 0, nullptr, nullptr);
        if (n < 0) {
            continue;  // timeout or transient error; loop checks the stop flag
        }
        const auto decoded =
            decode_detection(std::string_view(buf.data(), static_cast<std::size_t>(n)));
        if (!decoded) {
            malformed_.fetch_add(1);
            continue;
        }
        if (mailbox_.offer(*decoded)) {
            accepted_.fetch_add(1);
        } else {
            stale_.fetch_add(1);
        }
    }
}

UdpDetectionSender::UdpDetectionSender(const std::string& host, std::uint16_t port) {
    fd_ = ::socket(AF_INET, SOCK_DGRAM, 0);
    if (fd_ < 0) {
        throw std::runtime_error("failed to create UDP socket");
    }
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
        ::close(fd_);
        fd_ = -1;
        throw std::runtime_error("invalid detection host " + host);
    }
    if (::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
        ::close(fd_);
        fd_ = -1;
        throw std::runtime_error("failed to connect UDP socket");
    }
}

UdpDetectionSender::~UdpDetectionSender() {
    if (fd_ >= 0) {
        ::close(fd_);
    }
}

void UdpDetectionSender::send(const DetectionDatagram& d) { send_raw(encode_detection(d)); }

void UdpDetectionSender::send_raw(std::string_view payload) {
    (void)::send(fd_, payload.data(), payload.size(), 0);
}

}  // namespace stadia
