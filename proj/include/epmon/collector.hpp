#pragma once

#include <array>
#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "epmon/clock.hpp"
#include "epmon/core.hpp"
#include "epmon/net.hpp"
#include "epmon/session_log.hpp"
#include "epmon/wire.hpp"

// Host-side daemon for one board connection: decodes the wire stream,
// maps board time onto the host clock, persists every frame to a session
// log, and serves a line-delimited request/response API.
//
// API requests (one per line):
//   HELLO
//   TOPOLOGY
//   QUERY probe=<id> from=<ns> to=<ns>
//   SUBSCRIBE probes=<id,id,...|all>
//   TAG state=<hex>
//   POWER channel=<id> state=<on|off> token=<str>
//   METRICS
// Responses are zero or more record lines followed by "OK" or
// "ERR <code> <msg>". Record lines:
//   S <host_time_ns> <probe_id> <seq> <voltage_mV> <current_mA> <power_mW> <avg_count>
//   T <host_time_ns> <gpio_state_hex>
//   P <probe_id> <bus> <position> <kind> <label>
//   M <name> <value>
// SUBSCRIBE answers "OK" immediately and then streams S/T lines; a
// consumer that falls more than the queue bound behind is cut off with
// "ERR 409 subscriber overflow". POWER requires the admin token
// (EPMON_ADMIN_TOKEN for the CLI); sample and tag access needs none.

namespace epmon {

struct CollectorConfig {
    std::string log_path;      // empty = keep everything in memory only
    std::string admin_token;   // empty = power control disabled
    Clock* clock = nullptr;    // defaults to the system wall clock
    std::size_t subscriber_queue_cap = 10000;
};

struct CollectorMetrics {
    std::uint64_t frames_total = 0;
    std::uint64_t samples_total = 0;
    std::uint64_t tags_total = 0;
    std::array<std::uint64_t, kMaxProbes> samples_per_probe{};
    std::uint64_t seq_drops = 0;
    std::uint64_t corrupt_regions = 0;
    std::uint64_t corrupt_bytes = 0;
    std::uint64_t subscriber_overflows = 0;
    std::uint64_t power_refusals = 0;
    std::uint64_t records_logged = 0;
};

class Collector {
public:
    explicit Collector(CollectorConfig cfg);
    ~Collector();

    // Blocking handshake: clock sync via PING round-trip midpoint, topology
    // fetch, log header, then START. Throws on protocol failure.
    void start_session(int board_fd);

    // Serve the client API; listen_addr may use port 0. Returns the bound
    // address.
    std::string serve_api(const std::string& listen_addr);

    // Pump the board stream until it closes, then finalize the log.
    void ingest_until_eof();

    void shutdown();

    const Topology& topology() const { return topology_; }
    std::int64_t clock_offset_ns() const { return clock_offset_ns_; }
    bool session_active() const { return session_active_.load(); }
    CollectorMetrics metrics() const;

    // Samples with mapped host time in [t0, t1), in time order.
    std::vector<TimedSample> query(int probe, std::int64_t t0_ns,
                                   std::int64_t t1_ns) const;
    std::vector<TimedTag> tags() const;

private:
    struct Subscriber {
        std::mutex mu;
        std::condition_variable cv;
        std::deque<std::string> lines;
        std::uint16_t probe_mask = 0xFFFF;
        bool overflow = false;
        bool closed = false;
    };

    struct PendingAck {
        std::mutex mu;
        std::condition_variable cv;
        std::optional<wire::StatusFrame> ack;
        bool waiting = false;
    };

    void board_send(const wire::Frame& frame);
    wire::StatusFrame board_command(const wire::Frame& frame);
    void dispatch_frame(const wire::Frame& frame, std::int64_t stamp_ns);
    std::int64_t stamp_now();
    void publish(const std::string& line, int probe_or_neg1);
    void accept_loop(int listen_fd);
    void client_session(net::Fd fd);
    void handle_request(int fd, const std::string& line);

    CollectorConfig cfg_;
    SystemClock default_clock_;
    Clock* clock_;

    int board_fd_ = -1;
    std::mutex board_write_mu_;
    std::mutex command_mu_;  // one in-flight board command
    PendingAck pending_ack_;

    Topology topology_;
    std::int64_t clock_offset_ns_ = 0;
    std::atomic<bool> session_active_{false};
    std::atomic<bool> shutting_down_{false};

    std::unique_ptr<SessionLogWriter> log_;
    std::mutex log_mu_;

    mutable std::mutex store_mu_;
    std::array<std::vector<TimedSample>, kMaxProbes> samples_;
    std::vector<TimedTag> tags_;
    std::array<std::optional<std::uint32_t>, kMaxProbes> last_seq_;
    std::uint8_t gpio_state_ = 0;
    std::int64_t last_stamp_ns_ = 0;

    mutable std::mutex metrics_mu_;
    CollectorMetrics metrics_;

    net::Fd api_listen_;
    std::thread accept_thread_;
    std::mutex clients_mu_;
    std::vector<std::shared_ptr<Subscriber>> subscribers_;
    std::vector<int> client_fds_;
    std::vector<std::thread> client_threads_;
};

}  // namespace epmon
