#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "epmon/rng.hpp"
#include "epmon/scenario.hpp"
#include "epmon/wire.hpp"

namespace epmon::sim {

// STATUS codes the simulated board answers commands with.
namespace board_status {
inline constexpr std::uint8_t ok = 0;
inline constexpr std::uint8_t bad_frame = 1;
inline constexpr std::uint8_t bad_argument = 2;
inline constexpr std::uint8_t unknown_channel = 3;
inline constexpr std::uint8_t no_edge = 4;
}  // namespace board_status

struct RunReport {
    std::array<std::uint64_t, kMaxProbes> samples_emitted{};
    std::uint64_t tags_emitted = 0;
    std::uint64_t commands_ok = 0;
    std::uint64_t commands_rejected = 0;
    std::uint64_t control_corrupt_regions = 0;
    bool completed = false;  // ran the full scenario duration
};

// Board + probe chain simulator. Single logical timeline: each probe
// reports at per_probe_rate(bus occupancy), every report averaging four
// conversions spaced 250 us apart. The control channel is consumed at
// sample boundaries; every command is answered (STATUS, or TOPOLOGY for
// GET_TOPOLOGY). Identical scenario and seed give a byte-identical output
// stream at acceleration 0.
class Simulator {
public:
    // throws std::invalid_argument when validate_scenario(s) reports anything
    explicit Simulator(SimScenario scenario);

    using Sink = std::function<void(std::span<const std::uint8_t>)>;
    // Non-blocking control poll: nullopt once the control side is closed,
    // empty vector when nothing is pending.
    using Poll = std::function<std::optional<std::vector<std::uint8_t>>()>;

    // Waits for START, emits the scheduled stream, answers commands, and
    // returns after the scenario duration elapses (STATUS "done" is the
    // last frame) or the control side disappears while idle.
    RunReport run(const Sink& sink, const Poll& poll);

    const SimScenario& scenario() const { return scenario_; }

private:
    struct ProbeRuntime {
        const ProbeScenario* cfg = nullptr;
        std::uint64_t period_us = 0;
        std::uint64_t next_report_us = 0;
        std::uint64_t report_index = 0;
        std::uint32_t next_seq = 0;
        bool powered = true;
        Rng rng{0};
    };

    enum class State { Idle, Running, Done };

    std::uint64_t board_now_us() const;
    wire::Frame make_sample(ProbeRuntime& probe, std::uint64_t t_us);
    void emit(const Sink& sink, const wire::Frame& frame);
    void handle_command(const Sink& sink, const wire::Frame& frame,
                        RunReport& report);

    SimScenario scenario_;
    std::vector<ProbeRuntime> probes_;
    std::uint64_t duration_us_ = 0;
    std::uint64_t virtual_now_us_ = 0;
    std::size_t next_tag_ = 0;
    std::uint8_t gpio_state_ = 0;
    std::uint8_t rate_divider_ = 1;
    State state_ = State::Idle;
};

}  // namespace epmon::sim
