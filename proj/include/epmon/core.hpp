#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace epmon {

// Bus/board limits. Capacity is 6000 samples/s per bus; a probe never
// reports faster than 1000 SPS because it averages a 4000 SPS converter
// four conversions at a time.
inline constexpr int kBusCapacitySps = 6000;
inline constexpr int kMaxProbeRateSps = 1000;
inline constexpr int kMaxProbesPerBus = 6;
inline constexpr int kMaxProbes = 12;
inline constexpr int kGpioLines = 8;
inline constexpr int kNominalAvgCount = 4;
inline constexpr int kConversionSpacingUs = 250;  // 4000 SPS converter

// Wire strings (labels, serial) are length-limited so a full 12-probe
// topology always fits the 1024-byte frame payload cap.
inline constexpr std::size_t kMaxLabelBytes = 64;

struct Sample {
    std::uint8_t probe_id = 0;      // 0..11
    std::uint32_t seq = 0;          // per probe, +1 per delivered sample
    std::uint64_t board_time_us = 0;
    std::int32_t voltage_mV = 0;
    std::int32_t current_mA = 0;    // signed; the simulator only produces >= 0
    std::int32_t power_mW = 0;      // integer mW: 1 mW resolution by construction
    std::uint8_t avg_count = 0;     // conversions averaged, nominally 4

    bool operator==(const Sample&) const = default;
};

enum class ProbeKind : std::uint8_t {
    UsbC = 0,        // USB-PD 3.1, configured loads capped at 240 W
    Coax21x55 = 1,
    Coax25x55 = 2,
    PsuRail33 = 3,   // 3.3 V rail
    PsuRail5 = 4,    // 5 V rail
    PsuRail12 = 5,   // 12 V rail
    Psu12VHPWR = 6,  // 600 W GPU connector
};

// Hard power ceiling for the connector, if the standard defines one.
// Exceeding it is a configuration error, never a clamp.
std::optional<std::int64_t> power_ceiling_mW(ProbeKind kind);

// Rail voltage fixed by the connector type, where there is one.
std::optional<std::int32_t> rail_voltage_mV(ProbeKind kind);

const char* probe_kind_name(ProbeKind kind);
std::optional<ProbeKind> probe_kind_from_name(std::string_view name);

struct ProbeDescriptor {
    std::uint8_t probe_id = 0;        // 0..11
    std::uint8_t bus = 0;             // 0 or 1
    std::uint8_t position_on_bus = 0; // 0..5
    ProbeKind kind = ProbeKind::UsbC;
    std::string label;

    bool operator==(const ProbeDescriptor&) const = default;
};

struct Topology {
    std::vector<ProbeDescriptor> probes;
    std::string board_serial;

    bool operator==(const Topology&) const = default;

    int probes_on_bus(int bus) const;
    const ProbeDescriptor* find(std::uint8_t probe_id) const;
};

// 8-bit GPIO snapshot taken at an edge. Consecutive events always differ.
struct TagEvent {
    std::uint64_t board_time_us = 0;
    std::uint8_t gpio_state = 0;

    bool operator==(const TagEvent&) const = default;
};

// Sample/tag with the board timestamp mapped onto the host clock.
struct TimedSample {
    std::int64_t time_ns = 0;
    Sample sample;

    bool operator==(const TimedSample&) const = default;
};

struct TimedTag {
    std::int64_t time_ns = 0;
    std::uint8_t gpio_state = 0;

    bool operator==(const TimedTag&) const = default;
};

// One raw converter reading, pre-averaging.
struct RawConversion {
    std::int32_t voltage_mV = 0;
    std::int32_t current_mA = 0;
    std::int32_t power_mW = 0;
};

// Round num/den to nearest, ties to even. den > 0, num any sign. Exact
// integer arithmetic, no floating point.
std::int64_t div_round_half_even(std::int64_t num, std::int64_t den);

// Watts -> integer milliwatts, round to nearest with ties to even.
// Throws std::invalid_argument on non-finite input.
std::int64_t quantize_mW(double watts);

// Arithmetic mean per field over the raw conversions, each mean rounded
// half-to-even. Throws std::invalid_argument on empty input.
struct AveragedFields {
    std::int32_t voltage_mV = 0;
    std::int32_t current_mA = 0;
    std::int32_t power_mW = 0;
    std::uint8_t avg_count = 0;
};
AveragedFields average4(std::span<const RawConversion> raw);

// Delivered rate for one probe when n probes share its bus:
// min(1000, floor(6000 / n)). Throws std::invalid_argument unless 1 <= n <= 6.
int per_probe_rate(int n_probes_on_bus);

// Every violated topology invariant, one message each. Empty means ok.
std::vector<std::string> validate_topology(const Topology& topo);

// |power - V*I/1000| <= slack, the cross-field consistency the averaging
// chain preserves. Integer-mA current granularity is V/1000 mW per LSB, so
// the nominal slack (avg_count mW) is only guaranteed for rails up to a few
// volts or for loads that sit on exact current steps; callers checking
// higher-voltage noisy streams must widen the slack accordingly.
bool power_fields_consistent(const Sample& s, std::int64_t slack_mW);

}  // namespace epmon
