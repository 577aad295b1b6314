#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "epmon/core.hpp"

// Board <-> host framing. Every frame on the byte stream is
//
//   0xAA | type u8 | payload_len u16 LE | payload | crc16 u16 LE
//
// where the CRC is CRC-16/CCITT-FALSE (poly 0x1021, init 0xFFFF) over
// type || payload_len || payload — the sync byte is not covered. Payloads
// never exceed 1024 bytes. All multi-byte integers are little-endian;
// strings are u16 LE length followed by UTF-8 bytes.
//
// A SAMPLE payload is exactly 26 bytes:
//   probe_id u8, seq u32, board_time_us u64, voltage_mV i32,
//   current_mA i32, power_mW i32, avg_count u8
// so a full SAMPLE frame is always 32 bytes on the wire.
//
// TAG (0x02) frames flow downstream as GPIO edge reports. The simulated
// board additionally accepts a TAG frame upstream as a host-injected edge:
// its board_time_us is ignored and the edge is stamped at the board clock.
// PING is acknowledged with STATUS(0, "pong <board_time_us>") so the host
// can map the board clock onto its own.

namespace epmon::wire {

inline constexpr std::uint8_t kSyncByte = 0xAA;
inline constexpr std::size_t kMaxPayload = 1024;
inline constexpr std::size_t kFrameOverhead = 6;  // sync + type + len + crc
inline constexpr std::size_t kSamplePayloadSize = 26;

enum class FrameType : std::uint8_t {
    Sample = 0x01,
    Tag = 0x02,
    Topology = 0x03,
    Status = 0x04,
    Start = 0x10,
    Stop = 0x11,
    GetTopology = 0x12,
    SetRate = 0x13,
    Power = 0x14,
    Ping = 0x15,
};

struct SampleFrame {
    Sample sample;
    bool operator==(const SampleFrame&) const = default;
};
struct TagFrame {
    TagEvent tag;
    bool operator==(const TagFrame&) const = default;
};
struct TopologyFrame {
    Topology topology;
    bool operator==(const TopologyFrame&) const = default;
};
struct StatusFrame {
    std::uint8_t code = 0;  // 0 = ok
    std::string detail;
    bool operator==(const StatusFrame&) const = default;
};
struct StartFrame {
    bool operator==(const StartFrame&) const = default;
};
struct StopFrame {
    bool operator==(const StopFrame&) const = default;
};
struct GetTopologyFrame {
    bool operator==(const GetTopologyFrame&) const = default;
};
struct SetRateFrame {
    std::uint8_t divider = 1;  // emit every k-th averaged sample
    bool operator==(const SetRateFrame&) const = default;
};
struct PowerFrame {
    std::uint8_t channel = 0;
    std::uint8_t state = 0;  // 0 = off, 1 = on
    bool operator==(const PowerFrame&) const = default;
};
struct PingFrame {
    bool operator==(const PingFrame&) const = default;
};

using Frame = std::variant<SampleFrame, TagFrame, TopologyFrame, StatusFrame,
                           StartFrame, StopFrame, GetTopologyFrame,
                           SetRateFrame, PowerFrame, PingFrame>;

FrameType frame_type(const Frame& f);

// CRC-16/CCITT-FALSE; crc16("123456789") == 0x29B1.
std::uint16_t crc16(std::span<const std::uint8_t> data);

// Throws std::invalid_argument when the frame cannot be represented
// (payload over 1024 bytes, string field too long, bad POWER state).
std::vector<std::uint8_t> encode(const Frame& frame);

struct NeedMore {};
struct ResyncSkip {
    std::size_t skipped = 0;
};
using DecodeStep = std::variant<Frame, NeedMore, ResyncSkip>;

// One decoding step at `cursor`. On Frame/ResyncSkip the cursor advances
// past the consumed bytes; on NeedMore it is left where it was (pass
// eof=true once no further bytes will come, so a trailing partial frame is
// reported as skipped instead of waited for). Corruption is never fatal:
// bad sync, bad CRC, unknown type and malformed payloads all surface as
// ResyncSkip and scanning resumes at the next 0xAA.
DecodeStep decode_step(std::span<const std::uint8_t> buf, std::size_t& cursor,
                       bool eof = false);

// Incremental decoder for a connection: owns the reassembly buffer so
// frames may arrive split at arbitrary byte boundaries. Corruption is
// swallowed and accounted in the counters; next() yields intact frames.
class FrameDecoder {
public:
    void feed(std::span<const std::uint8_t> bytes);
    void finish();  // end of stream; flush any pending partial frame

    std::optional<Frame> next();

    std::uint64_t frames_decoded() const { return frames_decoded_; }
    std::uint64_t skipped_bytes() const { return skipped_bytes_; }
    // maximal runs of skipped bytes with no intact frame in between
    std::uint64_t corrupt_regions() const { return corrupt_regions_; }

private:
    std::vector<std::uint8_t> buf_;
    std::size_t cursor_ = 0;
    bool eof_ = false;
    bool in_skip_run_ = false;
    std::uint64_t frames_decoded_ = 0;
    std::uint64_t skipped_bytes_ = 0;
    std::uint64_t corrupt_regions_ = 0;
};

}  // namespace epmon::wire
