#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "epmon/core.hpp"
#include "epmon/wire.hpp"

// Append-only on-disk session record:
//
//   header:  magic "EPLG" | version u16 LE (= 1) | metadata_len u32 LE |
//            metadata UTF-8 (JSON: board serial, start wall clock,
//            board->host clock offset, topology)
//   records: host_time_ns u64 LE | verbatim wire frame bytes
//
// Host timestamps never decrease and every embedded frame carries a valid
// CRC; a reader stops at the first torn record (crash truncation) and
// reports the abandoned byte count.

namespace epmon {

inline constexpr char kLogMagic[4] = {'E', 'P', 'L', 'G'};
inline constexpr std::uint16_t kLogVersion = 1;

struct SessionMetadata {
    std::string board_serial;
    std::int64_t start_wall_ns = 0;
    std::int64_t clock_offset_ns = 0;  // board_time_us * 1000 + offset = host ns
    Topology topology;
};

std::string metadata_to_json(const SessionMetadata& meta);
SessionMetadata metadata_from_json(const std::string& json_text);

class SessionLogWriter {
public:
    SessionLogWriter(const std::string& path, const std::string& metadata);
    ~SessionLogWriter();

    void append(std::int64_t host_time_ns, std::span<const std::uint8_t> frame_bytes);
    void flush();
    void close();

    std::uint64_t records_written() const { return records_; }

private:
    std::ofstream out_;
    std::string path_;
    std::int64_t last_time_ns_ = 0;
    std::uint64_t records_ = 0;
};

struct LogRecord {
    std::int64_t host_time_ns = 0;
    wire::Frame frame;
    std::vector<std::uint8_t> raw;  // frame bytes exactly as stored
};

class SessionLogReader {
public:
    explicit SessionLogReader(const std::string& path);  // throws on bad header

    const std::string& metadata_json() const { return metadata_; }
    SessionMetadata metadata() const { return metadata_from_json(metadata_); }

    std::optional<LogRecord> next();

    bool corrupt_tail() const { return corrupt_tail_; }
    std::uint64_t records_read() const { return records_; }

private:
    std::ifstream in_;
    std::string metadata_;
    bool corrupt_tail_ = false;
    std::uint64_t records_ = 0;
};

}  // namespace epmon
