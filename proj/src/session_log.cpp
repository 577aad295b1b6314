#include "epmon/session_log.hpp"

#include <cstring>
#include <stdexcept>

#include <json.hpp>

namespace epmon {

using nlohmann::json;

namespace {

void put_u16(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xFF));
    out.push_back(static_cast<char>(v >> 8));
}

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

}  // namespace

std::string metadata_to_json(const SessionMetadata& meta) {
    json j;
    j["board_serial"] = meta.board_serial;
    j["start_wall_ns"] = meta.start_wall_ns;
    j["clock_offset_ns"] = meta.clock_offset_ns;
    json probes = json::array();
    for (const auto& p : meta.topology.probes) {
        probes.push_back({{"id", p.probe_id},
                          {"bus", p.bus},
                          {"position", p.position_on_bus},
                          {"kind", probe_kind_name(p.kind)},
                          {"label", p.label}});
    }
    j["topology"] = std::move(probes);
    return j.dump();
}

SessionMetadata metadata_from_json(const std::string& json_text) {
    json j = json::parse(json_text);
    SessionMetadata meta;
    meta.board_serial = j.value("board_serial", std::string{});
    meta.start_wall_ns = j.value("start_wall_ns", std::int64_t{0});
    meta.clock_offset_ns = j.value("clock_offset_ns", std::int64_t{0});
    meta.topology.board_serial = meta.board_serial;
    for (const auto& jp : j.value("topology", json::array())) {
        ProbeDescriptor d;
        d.probe_id = jp.at("id").get<std::uint8_t>();
        d.bus = jp.at("bus").get<std::uint8_t>();
        d.position_on_bus = jp.at("position").get<std::uint8_t>();
        if (auto k = probe_kind_from_name(jp.at("kind").get<std::string>()))
            d.kind = *k;
        d.label = jp.value("label", std::string{});
        meta.topology.probes.push_back(std::move(d));
    }
    return meta;
}

SessionLogWriter::SessionLogWriter(const std::string& path, const std::string& metadata)
    : path_(path) {
    out_.open(path, std::ios::binary | std::ios::trunc);
    if (!out_) throw std::runtime_error("cannot open log for writing: " + path);

    std::string header;
    header.append(kLogMagic, 4);
    put_u16(header, kLogVersion);
    put_u32(header, static_cast<std::uint32_t>(metadata.size()));
    header += metadata;
    out_.write(header.data(), static_cast<std::streamsize>(header.size()));
    if (!out_) throw std::runtime_error("log header write failed: " + path);
}

SessionLogWriter::~SessionLogWriter() { close(); }

void SessionLogWriter::append(std::int64_t host_time_ns,
                              std::span<const std::uint8_t> frame_bytes) {
    if (!out_.is_open()) throw std::logic_error("log already closed");
    if (host_time_ns < last_time_ns_) host_time_ns = last_time_ns_;  // never decreasing
    last_time_ns_ = host_time_ns;

    std::string rec;
    rec.reserve(8 + frame_bytes.size());
    put_u64(rec, static_cast<std::uint64_t>(host_time_ns));
    rec.append(reinterpret_cast<const char*>(frame_bytes.data()), frame_bytes.size());
    out_.write(rec.data(), static_cast<std::streamsize>(rec.size()));
    if (!out_) throw std::runtime_error("log write failed: " + path_);
    ++records_;
}

void SessionLogWriter::flush() {
    if (out_.is_open()) out_.flush();
}

void SessionLogWriter::close() {
    if (out_.is_open()) {
        out_.flush();
        out_.close();
    }
}

SessionLogReader::SessionLogReader(const std::string& path) {
    in_.open(path, std::ios::binary);
    if (!in_) throw std::runtime_error("cannot open log: " + path);

    char magic[4];
    in_.read(magic, 4);
    if (!in_ || std::memcmp(magic, kLogMagic, 4) != 0)
        throw std::runtime_error("not a session log (bad magic): " + path);

    unsigned char hdr[6];
    in_.read(reinterpret_cast<char*>(hdr), 6);
    if (!in_) throw std::runtime_error("truncated log header: " + path);
    std::uint16_t version = static_cast<std::uint16_t>(hdr[0] | hdr[1] << 8);
    if (version != kLogVersion)
        throw std::runtime_error("unsupported log version " + std::to_string(version));
    std::uint32_t meta_len = 0;
    for (int i = 0; i < 4; ++i) meta_len |= static_cast<std::uint32_t>(hdr[2 + i]) << (8 * i);

    metadata_.resize(meta_len);
    in_.read(metadata_.data(), meta_len);
    if (!in_) throw std::runtime_error("truncated log metadata: " + path);
}

std::optional<LogRecord> SessionLogReader::next() {
    if (corrupt_tail_ || !in_.good()) return std::nullopt;

    unsigned char stamp[8];
    in_.read(reinterpret_cast<char*>(stamp), 8);
    if (in_.gcount() == 0) return std::nullopt;  // clean end
    if (in_.gcount() != 8) {
        corrupt_tail_ = true;
        return std::nullopt;
    }
    std::uint64_t t = 0;
    for (int i = 0; i < 8; ++i) t |= static_cast<std::uint64_t>(stamp[i]) << (8 * i);

    unsigned char fh[4];
    in_.read(reinterpret_cast<char*>(fh), 4);
    if (in_.gcount() != 4 || fh[0] != wire::kSyncByte) {
        corrupt_tail_ = true;
        return std::nullopt;
    }
    std::size_t len = static_cast<std::size_t>(fh[2]) | static_cast<std::size_t>(fh[3]) << 8;
    if (len > wire::kMaxPayload) {
        corrupt_tail_ = true;
        return std::nullopt;
    }

    LogRecord rec;
    rec.host_time_ns = static_cast<std::int64_t>(t);
    rec.raw.assign(fh, fh + 4);
    rec.raw.resize(4 + len + 2);
    in_.read(reinterpret_cast<char*>(rec.raw.data() + 4),
             static_cast<std::streamsize>(len + 2));
    if (in_.gcount() != static_cast<std::streamsize>(len + 2)) {
        corrupt_tail_ = true;
        return std::nullopt;
    }

    std::size_t cursor = 0;
    auto step = wire::decode_step(rec.raw, cursor, true);
    auto* frame = std::get_if<wire::Frame>(&step);
    if (!frame || cursor != rec.raw.size()) {
        corrupt_tail_ = true;
        return std::nullopt;
    }
    rec.frame = std::move(*frame);
    ++records_;
    return rec;
}

}  // namespace epmon
