#include "epmon/wire.hpp"

#include <array>
#include <cstring>
#include <stdexcept>

namespace epmon::wire {

namespace {

const std::array<std::uint16_t, 256>& crc_table() {
    static const auto table = [] {
        std::array<std::uint16_t, 256> t{};
        for (int i = 0; i < 256; ++i) {
            std::uint16_t crc = static_cast<std::uint16_t>(i << 8);
            for (int b = 0; b < 8; ++b)
                crc = (crc & 0x8000) ? static_cast<std::uint16_t>((crc << 1) ^ 0x1021)
                                     : static_cast<std::uint16_t>(crc << 1);
            t[static_cast<std::size_t>(i)] = crc;
        }
        return t;
    }();
    return table;
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_i32(std::vector<std::uint8_t>& out, std::int32_t v) {
    put_u32(out, static_cast<std::uint32_t>(v));
}

void put_string(std::vector<std::uint8_t>& out, const std::string& s) {
    if (s.size() > 0xFFFF)
        throw std::invalid_argument("wire: string field too long");
    put_u16(out, static_cast<std::uint16_t>(s.size()));
    out.insert(out.end(), s.begin(), s.end());
}

// bounds-checked payload reader; any overrun marks the frame malformed
struct Reader {
    std::span<const std::uint8_t> data;
    std::size_t pos = 0;
    bool ok = true;

    bool have(std::size_t n) {
        if (pos + n > data.size()) ok = false;
        return ok;
    }
    std::uint8_t u8() {
        if (!have(1)) return 0;
        return data[pos++];
    }
    std::uint16_t u16() {
        if (!have(2)) return 0;
        std::uint16_t v = static_cast<std::uint16_t>(data[pos]) |
                          static_cast<std::uint16_t>(data[pos + 1]) << 8;
        pos += 2;
        return v;
    }
    std::uint32_t u32() {
        if (!have(4)) return 0;
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data[pos + i]) << (8 * i);
        pos += 4;
        return v;
    }
    std::uint64_t u64() {
        if (!have(8)) return 0;
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(data[pos + i]) << (8 * i);
        pos += 8;
        return v;
    }
    std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
    std::string str() {
        std::uint16_t n = u16();
        if (!have(n)) return {};
        std::string s(reinterpret_cast<const char*>(data.data() + pos), n);
        pos += n;
        return s;
    }
    bool done() const { return ok && pos == data.size(); }
};

std::vector<std::uint8_t> payload_of(const Frame& frame) {
    std::vector<std::uint8_t> p;
    std::visit(
        [&](const auto& f) {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, SampleFrame>) {
                const Sample& s = f.sample;
                p.push_back(s.probe_id);
                put_u32(p, s.seq);
                put_u64(p, s.board_time_us);
                put_i32(p, s.voltage_mV);
                put_i32(p, s.current_mA);
                put_i32(p, s.power_mW);
                p.push_back(s.avg_count);
            } else if constexpr (std::is_same_v<T, TagFrame>) {
                put_u64(p, f.tag.board_time_us);
                p.push_back(f.tag.gpio_state);
            } else if constexpr (std::is_same_v<T, TopologyFrame>) {
                const Topology& t = f.topology;
                if (t.probes.size() > 0xFF)
                    throw std::invalid_argument("wire: too many probes");
                put_string(p, t.board_serial);
                p.push_back(static_cast<std::uint8_t>(t.probes.size()));
                for (const auto& probe : t.probes) {
                    p.push_back(probe.probe_id);
                    p.push_back(probe.bus);
                    p.push_back(probe.position_on_bus);
                    p.push_back(static_cast<std::uint8_t>(probe.kind));
                    put_string(p, probe.label);
                }
            } else if constexpr (std::is_same_v<T, StatusFrame>) {
                p.push_back(f.code);
                put_string(p, f.detail);
            } else if constexpr (std::is_same_v<T, SetRateFrame>) {
                p.push_back(f.divider);
            } else if constexpr (std::is_same_v<T, PowerFrame>) {
                if (f.state > 1)
                    throw std::invalid_argument("wire: POWER state must be 0 or 1");
                p.push_back(f.channel);
                p.push_back(f.state);
            }
            // Start/Stop/GetTopology/Ping carry no payload
        },
        frame);
    return p;
}

std::optional<Frame> parse_payload(FrameType type, std::span<const std::uint8_t> payload) {
    Reader r{payload};
    switch (type) {
        case FrameType::Sample: {
            if (payload.size() != kSamplePayloadSize) return std::nullopt;
            SampleFrame f;
            f.sample.probe_id = r.u8();
            f.sample.seq = r.u32();
            f.sample.board_time_us = r.u64();
            f.sample.voltage_mV = r.i32();
            f.sample.current_mA = r.i32();
            f.sample.power_mW = r.i32();
            f.sample.avg_count = r.u8();
            if (!r.done()) return std::nullopt;
            return Frame{f};
        }
        case FrameType::Tag: {
            TagFrame f;
            f.tag.board_time_us = r.u64();
            f.tag.gpio_state = r.u8();
            if (!r.done()) return std::nullopt;
            return Frame{f};
        }
        case FrameType::Topology: {
            TopologyFrame f;
            f.topology.board_serial = r.str();
            std::uint8_t count = r.u8();
            for (int i = 0; i < count && r.ok; ++i) {
                ProbeDescriptor d;
                d.probe_id = r.u8();
                d.bus = r.u8();
                d.position_on_bus = r.u8();
                d.kind = static_cast<ProbeKind>(r.u8());
                d.label = r.str();
                if (static_cast<std::uint8_t>(d.kind) > static_cast<std::uint8_t>(ProbeKind::Psu12VHPWR))
                    return std::nullopt;
                f.topology.probes.push_back(std::move(d));
            }
            if (!r.done()) return std::nullopt;
            return Frame{f};
        }
        case FrameType::Status: {
            StatusFrame f;
            f.code = r.u8();
            f.detail = r.str();
            if (!r.done()) return std::nullopt;
            return Frame{f};
        }
        case FrameType::Start:
            return payload.empty() ? std::optional<Frame>{StartFrame{}} : std::nullopt;
        case FrameType::Stop:
            return payload.empty() ? std::optional<Frame>{StopFrame{}} : std::nullopt;
        case FrameType::GetTopology:
            return payload.empty() ? std::optional<Frame>{GetTopologyFrame{}} : std::nullopt;
        case FrameType::SetRate: {
            SetRateFrame f;
            f.divider = r.u8();
            if (!r.done()) return std::nullopt;
            return Frame{f};
        }
        case FrameType::Power: {
            PowerFrame f;
            f.channel = r.u8();
            f.state = r.u8();
            if (!r.done() || f.state > 1) return std::nullopt;
            return Frame{f};
        }
        case FrameType::Ping:
            return payload.empty() ? std::optional<Frame>{PingFrame{}} : std::nullopt;
    }
    return std::nullopt;  // unknown type
}

std::size_t find_sync(std::span<const std::uint8_t> buf, std::size_t from) {
    for (std::size_t i = from; i < buf.size(); ++i)
        if (buf[i] == kSyncByte) return i;
    return buf.size();
}

}  // namespace

FrameType frame_type(const Frame& f) {
    return std::visit(
        [](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, SampleFrame>) return FrameType::Sample;
            else if constexpr (std::is_same_v<T, TagFrame>) return FrameType::Tag;
            else if constexpr (std::is_same_v<T, TopologyFrame>) return FrameType::Topology;
            else if constexpr (std::is_same_v<T, StatusFrame>) return FrameType::Status;
            else if constexpr (std::is_same_v<T, StartFrame>) return FrameType::Start;
            else if constexpr (std::is_same_v<T, StopFrame>) return FrameType::Stop;
            else if constexpr (std::is_same_v<T, GetTopologyFrame>) return FrameType::GetTopology;
            else if constexpr (std::is_same_v<T, SetRateFrame>) return FrameType::SetRate;
            else if constexpr (std::is_same_v<T, PowerFrame>) return FrameType::Power;
            else return FrameType::Ping;
        },
        f);
}

std::uint16_t crc16(std::span<const std::uint8_t> data) {
    const auto& table = crc_table();
    std::uint16_t crc = 0xFFFF;
    for (std::uint8_t b : data)
        crc = static_cast<std::uint16_t>((crc << 8) ^ table[((crc >> 8) ^ b) & 0xFF]);
    return crc;
}

std::vector<std::uint8_t> encode(const Frame& frame) {
    std::vector<std::uint8_t> payload = payload_of(frame);
    if (payload.size() > kMaxPayload)
        throw std::invalid_argument("wire: payload exceeds 1024 bytes");

    std::vector<std::uint8_t> out;
    out.reserve(payload.size() + kFrameOverhead);
    out.push_back(kSyncByte);
    out.push_back(static_cast<std::uint8_t>(frame_type(frame)));
    put_u16(out, static_cast<std::uint16_t>(payload.size()));
    out.insert(out.end(), payload.begin(), payload.end());
    std::uint16_t crc = crc16({out.data() + 1, out.size() - 1});
    put_u16(out, crc);
    return out;
}

DecodeStep decode_step(std::span<const std::uint8_t> buf, std::size_t& cursor,
                       bool eof) {
    if (cursor >= buf.size()) return NeedMore{};

    if (buf[cursor] != kSyncByte) {
        std::size_t next = find_sync(buf, cursor);
        std::size_t skipped = next - cursor;
        cursor = next;
        return ResyncSkip{skipped};
    }

    auto resync_past_sync = [&]() -> DecodeStep {
        std::size_t next = find_sync(buf, cursor + 1);
        std::size_t skipped = next - cursor;
        cursor = next;
        return ResyncSkip{skipped};
    };

    std::size_t avail = buf.size() - cursor;
    if (avail < 4) return eof ? resync_past_sync() : DecodeStep{NeedMore{}};

    std::uint8_t type = buf[cursor + 1];
    std::size_t len = static_cast<std::size_t>(buf[cursor + 2]) |
                      static_cast<std::size_t>(buf[cursor + 3]) << 8;
    if (len > kMaxPayload) return resync_past_sync();

    std::size_t total = kFrameOverhead + len;
    if (avail < total) return eof ? resync_past_sync() : DecodeStep{NeedMore{}};

    std::uint16_t stated = static_cast<std::uint16_t>(buf[cursor + 4 + len]) |
                           static_cast<std::uint16_t>(buf[cursor + 5 + len]) << 8;
    std::uint16_t actual = crc16({buf.data() + cursor + 1, 3 + len});
    if (stated != actual) return resync_past_sync();

    auto frame = parse_payload(static_cast<FrameType>(type),
                               {buf.data() + cursor + 4, len});
    if (!frame) {
        // CRC-clean but unknown type or malformed structure: drop the whole
        // frame, it was delimited correctly
        cursor += total;
        return ResyncSkip{total};
    }
    cursor += total;
    return DecodeStep{std::move(*frame)};
}

void FrameDecoder::feed(std::span<const std::uint8_t> bytes) {
    buf_.insert(buf_.end(), bytes.begin(), bytes.end());
}

void FrameDecoder::finish() { eof_ = true; }

std::optional<Frame> FrameDecoder::next() {
    for (;;) {
        DecodeStep step = decode_step(buf_, cursor_, eof_);
        if (std::holds_alternative<NeedMore>(step)) {
            // reclaim consumed prefix once it dominates the buffer
            if (cursor_ > 4096 && cursor_ > buf_.size() / 2) {
                buf_.erase(buf_.begin(), buf_.begin() + static_cast<std::ptrdiff_t>(cursor_));
                cursor_ = 0;
            }
            return std::nullopt;
        }
        if (auto* skip = std::get_if<ResyncSkip>(&step)) {
            skipped_bytes_ += skip->skipped;
            if (!in_skip_run_) {
                ++corrupt_regions_;
                in_skip_run_ = true;
            }
            continue;
        }
        in_skip_run_ = false;
        ++frames_decoded_;
        return std::move(std::get<Frame>(step));
    }
}

}  // namespace epmon::wire
