#include "epmon/core.hpp"

#include <cmath>
#include <stdexcept>

namespace epmon {

std::optional<std::int64_t> power_ceiling_mW(ProbeKind kind) {
    switch (kind) {
        case ProbeKind::UsbC:
            return 240'000;  // USB-PD 3.1 EPR
        case ProbeKind::Psu12VHPWR:
            return 600'000;
        default:
            return std::nullopt;
    }
}

std::optional<std::int32_t> rail_voltage_mV(ProbeKind kind) {
    switch (kind) {
        case ProbeKind::PsuRail33:
            return 3300;
        case ProbeKind::PsuRail5:
            return 5000;
        case ProbeKind::PsuRail12:
        case ProbeKind::Psu12VHPWR:
            return 12000;
        default:
            return std::nullopt;
    }
}

const char* probe_kind_name(ProbeKind kind) {
    switch (kind) {
        case ProbeKind::UsbC: return "usb_c";
        case ProbeKind::Coax21x55: return "coax_2.1x5.5";
        case ProbeKind::Coax25x55: return "coax_2.5x5.5";
        case ProbeKind::PsuRail33: return "psu_3v3";
        case ProbeKind::PsuRail5: return "psu_5v";
        case ProbeKind::PsuRail12: return "psu_12v";
        case ProbeKind::Psu12VHPWR: return "psu_12vhpwr";
    }
    return "unknown";
}

std::optional<ProbeKind> probe_kind_from_name(std::string_view name) {
    for (int k = 0; k <= static_cast<int>(ProbeKind::Psu12VHPWR); ++k) {
        auto kind = static_cast<ProbeKind>(k);
        if (name == probe_kind_name(kind)) return kind;
    }
    return std::nullopt;
}

int Topology::probes_on_bus(int bus) const {
    int n = 0;
    for (const auto& p : probes)
        if (p.bus == bus) ++n;
    return n;
}

const ProbeDescriptor* Topology::find(std::uint8_t probe_id) const {
    for (const auto& p : probes)
        if (p.probe_id == probe_id) return &p;
    return nullptr;
}

std::int64_t div_round_half_even(std::int64_t num, std::int64_t den) {
    // floor division, then round the remainder
    std::int64_t q = num / den;
    std::int64_t r = num % den;
    if (r < 0) {
        q -= 1;
        r += den;
    }
    std::int64_t twice = 2 * r;
    if (twice > den) return q + 1;
    if (twice < den) return q;
    return (q % 2 == 0) ? q : q + 1;  // exact tie
}

std::int64_t quantize_mW(double watts) {
    if (!std::isfinite(watts))
        throw std::invalid_argument("quantize_mW: non-finite input");
    // nearbyint rounds to nearest with ties to even under the default
    // FE_TONEAREST mode, which this library assumes throughout.
    return static_cast<std::int64_t>(std::nearbyint(watts * 1000.0));
}

AveragedFields average4(std::span<const RawConversion> raw) {
    if (raw.empty())
        throw std::invalid_argument("average4: empty input");
    std::int64_t sum_v = 0, sum_i = 0, sum_p = 0;
    for (const auto& c : raw) {
        sum_v += c.voltage_mV;
        sum_i += c.current_mA;
        sum_p += c.power_mW;
    }
    auto n = static_cast<std::int64_t>(raw.size());
    AveragedFields out;
    out.voltage_mV = static_cast<std::int32_t>(div_round_half_even(sum_v, n));
    out.current_mA = static_cast<std::int32_t>(div_round_half_even(sum_i, n));
    out.power_mW = static_cast<std::int32_t>(div_round_half_even(sum_p, n));
    out.avg_count = static_cast<std::uint8_t>(raw.size());
    return out;
}

int per_probe_rate(int n_probes_on_bus) {
    if (n_probes_on_bus < 1 || n_probes_on_bus > kMaxProbesPerBus)
        throw std::invalid_argument("per_probe_rate: probe count must be 1..6");
    int bus_share = kBusCapacitySps / n_probes_on_bus;
    return bus_share < kMaxProbeRateSps ? bus_share : kMaxProbeRateSps;
}

std::vector<std::string> validate_topology(const Topology& topo) {
    std::vector<std::string> violations;
    auto add = [&](std::string msg) { violations.push_back(std::move(msg)); };

    if (topo.probes.size() > static_cast<std::size_t>(kMaxProbes))
        add("more than 12 probes attached");
    if (topo.board_serial.size() > kMaxLabelBytes)
        add("board serial longer than 64 bytes");

    int per_bus[2] = {0, 0};
    for (const auto& p : topo.probes) {
        if (p.probe_id >= kMaxProbes)
            add("probe id " + std::to_string(p.probe_id) + " out of range 0..11");
        if (p.bus > 1) {
            add("probe " + std::to_string(p.probe_id) + " on invalid bus " +
                std::to_string(p.bus));
            continue;
        }
        ++per_bus[p.bus];
        if (p.position_on_bus >= kMaxProbesPerBus)
            add("probe " + std::to_string(p.probe_id) + " position " +
                std::to_string(p.position_on_bus) + " out of range 0..5");
        if (p.label.size() > kMaxLabelBytes)
            add("probe " + std::to_string(p.probe_id) + " label longer than 64 bytes");
    }
    for (int bus = 0; bus < 2; ++bus) {
        if (per_bus[bus] > kMaxProbesPerBus)
            add("bus " + std::to_string(bus) + " exceeds " +
                std::to_string(kMaxProbesPerBus) + " probes");
    }

    for (std::size_t a = 0; a < topo.probes.size(); ++a) {
        for (std::size_t b = a + 1; b < topo.probes.size(); ++b) {
            const auto& pa = topo.probes[a];
            const auto& pb = topo.probes[b];
            if (pa.probe_id == pb.probe_id)
                add("duplicate probe id " + std::to_string(pa.probe_id));
            if (pa.bus == pb.bus && pa.position_on_bus == pb.position_on_bus)
                add("duplicate position " + std::to_string(pa.position_on_bus) +
                    " on bus " + std::to_string(pa.bus));
        }
    }
    return violations;
}

bool power_fields_consistent(const Sample& s, std::int64_t slack_mW) {
    std::int64_t product_mW = div_round_half_even(
        static_cast<std::int64_t>(s.voltage_mV) * s.current_mA, 1000);
    std::int64_t diff = s.power_mW - product_mW;
    if (diff < 0) diff = -diff;
    return diff <= slack_mW;
}

}  // namespace epmon
