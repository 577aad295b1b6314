#include "epmon/scenario.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace epmon::sim {

using nlohmann::json;

Topology SimScenario::topology() const {
    Topology t;
    t.board_serial = board_serial;
    for (const auto& p : probes) t.probes.push_back(p.descriptor);
    return t;
}

std::vector<std::string> validate_scenario(const SimScenario& s) {
    std::vector<std::string> errs = validate_topology(s.topology());

    if (!(s.duration_s > 0.0)) errs.emplace_back("duration_s must be > 0");
    if (!(s.time_acceleration >= 0.0)) errs.emplace_back("acceleration must be >= 0");

    for (const auto& p : s.probes) {
        std::string who = "probe " + std::to_string(p.descriptor.probe_id) +
                          (p.descriptor.label.empty() ? "" : " (" + p.descriptor.label + ")");
        if (p.nominal_voltage_mV <= 0)
            errs.push_back(who + ": nominal voltage must be > 0 mV");
        if (!(p.noise_sigma_mW >= 0.0))
            errs.push_back(who + ": noise sigma must be >= 0");
        for (const auto& e : validate_profile(p.profile))
            errs.push_back(who + ": " + e);
        if (auto ceiling = power_ceiling_mW(p.descriptor.kind)) {
            double max_mW = max_power_W(p.profile) * 1000.0;
            if (max_mW > static_cast<double>(*ceiling))
                errs.push_back(who + ": configured load " +
                               std::to_string(max_power_W(p.profile)) + " W exceeds " +
                               probe_kind_name(p.descriptor.kind) + " ceiling of " +
                               std::to_string(*ceiling / 1000) + " W");
        }
    }

    std::uint8_t gpio = 0;
    double prev_t = -1.0;
    for (const auto& tag : s.tags) {
        if (!(tag.t_s > prev_t)) {
            errs.emplace_back("tag schedule times must be strictly increasing");
            break;
        }
        if (tag.t_s > s.duration_s)
            errs.emplace_back("tag at " + std::to_string(tag.t_s) + " s is past the end");
        if (tag.gpio_state == gpio) {
            errs.emplace_back("tag at " + std::to_string(tag.t_s) +
                              " s repeats state (edges only)");
        }
        gpio = tag.gpio_state;
        prev_t = tag.t_s;
    }
    return errs;
}

namespace {

LoadProfile parse_profile(const json& j) {
    std::string type = j.at("type").get<std::string>();
    if (type == "constant") {
        return ConstantLoad{j.at("power_W").get<double>()};
    }
    if (type == "square") {
        return SquareLoad{j.at("period_s").get<double>(), j.at("duty").get<double>(),
                          j.at("low_W").get<double>(), j.at("high_W").get<double>()};
    }
    if (type == "sine") {
        return SineLoad{j.at("mean_W").get<double>(), j.at("amplitude_W").get<double>(),
                        j.at("period_s").get<double>()};
    }
    if (type == "trace") {
        TraceLoad t;
        for (const auto& pt : j.at("points"))
            t.points.emplace_back(pt.at(0).get<double>(), pt.at(1).get<double>());
        return t;
    }
    if (type == "node_lifecycle") {
        NodeLifecycleLoad lc;
        lc.suspend_W = j.at("suspend_W").get<double>();
        lc.idle_W = j.at("idle_W").get<double>();
        lc.load_W = j.at("load_W").get<double>();
        lc.boot_s = j.at("boot_s").get<double>();
        lc.idle_timeout_s = j.at("idle_timeout_s").get<double>();
        for (const auto& iv : j.value("jobs", json::array()))
            lc.jobs.push_back({iv.at(0).get<double>(), iv.at(1).get<double>()});
        return lc;
    }
    throw std::runtime_error("unknown profile type '" + type + "'");
}

}  // namespace

SimScenario parse_scenario(const std::string& json_text) {
    json j = json::parse(json_text);
    SimScenario s;
    s.board_serial = j.value("board_serial", std::string{"EPSIM"});
    s.duration_s = j.at("duration_s").get<double>();
    s.time_acceleration = j.value("acceleration", 0.0);
    s.seed = j.value("seed", std::uint64_t{0});
    s.clock_drift_ppm = j.value("clock_drift_ppm", 0.0);

    for (const auto& jp : j.at("probes")) {
        ProbeScenario p;
        p.descriptor.probe_id = jp.at("id").get<std::uint8_t>();
        p.descriptor.bus = jp.at("bus").get<std::uint8_t>();
        p.descriptor.position_on_bus = jp.at("position").get<std::uint8_t>();
        std::string kind = jp.at("kind").get<std::string>();
        auto k = probe_kind_from_name(kind);
        if (!k) throw std::runtime_error("unknown probe kind '" + kind + "'");
        p.descriptor.kind = *k;
        p.descriptor.label = jp.value("label", std::string{});
        if (jp.contains("voltage_mV"))
            p.nominal_voltage_mV = jp.at("voltage_mV").get<std::int32_t>();
        else if (auto rail = rail_voltage_mV(*k))
            p.nominal_voltage_mV = *rail;
        p.noise_sigma_mW = jp.value("noise_sigma_mW", 0.0);
        if (jp.contains("seed")) p.noise_seed = jp.at("seed").get<std::uint64_t>();
        p.profile = parse_profile(jp.at("profile"));
        s.probes.push_back(std::move(p));
    }

    for (const auto& jt : j.value("tags", json::array()))
        s.tags.push_back({jt.at(0).get<double>(),
                          static_cast<std::uint8_t>(jt.at(1).get<unsigned>())});
    return s;
}

SimScenario load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scenario file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();

    SimScenario s;
    try {
        s = parse_scenario(buf.str());
    } catch (const json::exception& e) {
        throw std::runtime_error("scenario " + path + ": " + e.what());
    }

    auto errs = validate_scenario(s);
    if (!errs.empty()) {
        std::string msg = "scenario " + path + " rejected:";
        for (const auto& e : errs) msg += "\n  - " + e;
        throw std::runtime_error(msg);
    }
    return s;
}

}  // namespace epmon::sim
