#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "epmon/core.hpp"
#include "epmon/load_profile.hpp"

namespace epmon::sim {

struct ProbeScenario {
    ProbeDescriptor descriptor;
    LoadProfile profile;
    std::int32_t nominal_voltage_mV = 0;   // defaults to the rail voltage for PSU kinds
    double noise_sigma_mW = 0.0;
    std::optional<std::uint64_t> noise_seed;  // derived from the scenario seed when absent
};

struct TagScheduleEntry {
    double t_s = 0.0;
    std::uint8_t gpio_state = 0;
};

struct SimScenario {
    std::string board_serial = "EPSIM";
    double duration_s = 0.0;
    double time_acceleration = 0.0;  // 1.0 = real time, 0 = as fast as possible
    std::uint64_t seed = 0;
    double clock_drift_ppm = 0.0;    // constant board clock skew vs ideal time
    std::vector<ProbeScenario> probes;
    std::vector<TagScheduleEntry> tags;

    Topology topology() const;
};

// Everything wrong with the scenario, each message naming the probe it
// concerns: topology caps, per-kind power ceilings, profile parameters,
// tag schedule monotonicity/edges. Empty means runnable.
std::vector<std::string> validate_scenario(const SimScenario& s);

// JSON layout, all powers in watts:
//
// {
//   "board_serial": "EPSIM-01",
//   "duration_s": 10.0,
//   "acceleration": 0.0,
//   "seed": 42,
//   "clock_drift_ppm": 0.0,
//   "probes": [
//     { "id": 0, "bus": 0, "position": 0, "kind": "usb_c", "label": "node0",
//       "voltage_mV": 20000, "noise_sigma_mW": 0.5,
//       "profile": { "type": "constant", "power_W": 100.0 } }
//   ],
//   "tags": [ [1.0, 1], [2.0, 0] ]
// }
//
// profile types:
//   constant       power_W
//   square         period_s, duty, low_W, high_W
//   sine           mean_W, amplitude_W, period_s
//   trace          points: [[t_s, power_W], ...]
//   node_lifecycle suspend_W, idle_W, load_W, boot_s, idle_timeout_s,
//                  jobs: [[start_s, end_s], ...]
SimScenario parse_scenario(const std::string& json_text);

// parse + validate; throws std::runtime_error listing every violation
SimScenario load_scenario_file(const std::string& path);

}  // namespace epmon::sim
