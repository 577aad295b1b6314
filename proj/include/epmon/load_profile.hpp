#pragma once

#include <string>
#include <variant>
#include <vector>

namespace epmon::sim {

struct ConstantLoad {
    double power_W = 0.0;
};

// High for the first duty fraction of each period, then low.
struct SquareLoad {
    double period_s = 1.0;
    double duty = 0.5;  // 0..1
    double low_W = 0.0;
    double high_W = 0.0;
};

struct SineLoad {
    double mean_W = 0.0;
    double amplitude_W = 0.0;  // mean - amplitude must stay >= 0
    double period_s = 1.0;
};

// Step-held playback: value at t is the power of the last point at or
// before t; the first point's value also holds before it.
struct TraceLoad {
    std::vector<std::pair<double, double>> points;  // (t_s, power_W), t strictly increasing
};

struct JobInterval {
    double start_s = 0.0;
    double end_s = 0.0;
};

// Suspend/idle/load cycle of a managed compute node: suspended until a job
// arrives, boots at load power, runs jobs at load power, idles between
// close jobs, and suspends again after idle_timeout_s with nothing queued.
struct NodeLifecycleLoad {
    double suspend_W = 0.0;
    double idle_W = 0.0;
    double load_W = 0.0;
    double boot_s = 0.0;
    double idle_timeout_s = 0.0;
    std::vector<JobInterval> jobs;  // sorted, non-overlapping
};

using LoadProfile =
    std::variant<ConstantLoad, SquareLoad, SineLoad, TraceLoad, NodeLifecycleLoad>;

// Exact profile value at t (seconds, t >= 0).
double ground_truth_power(const LoadProfile& profile, double t_s);

// Largest power the profile can produce; scenario ceilings are checked
// against this.
double max_power_W(const LoadProfile& profile);

// Parameter problems (negative powers, bad duty, unsorted trace/jobs, ...),
// one message each. Empty means valid.
std::vector<std::string> validate_profile(const LoadProfile& profile);

// Half-open [t0, t1) spans of constant power. For a lifecycle load this is
// the suspend/boot+load/idle decomposition over [0, horizon); reports and
// test oracles integrate it in closed form.
struct PowerSegment {
    double t0_s = 0.0;
    double t1_s = 0.0;
    double power_W = 0.0;
};
std::vector<PowerSegment> lifecycle_segments(const NodeLifecycleLoad& load,
                                             double horizon_s);

}  // namespace epmon::sim
