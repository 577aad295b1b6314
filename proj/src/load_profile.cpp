#include "epmon/load_profile.hpp"

#include <algorithm>
#include <cmath>

namespace epmon::sim {

namespace {

constexpr double kTwoPi = 6.28318530717958647692;

// load intervals after merging wake/boot extensions with queued jobs;
// between intervals the node idles, then suspends after idle_timeout_s
std::vector<JobInterval> load_intervals(const NodeLifecycleLoad& lc) {
    std::vector<JobInterval> out;
    for (const auto& job : lc.jobs) {
        if (!out.empty() && job.start_s <= out.back().end_s + lc.idle_timeout_s) {
            // node is still awake: either extend the running load interval
            // or start a fresh one from idle (no boot needed)
            if (job.start_s <= out.back().end_s)
                out.back().end_s = std::max(out.back().end_s, job.end_s);
            else
                out.push_back({job.start_s, job.end_s});
        } else {
            // woken from suspend: boot time is spent at load power
            out.push_back({job.start_s, std::max(job.end_s, job.start_s + lc.boot_s)});
        }
    }
    return out;
}

double lifecycle_power(const NodeLifecycleLoad& lc, double t) {
    double idle_until = -1.0;
    for (const auto& iv : load_intervals(lc)) {
        if (t < iv.start_s) break;
        if (t < iv.end_s) return lc.load_W;
        idle_until = iv.end_s + lc.idle_timeout_s;
    }
    if (idle_until >= 0.0 && t < idle_until) return lc.idle_W;
    return lc.suspend_W;
}

}  // namespace

double ground_truth_power(const LoadProfile& profile, double t_s) {
    return std::visit(
        [t_s](const auto& p) -> double {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, ConstantLoad>) {
                return p.power_W;
            } else if constexpr (std::is_same_v<T, SquareLoad>) {
                double phase = std::fmod(t_s, p.period_s);
                return phase < p.duty * p.period_s ? p.high_W : p.low_W;
            } else if constexpr (std::is_same_v<T, SineLoad>) {
                return p.mean_W + p.amplitude_W * std::sin(kTwoPi * t_s / p.period_s);
            } else if constexpr (std::is_same_v<T, TraceLoad>) {
                if (p.points.empty()) return 0.0;
                auto it = std::upper_bound(
                    p.points.begin(), p.points.end(), t_s,
                    [](double t, const auto& pt) { return t < pt.first; });
                if (it == p.points.begin()) return p.points.front().second;
                return std::prev(it)->second;
            } else {
                return lifecycle_power(p, t_s);
            }
        },
        profile);
}

double max_power_W(const LoadProfile& profile) {
    return std::visit(
        [](const auto& p) -> double {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, ConstantLoad>) {
                return p.power_W;
            } else if constexpr (std::is_same_v<T, SquareLoad>) {
                return std::max(p.low_W, p.high_W);
            } else if constexpr (std::is_same_v<T, SineLoad>) {
                return p.mean_W + p.amplitude_W;
            } else if constexpr (std::is_same_v<T, TraceLoad>) {
                double m = 0.0;
                for (const auto& pt : p.points) m = std::max(m, pt.second);
                return m;
            } else {
                return std::max({p.suspend_W, p.idle_W, p.load_W});
            }
        },
        profile);
}

std::vector<std::string> validate_profile(const LoadProfile& profile) {
    std::vector<std::string> errs;
    auto add = [&](const char* msg) { errs.emplace_back(msg); };
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, ConstantLoad>) {
                if (!(p.power_W >= 0.0)) add("constant: power must be >= 0");
            } else if constexpr (std::is_same_v<T, SquareLoad>) {
                if (!(p.period_s > 0.0)) add("square: period must be > 0");
                if (!(p.duty >= 0.0 && p.duty <= 1.0)) add("square: duty must be in 0..1");
                if (!(p.low_W >= 0.0) || !(p.high_W >= 0.0))
                    add("square: powers must be >= 0");
            } else if constexpr (std::is_same_v<T, SineLoad>) {
                if (!(p.period_s > 0.0)) add("sine: period must be > 0");
                if (!(p.amplitude_W >= 0.0)) add("sine: amplitude must be >= 0");
                if (!(p.mean_W - p.amplitude_W >= 0.0))
                    add("sine: mean - amplitude must be >= 0");
            } else if constexpr (std::is_same_v<T, TraceLoad>) {
                if (p.points.empty()) add("trace: needs at least one point");
                for (std::size_t i = 0; i < p.points.size(); ++i) {
                    if (!(p.points[i].second >= 0.0)) {
                        add("trace: powers must be >= 0");
                        break;
                    }
                }
                for (std::size_t i = 0; i + 1 < p.points.size(); ++i) {
                    if (!(p.points[i].first < p.points[i + 1].first)) {
                        add("trace: times must be strictly increasing");
                        break;
                    }
                }
                if (!p.points.empty() && !(p.points.front().first >= 0.0))
                    add("trace: times must be >= 0");
            } else {
                if (!(p.suspend_W >= 0.0) || !(p.idle_W >= 0.0) || !(p.load_W >= 0.0))
                    add("lifecycle: powers must be >= 0");
                if (!(p.boot_s >= 0.0)) add("lifecycle: boot time must be >= 0");
                if (!(p.idle_timeout_s >= 0.0)) add("lifecycle: idle timeout must be >= 0");
                for (const auto& j : p.jobs) {
                    if (!(j.start_s >= 0.0 && j.end_s > j.start_s)) {
                        add("lifecycle: jobs need 0 <= start < end");
                        break;
                    }
                }
                for (std::size_t i = 0; i + 1 < p.jobs.size(); ++i) {
                    if (!(p.jobs[i].end_s <= p.jobs[i + 1].start_s)) {
                        add("lifecycle: jobs must be sorted and non-overlapping");
                        break;
                    }
                }
            }
        },
        profile);
    return errs;
}

std::vector<PowerSegment> lifecycle_segments(const NodeLifecycleLoad& lc,
                                             double horizon_s) {
    std::vector<PowerSegment> segs;
    auto emit = [&](double a, double b, double w) {
        a = std::max(a, 0.0);
        b = std::min(b, horizon_s);
        if (b > a) segs.push_back({a, b, w});
    };

    double cursor = 0.0;
    auto intervals = load_intervals(lc);
    for (std::size_t i = 0; i < intervals.size() && cursor < horizon_s; ++i) {
        const auto& iv = intervals[i];
        emit(cursor, iv.start_s, lc.suspend_W);
        emit(iv.start_s, iv.end_s, lc.load_W);
        double idle_end = iv.end_s + lc.idle_timeout_s;
        if (i + 1 < intervals.size())
            idle_end = std::min(idle_end, intervals[i + 1].start_s);
        emit(iv.end_s, idle_end, lc.idle_W);
        cursor = idle_end;
    }
    emit(cursor, horizon_s, lc.suspend_W);
    return segs;
}

}  // namespace epmon::sim
