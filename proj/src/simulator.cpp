#include "epmon/simulator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>
#include <thread>

namespace epmon::sim {

namespace {

std::string join_errors(const std::vector<std::string>& errs) {
    std::string msg = "invalid scenario:";
    for (const auto& e : errs) msg += "\n  - " + e;
    return msg;
}

}  // namespace

Simulator::Simulator(SimScenario scenario) : scenario_(std::move(scenario)) {
    auto errs = validate_scenario(scenario_);
    if (!errs.empty()) throw std::invalid_argument(join_errors(errs));

    duration_us_ = static_cast<std::uint64_t>(std::llround(scenario_.duration_s * 1e6));

    // per-bus position order fixes the polling interleave
    for (int bus = 0; bus < 2; ++bus) {
        std::vector<const ProbeScenario*> on_bus;
        for (const auto& p : scenario_.probes)
            if (p.descriptor.bus == bus) on_bus.push_back(&p);
        std::sort(on_bus.begin(), on_bus.end(), [](auto* a, auto* b) {
            return a->descriptor.position_on_bus < b->descriptor.position_on_bus;
        });
        auto n = static_cast<int>(on_bus.size());
        if (n == 0) continue;
        auto period_us = static_cast<std::uint64_t>(1'000'000 / per_probe_rate(n));
        for (int i = 0; i < n; ++i) {
            ProbeRuntime rt;
            rt.cfg = on_bus[static_cast<std::size_t>(i)];
            rt.period_us = period_us;
            // stagger probes across the bus polling cycle; first report one
            // full period in so the four conversions sit at t >= 0
            rt.next_report_us =
                period_us + period_us * static_cast<std::uint64_t>(i) /
                                static_cast<std::uint64_t>(n);
            std::uint64_t seed = rt.cfg->noise_seed
                                     ? *rt.cfg->noise_seed
                                     : Rng::derive_seed(scenario_.seed,
                                                        rt.cfg->descriptor.probe_id);
            rt.rng = Rng{seed};
            probes_.push_back(std::move(rt));
        }
    }
}

std::uint64_t Simulator::board_now_us() const {
    if (scenario_.clock_drift_ppm == 0.0) return virtual_now_us_;
    auto skew = std::llround(static_cast<double>(virtual_now_us_) *
                             scenario_.clock_drift_ppm * 1e-6);
    return virtual_now_us_ + static_cast<std::uint64_t>(skew);
}

wire::Frame Simulator::make_sample(ProbeRuntime& probe, std::uint64_t t_us) {
    const auto& cfg = *probe.cfg;
    std::array<RawConversion, 4> conv;
    for (int j = 0; j < kNominalAvgCount; ++j) {
        std::uint64_t t_conv =
            t_us - static_cast<std::uint64_t>((3 - j) * kConversionSpacingUs);
        double truth_W =
            probe.powered ? ground_truth_power(cfg.profile, static_cast<double>(t_conv) * 1e-6)
                          : 0.0;
        double mw = truth_W * 1000.0;
        if (cfg.noise_sigma_mW > 0.0) mw += probe.rng.next_gaussian() * cfg.noise_sigma_mW;
        if (mw < 0.0) mw = 0.0;  // probes never report reverse current
        auto power_mW = static_cast<std::int64_t>(std::nearbyint(mw));
        std::int64_t current_mA =
            div_round_half_even(power_mW * 1000, cfg.nominal_voltage_mV);
        conv[static_cast<std::size_t>(j)] = {cfg.nominal_voltage_mV,
                                             static_cast<std::int32_t>(current_mA),
                                             static_cast<std::int32_t>(power_mW)};
    }
    auto avg = average4(conv);

    Sample s;
    s.probe_id = cfg.descriptor.probe_id;
    s.seq = probe.next_seq++;
    s.board_time_us = board_now_us();
    s.voltage_mV = avg.voltage_mV;
    s.current_mA = avg.current_mA;
    s.power_mW = avg.power_mW;
    s.avg_count = avg.avg_count;
    return wire::SampleFrame{s};
}

void Simulator::emit(const Sink& sink, const wire::Frame& frame) {
    auto bytes = wire::encode(frame);
    sink(bytes);
}

void Simulator::handle_command(const Sink& sink, const wire::Frame& frame,
                               RunReport& report) {
    using namespace wire;
    auto status = [&](std::uint8_t code, std::string detail) {
        emit(sink, StatusFrame{code, std::move(detail)});
        if (code == board_status::ok)
            ++report.commands_ok;
        else
            ++report.commands_rejected;
    };

    if (std::holds_alternative<StartFrame>(frame)) {
        if (state_ == State::Running) {
            status(board_status::ok, "running");
        } else {
            state_ = State::Running;
            status(board_status::ok, "started");
        }
    } else if (std::holds_alternative<StopFrame>(frame)) {
        state_ = State::Idle;
        status(board_status::ok, "stopped");
    } else if (std::holds_alternative<GetTopologyFrame>(frame)) {
        emit(sink, TopologyFrame{scenario_.topology()});
        ++report.commands_ok;
    } else if (auto* sr = std::get_if<SetRateFrame>(&frame)) {
        if (sr->divider == 0) {
            status(board_status::bad_argument, "bad divider");
        } else {
            rate_divider_ = sr->divider;
            status(board_status::ok, "rate");
        }
    } else if (auto* pw = std::get_if<PowerFrame>(&frame)) {
        auto it = std::find_if(probes_.begin(), probes_.end(), [&](const ProbeRuntime& p) {
            return p.cfg->descriptor.probe_id == pw->channel;
        });
        if (it == probes_.end()) {
            status(board_status::unknown_channel, "unknown channel");
        } else {
            it->powered = pw->state == 1;
            status(board_status::ok, "power");
        }
    } else if (std::holds_alternative<PingFrame>(frame)) {
        status(board_status::ok, "pong " + std::to_string(board_now_us()));
    } else if (auto* tag = std::get_if<TagFrame>(&frame)) {
        // host-injected GPIO edge; the board stamps it itself
        if (tag->tag.gpio_state == gpio_state_) {
            status(board_status::no_edge, "no edge");
        } else {
            gpio_state_ = tag->tag.gpio_state;
            emit(sink, TagFrame{TagEvent{board_now_us(), gpio_state_}});
            ++report.tags_emitted;
            status(board_status::ok, "tag");
        }
    } else {
        status(board_status::bad_frame, "unexpected frame");
    }
}

RunReport Simulator::run(const Sink& sink, const Poll& poll) {
    RunReport report{};
    wire::FrameDecoder control;
    bool control_open = true;
    std::uint64_t reported_regions = 0;
    std::uint64_t last_poll_ms = ~0ULL;

    using steady = std::chrono::steady_clock;
    steady::time_point wall_anchor{};
    std::uint64_t virtual_anchor = 0;
    bool anchored = false;

    auto pump_control = [&]() {
        if (!control_open) return;
        auto bytes = poll();
        if (!bytes) {
            control_open = false;
            return;
        }
        if (!bytes->empty()) control.feed(*bytes);
        while (auto frame = control.next()) handle_command(sink, *frame, report);
        // decode-level garbage on the control channel is answered too
        while (reported_regions < control.corrupt_regions()) {
            emit(sink, wire::StatusFrame{board_status::bad_frame, "bad frame"});
            ++report.commands_rejected;
            ++reported_regions;
        }
    };

    for (;;) {
        if (state_ != State::Running) {
            anchored = false;
            pump_control();
            if (state_ == State::Running) continue;
            if (!control_open) break;  // nothing will ever start us
            std::this_thread::sleep_for(std::chrono::microseconds(200));
            continue;
        }

        // at most one control pump per virtual millisecond while running
        std::uint64_t now_ms = virtual_now_us_ / 1000;
        if (now_ms != last_poll_ms) {
            last_poll_ms = now_ms;
            pump_control();
            if (state_ != State::Running) continue;
        }

        // next event: scheduled tag or earliest probe report; tags first on ties
        std::uint64_t t_tag = next_tag_ < scenario_.tags.size()
                                  ? static_cast<std::uint64_t>(
                                        std::llround(scenario_.tags[next_tag_].t_s * 1e6))
                                  : ~0ULL;
        ProbeRuntime* next_probe = nullptr;
        for (auto& p : probes_)
            if (!next_probe || p.next_report_us < next_probe->next_report_us)
                next_probe = &p;
        std::uint64_t t_probe = next_probe ? next_probe->next_report_us : ~0ULL;
        std::uint64_t t_event = std::min(t_tag, t_probe);

        if (t_event > duration_us_ || t_event == ~0ULL) {
            virtual_now_us_ = duration_us_;
            emit(sink, wire::StatusFrame{board_status::ok, "done"});
            report.completed = true;
            state_ = State::Done;
            break;
        }

        if (scenario_.time_acceleration > 0.0) {
            if (!anchored) {
                wall_anchor = steady::now();
                virtual_anchor = virtual_now_us_;
                anchored = true;
            }
            auto deadline =
                wall_anchor + std::chrono::microseconds(static_cast<std::int64_t>(
                                  static_cast<double>(t_event - virtual_anchor) /
                                  scenario_.time_acceleration));
            while (steady::now() < deadline) {
                pump_control();
                if (state_ != State::Running) break;
                auto remain = deadline - steady::now();
                auto nap = std::min<steady::duration>(remain, std::chrono::milliseconds(1));
                if (nap > steady::duration::zero()) std::this_thread::sleep_for(nap);
            }
            if (state_ != State::Running) continue;
        }

        virtual_now_us_ = t_event;
        if (t_tag <= t_probe) {
            const auto& entry = scenario_.tags[next_tag_++];
            // a runtime injection may have already moved the lines here
            if (entry.gpio_state != gpio_state_) {
                gpio_state_ = entry.gpio_state;
                emit(sink, wire::TagFrame{TagEvent{board_now_us(), gpio_state_}});
                ++report.tags_emitted;
            }
        } else {
            bool due = next_probe->report_index % rate_divider_ == 0;
            ++next_probe->report_index;
            if (due) {
                auto frame = make_sample(*next_probe, t_event);
                emit(sink, frame);
                ++report.samples_emitted[next_probe->cfg->descriptor.probe_id];
            }
            next_probe->next_report_us += next_probe->period_us;
        }
    }
    return report;
}

}  // namespace epmon::sim
