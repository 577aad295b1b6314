#pragma once

#include <chrono>
#include <cstdint>

namespace epmon {

// Host timestamp source for ingest. Swappable so replay-style runs can be
// made byte-reproducible (see FixedStepClock).
class Clock {
public:
    virtual ~Clock() = default;
    virtual std::int64_t now_ns() = 0;
};

class SystemClock final : public Clock {
public:
    std::int64_t now_ns() override {
        return std::chrono::duration_cast<std::chrono::nanoseconds>(
                   std::chrono::system_clock::now().time_since_epoch())
            .count();
    }
};

// Returns epoch, epoch+step, epoch+2*step, ... — one tick per call. Gives
// deterministic host timestamps independent of wall time and scheduling.
class FixedStepClock final : public Clock {
public:
    explicit FixedStepClock(std::int64_t epoch_ns, std::int64_t step_ns = 1000)
        : next_(epoch_ns), step_(step_ns) {}

    std::int64_t now_ns() override {
        std::int64_t v = next_;
        next_ += step_;
        return v;
    }

private:
    std::int64_t next_;
    std::int64_t step_;
};

}  // namespace epmon
