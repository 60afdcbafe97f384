#pragma once

#include <chrono>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

namespace dv {

// Monotonic time source used by retry/backoff logic so tests can run the
// schedule on a simulated clock.
class Clock {
public:
    virtual ~Clock() = default;
    virtual std::chrono::milliseconds now() = 0;
    virtual void sleep_for(std::chrono::milliseconds d) = 0;
};

class SystemClock : public Clock {
public:
    std::chrono::milliseconds now() override {
        return std::chrono::duration_cast<std::chrono::milliseconds>(
            std::chrono::steady_clock::now().time_since_epoch());
    }
    void sleep_for(std::chrono::milliseconds d) override { std::this_thread::sleep_for(d); }
};

// Virtual clock: sleep_for advances time instantly and records the request.
class SimulatedClock : public Clock {
public:
    std::chrono::milliseconds now() override {
        std::lock_guard lock(mu_);
        return now_;
    }
    void sleep_for(std::chrono::milliseconds d) override {
        std::lock_guard lock(mu_);
        now_ += d;
        sleeps_.push_back(d);
    }
    std::vector<std::chrono::milliseconds> sleeps() const {
        std::lock_guard lock(mu_);
        return sleeps_;
    }
    std::chrono::milliseconds total_slept() const {
        std::lock_guard lock(mu_);
        std::chrono::milliseconds total{0};
        for (auto d : sleeps_) total += d;
        return total;
    }

private:
    mutable std::mutex mu_;
    std::chrono::milliseconds now_{0};
    std::vector<std::chrono::milliseconds> sleeps_;
};

}  // namespace dv
