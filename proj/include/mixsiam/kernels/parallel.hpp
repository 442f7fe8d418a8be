#pragma once

namespace mixsiam::kernels {

// When set, every kernel runs on the calling thread. Results are identical
// either way: parallel kernels split work over output elements only and keep
// each reduction in serial order.
void set_strict_deterministic(bool on);
bool strict_deterministic();

int max_threads();

// Scoped override, restores the previous mode on exit.
class StrictModeGuard {
public:
    explicit StrictModeGuard(bool on) : previous_(strict_deterministic()) { set_strict_deterministic(on); }
    ~StrictModeGuard() { set_strict_deterministic(previous_); }
    StrictModeGuard(const StrictModeGuard&) = delete;
    StrictModeGuard& operator=(const StrictModeGuard&) = delete;

private:
    bool previous_;
};

}  // namespace mixsiam::kernels
