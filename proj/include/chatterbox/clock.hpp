#pragma once

#include <chatterbox/time.hpp>

#include <atomic>

namespace chatterbox {

/// Source of the current instant. Every component takes one by reference;
/// only the platform layer provides a wall-clock implementation.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual Instant now() const = 0;
};

/// Manually advanced clock for simulations and tests.
class SimClock final : public Clock {
 public:
  explicit SimClock(Instant start) : now_(to_unix(start)) {}

  Instant now() const override { return from_unix(now_.load()); }

  /// Never moves backwards.
  void advance_to(Instant t) {
    auto target = to_unix(t);
    auto cur = now_.load();
    while (target > cur && !now_.compare_exchange_weak(cur, target)) {
    }
  }
  void advance_by(Seconds d) { advance_to(now() + d); }

 private:
  std::atomic<std::int64_t> now_;
};

}  // namespace chatterbox
