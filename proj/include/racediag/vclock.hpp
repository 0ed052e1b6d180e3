#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

#include "racediag/trace.hpp"

namespace racediag {

using Stamp = std::uint32_t;

/// Fixed-width vector of per-thread timestamps; slot j belongs to thread j.
class VectorClock {
 public:
  VectorClock() = default;
  explicit VectorClock(std::size_t width) : stamps_(width, 0) {}
  VectorClock(std::initializer_list<Stamp> stamps) : stamps_(stamps) {}

  /// Initial clock of thread `tid`: all zero except slot `tid`, which is 1.
  static VectorClock for_thread(std::size_t width, ThreadIndex tid);

  std::size_t size() const { return stamps_.size(); }
  Stamp operator[](std::size_t j) const { return stamps_[j]; }
  Stamp at(std::size_t j) const { return stamps_.at(j); }
  const std::vector<Stamp>& stamps() const { return stamps_; }

  /// Pointwise maximum in place. Throws std::invalid_argument on width mismatch.
  VectorClock& join_with(const VectorClock& other);
  /// Increments slot `tid`. Throws std::out_of_range for a bad index.
  VectorClock& increment(ThreadIndex tid);

  /// a <= b pointwise.
  bool leq(const VectorClock& other) const;

  std::string str() const;

  friend bool operator==(const VectorClock&, const VectorClock&) = default;

 private:
  std::vector<Stamp> stamps_;
};

VectorClock join(VectorClock a, const VectorClock& b);
VectorClock inc(VectorClock v, ThreadIndex tid);

/// (thread, stamp) pair naming one event within an analysis.
struct Epoch {
  ThreadIndex tid = 0;
  Stamp stamp = 0;

  friend auto operator<=>(const Epoch&, const Epoch&) = default;
};

/// True iff the event with epoch `e` is not ordered before the holder of
/// clock `v`, i.e. `e.stamp > v[e.tid]`.
inline bool epoch_concurrent(const Epoch& e, const VectorClock& v) {
  return e.stamp > v[e.tid];
}

}  // namespace racediag
