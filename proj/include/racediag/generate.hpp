#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>

#include "racediag/trace.hpp"

namespace racediag {

struct GenConfig {
  std::size_t threads = 2;
  std::size_t vars = 2;
  std::size_t locks = 1;
  std::size_t events = 20;
  /// Chance that an access outside any critical section first opens one.
  double lock_discipline = 0.5;
  /// A thread's first access to a variable is a write.
  bool ensure_initial_writes = true;
  double read_ratio = 0.5;
  std::uint64_t seed = 1;
};

class GenConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Strict-valid trace of exactly cfg.events events, deterministic in the
/// seed. Threads are named T1.., variables v1.., locks m1...
Trace gen_trace(const GenConfig& cfg);

/// RW: swaps events of different threads unless both operate on the same
/// lock. RR: additionally lets a release fall behind the next
/// other-thread acquire of the same lock.
enum class PerturbMode : std::uint8_t { RW, RR };

/// Whether adjacent events `a` (first) and `b` may trade places.
bool swap_allowed(const Event& a, const Event& b, PerturbMode mode);

/// Random walk of `swaps` attempted adjacent transpositions (default: the
/// trace length). Positions are renumbered 1..n.
Trace perturb(const Trace& t, PerturbMode mode, std::uint64_t seed,
              std::optional<std::size_t> swaps = std::nullopt);

}  // namespace racediag
