#pragma once

#include <vector>

#include "racediag/diagnosis.hpp"
#include "racediag/trace.hpp"

namespace racediag {

/// Locks held by each event's thread, from that thread's own acquire/release
/// sequence only. An acquire's set includes its lock; a release's does not.
struct Locksets {
  std::vector<std::vector<LockIndex>> held;  // index pos-1, sorted
  std::vector<std::size_t> skipped_releases;  // releases of a lock not held

  const std::vector<LockIndex>& at(std::size_t pos) const { return held.at(pos - 1); }
  bool share_lock(std::size_t a, std::size_t b) const;
};

Locksets compute_locksets(const Trace& t);

/// Sets lockset_fp on every Guaranteed classification whose two events hold a
/// common lock and recounts the report.
DiagnosisReport lockset_flags(DiagnosisReport report, const Locksets& locksets);

}  // namespace racediag
