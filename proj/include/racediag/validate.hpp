#pragma once

#include <optional>
#include <string>
#include <vector>

#include "racediag/trace.hpp"

namespace racediag {

/// Strict: critical sections on one lock never overlap (accurate
/// release-acquire tracing). Lenient: only per-thread acquire/release
/// matching is required.
enum class ValidityLevel { Strict, Lenient };

enum class ViolationKind {
  DanglingAcquire,        // acquire with no later same-thread release
  ReleaseWithoutAcquire,  // release of a lock the thread does not hold
  Reacquire,              // thread acquires a lock it already holds
  OverlappingAcquire,     // Strict only: lock currently held by another thread
};

std::string_view to_string(ViolationKind k);

struct Violation {
  ViolationKind kind;
  std::size_t pos;
  ThreadIndex tid;
  LockIndex lock;
};

struct ValidateOptions {
  /// Append a synthetic release at the end of the trace for every dangling
  /// acquire (innermost first per thread). Violations are then reported for
  /// the repaired trace.
  bool insert_dummy_releases = false;
};

struct ValidationReport {
  ValidityLevel level = ValidityLevel::Lenient;
  std::vector<Violation> violations;
  /// Set when dummy releases were requested; the repaired trace.
  std::optional<Trace> repaired;

  bool ok() const { return violations.empty(); }
  std::string summary(const Trace& t) const;
};

ValidationReport validate(const Trace& t, ValidityLevel level, ValidateOptions opts = {});

}  // namespace racediag
