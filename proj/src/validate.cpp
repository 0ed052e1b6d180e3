#include "racediag/validate.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace racediag {

std::string_view to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::DanglingAcquire: return "dangling-acquire";
    case ViolationKind::ReleaseWithoutAcquire: return "release-without-acquire";
    case ViolationKind::Reacquire: return "reacquire";
    case ViolationKind::OverlappingAcquire: return "overlapping-acquire";
  }
  return "?";
}

namespace {

struct HeldEntry {
  LockIndex lock;
  std::size_t acquire_pos;
};

std::vector<Violation> check(const Trace& t, ValidityLevel level,
                             std::vector<std::vector<HeldEntry>>* dangling) {
  std::vector<Violation> out;
  std::vector<std::vector<HeldEntry>> held(t.thread_count());
  std::vector<std::optional<ThreadIndex>> owner(t.lock_count());

  for (const auto& e : t.events()) {
    if (e.is_access()) continue;
    auto& mine = held[e.tid];
    auto it = std::find_if(mine.begin(), mine.end(),
                           [&](const HeldEntry& h) { return h.lock == e.target; });
    if (e.is_acquire()) {
      if (it != mine.end()) {
        out.push_back({ViolationKind::Reacquire, e.pos, e.tid, e.target});
        continue;
      }
      if (level == ValidityLevel::Strict && owner[e.target] && *owner[e.target] != e.tid)
        out.push_back({ViolationKind::OverlappingAcquire, e.pos, e.tid, e.target});
      owner[e.target] = e.tid;
      mine.push_back({e.target, e.pos});
    } else {
      if (it == mine.end()) {
        out.push_back({ViolationKind::ReleaseWithoutAcquire, e.pos, e.tid, e.target});
        continue;
      }
      mine.erase(it);
      if (owner[e.target] == e.tid) owner[e.target].reset();
    }
  }

  for (ThreadIndex tid = 0; tid < held.size(); ++tid)
    for (const auto& h : held[tid])
      out.push_back({ViolationKind::DanglingAcquire, h.acquire_pos, tid, h.lock});
  std::stable_sort(out.begin(), out.end(),
                   [](const Violation& a, const Violation& b) { return a.pos < b.pos; });
  if (dangling) *dangling = std::move(held);
  return out;
}

}  // namespace

ValidationReport validate(const Trace& t, ValidityLevel level, ValidateOptions opts) {
  ValidationReport report;
  report.level = level;
  std::vector<std::vector<HeldEntry>> dangling;
  report.violations = check(t, level, &dangling);
  if (!opts.insert_dummy_releases) return report;

  TraceBuilder builder;
  for (const auto& e : t.events()) builder.add_from(t, e);
  for (ThreadIndex tid = 0; tid < dangling.size(); ++tid) {
    const auto& stack = dangling[tid];
    for (auto it = stack.rbegin(); it != stack.rend(); ++it)
      builder.add(t.thread_name(tid), Op::Release, t.lock_name(it->lock));
  }
  report.repaired = std::move(builder).build();
  report.violations = check(*report.repaired, level, nullptr);
  return report;
}

std::string ValidationReport::summary(const Trace& t) const {
  std::ostringstream out;
  for (const auto& v : violations) {
    out << "pos " << v.pos << ": " << to_string(v.kind) << " of lock '" << t.lock_name(v.lock)
        << "' by thread '" << t.thread_name(v.tid) << "'\n";
  }
  return out.str();
}

}  // namespace racediag
