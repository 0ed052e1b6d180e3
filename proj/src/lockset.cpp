#include "racediag/lockset.hpp"

#include <algorithm>

namespace racediag {

bool Locksets::share_lock(std::size_t a, std::size_t b) const {
  const auto& x = at(a);
  const auto& y = at(b);
  auto i = x.begin();
  auto j = y.begin();
  while (i != x.end() && j != y.end()) {
    if (*i == *j) return true;
    *i < *j ? ++i : ++j;
  }
  return false;
}

Locksets compute_locksets(const Trace& t) {
  Locksets out;
  out.held.reserve(t.size());
  std::vector<std::vector<LockIndex>> current(t.thread_count());
  for (const auto& e : t.events()) {
    auto& mine = current[e.tid];
    if (e.is_acquire()) {
      const auto it = std::lower_bound(mine.begin(), mine.end(), e.target);
      if (it == mine.end() || *it != e.target) mine.insert(it, e.target);
    } else if (e.is_release()) {
      const auto it = std::lower_bound(mine.begin(), mine.end(), e.target);
      if (it != mine.end() && *it == e.target) mine.erase(it);
      else out.skipped_releases.push_back(e.pos);
    }
    out.held.push_back(mine);
  }
  return out;
}

DiagnosisReport lockset_flags(DiagnosisReport report, const Locksets& locksets) {
  for (auto& c : report.classifications)
    c.lockset_fp = c.verdict == Verdict::Guaranteed && locksets.share_lock(c.pair.first, c.pair.second);
  report.recount();
  return report;
}

}  // namespace racediag
