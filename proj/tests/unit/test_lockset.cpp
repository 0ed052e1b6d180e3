#include <gtest/gtest.h>

#include <algorithm>
#include <map>

#include "racediag/lockset.hpp"
#include "testing.hpp"

namespace racediag {
namespace {

using testing::fixture;

std::vector<std::string> names(const Trace& t, const std::vector<LockIndex>& locks) {
  std::vector<std::string> out;
  for (auto l : locks) out.push_back(t.lock_name(l));
  std::sort(out.begin(), out.end());
  return out;
}

using Names = std::vector<std::string>;

TEST(Locksets, OverlappingSections) {
  const auto t = fixture("overlapping_sections");
  const auto ls = compute_locksets(t);
  EXPECT_EQ(names(t, ls.at(2)), Names{"y"});
  EXPECT_EQ(names(t, ls.at(4)), Names{"y"});
  EXPECT_TRUE(ls.at(5).empty());
  EXPECT_TRUE(ls.at(6).empty());
  EXPECT_TRUE(ls.share_lock(2, 4));
  EXPECT_TRUE(ls.skipped_releases.empty());
}

TEST(Locksets, LockFree) {
  const auto t = fixture("five_events");
  const auto ls = compute_locksets(t);
  for (std::size_t p = 1; p <= t.size(); ++p) EXPECT_TRUE(ls.at(p).empty());
}

TEST(Locksets, Nested) {
  const auto t = fixture("nested_locks");
  const auto ls = compute_locksets(t);
  EXPECT_EQ(names(t, ls.at(3)), (Names{"y1", "y2"}));
  EXPECT_EQ(names(t, ls.at(4)), Names{"y1"});
  EXPECT_EQ(names(t, ls.at(7)), Names{"y2"});
  EXPECT_EQ(names(t, ls.at(10)), Names{"y1"});
  EXPECT_FALSE(ls.share_lock(3, 7) && ls.share_lock(7, 10));
}

TEST(Locksets, UnheldReleaseSkipped) {
  const auto t = parse_trace("1,a,UK,m\n2,a,WR,x\n");
  const auto ls = compute_locksets(t);
  EXPECT_EQ(ls.skipped_releases, std::vector<std::size_t>{1});
  EXPECT_TRUE(ls.at(2).empty());
}

TEST(LocksetFlags, OverlappingSectionsFalsePositive) {
  const auto t = fixture("overlapping_sections");
  const auto report = lockset_flags(diagnose_all(t), compute_locksets(t));
  ASSERT_EQ(report.classifications.size(), 1u);
  const auto& c = report.classifications[0];
  EXPECT_EQ(c.pair.first, 2u);
  EXPECT_EQ(c.pair.second, 4u);
  EXPECT_EQ(c.verdict, Verdict::Guaranteed);
  EXPECT_TRUE(c.lockset_fp);
  EXPECT_EQ(report.lockset_fp, 1u);
}

TEST(LocksetFlags, DisjointOrOneSided) {
  const auto disjoint = parse_trace("1,a,LK,m\n2,a,WR,x\n3,a,UK,m\n4,b,LK,n\n5,b,WR,x\n6,b,UK,n\n");
  auto r = lockset_flags(diagnose_all(disjoint), compute_locksets(disjoint));
  ASSERT_EQ(r.classifications.size(), 1u);
  EXPECT_FALSE(r.classifications[0].lockset_fp);

  const auto one = parse_trace("1,a,LK,m\n2,a,WR,x\n3,a,UK,m\n4,b,WR,x\n");
  r = lockset_flags(diagnose_all(one), compute_locksets(one));
  ASSERT_EQ(r.classifications.size(), 1u);
  EXPECT_FALSE(r.classifications[0].lockset_fp);
  EXPECT_EQ(r.lockset_fp, 0u);
}

TEST(LocksetFlags, MaybeUntouched) {
  // Both y writes hold m yet the pair is Maybe through the x dependency.
  const auto t = parse_trace(
      "1,b,RD,x\n2,a,LK,m\n3,a,WR,y\n4,a,WR,x\n5,b,LK,m\n6,b,WR,y\n7,a,UK,m\n8,b,UK,m\n");
  const auto ls = compute_locksets(t);
  const auto r = lockset_flags(diagnose_all(t), ls);
  const auto it = std::find_if(r.classifications.begin(), r.classifications.end(),
                               [](const auto& c) { return c.pair.first == 3 && c.pair.second == 6; });
  ASSERT_NE(it, r.classifications.end());
  EXPECT_EQ(it->verdict, Verdict::Maybe);
  EXPECT_TRUE(ls.share_lock(3, 6));
  EXPECT_FALSE(it->lockset_fp);
}

// Events keyed by (thread name, index within thread).
std::map<std::pair<std::string, std::size_t>, Names> per_thread(const Trace& t) {
  const auto ls = compute_locksets(t);
  std::map<std::pair<std::string, std::size_t>, Names> out;
  std::map<ThreadIndex, std::size_t> count;
  for (const auto& e : t.events()) out[{t.thread_name(e.tid), count[e.tid]++}] = names(t, ls.at(e.pos));
  return out;
}

TEST(LocksetProperty, UnchangedByPerturbation) {
  for (std::uint64_t seed = 1; seed <= 300; ++seed) {
    GenConfig cfg;
    cfg.threads = 3;
    cfg.locks = 2;
    cfg.events = 40;
    cfg.lock_discipline = 0.7;
    cfg.seed = seed;
    const auto t = gen_trace(cfg);
    const auto want = per_thread(t);
    EXPECT_EQ(per_thread(perturb(t, PerturbMode::RW, seed)), want) << "seed " << seed;
    EXPECT_EQ(per_thread(perturb(t, PerturbMode::RR, seed)), want) << "seed " << seed;
  }
}

TEST(LocksetProperty, FlagsNeedCommonLock) {
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    GenConfig cfg;
    cfg.threads = 3;
    cfg.locks = 2;
    cfg.events = 30;
    cfg.lock_discipline = 0.8;
    cfg.seed = seed;
    const auto t = perturb(gen_trace(cfg), PerturbMode::RR, seed);
    const auto ls = compute_locksets(t);
    for (const auto& c : lockset_flags(diagnose_all(t), ls).classifications) {
      if (!c.lockset_fp) continue;
      EXPECT_EQ(c.verdict, Verdict::Guaranteed);
      EXPECT_TRUE(t.at(c.pair.first).is_access() && t.at(c.pair.second).is_access());
      EXPECT_TRUE(ls.share_lock(c.pair.first, c.pair.second));
    }
  }
}

}  // namespace
}  // namespace racediag
