#include <gtest/gtest.h>

#include <algorithm>

#include "racediag/diagnosis.hpp"
#include "racediag/relations.hpp"
#include "testing.hpp"

namespace racediag {
namespace {

using testing::fixture;
using Positions = std::vector<std::size_t>;
using E = EdgeOrigin;

DiagGraph graph_of(const Trace& t) { return build_graph(t, run_sshb_phase1(t)); }

Classification classify(const Trace& t, std::size_t a, std::size_t b) {
  return classify_pair(graph_of(t), make_race_pair(t, a, b));
}

TEST(BuildGraph, LostDependencyGraph) {
  const auto g = graph_of(fixture("lost_dependency"));
  EXPECT_EQ(g.size(), 4u);
  EXPECT_EQ(g.edges(), (std::vector<LabeledEdge>{
                           {1, 4, E::ProgramOrder}, {2, 3, E::ProgramOrder}, {3, 1, E::WriteRead}}));
}

TEST(BuildGraph, TwoCandidateGraph) {
  const auto g = graph_of(fixture("two_candidates"));
  EXPECT_EQ(g.size(), 5u);
  EXPECT_EQ(g.edges(), (std::vector<LabeledEdge>{{1, 2, E::ProgramOrder},
                                                 {2, 3, E::WriteRead},
                                                 {3, 4, E::ProgramOrder},
                                                 {5, 3, E::WriteRead}}));
  EXPECT_TRUE(g.has_edge(5, 3, E::WriteRead));
  EXPECT_FALSE(g.has_edge(5, 3, E::ProgramOrder));
  EXPECT_EQ(g.out(3), (std::vector<LabeledEdge>{{3, 4, E::ProgramOrder}}));
}

TEST(BuildGraph, Empty) {
  const auto g = graph_of(Trace{});
  EXPECT_EQ(g.size(), 0u);
  EXPECT_TRUE(g.edges().empty());
}

TEST(PathExists, Examples) {
  const auto g4 = graph_of(fixture("lost_dependency"));
  EXPECT_EQ(path_exists(g4, 2, 4), (Positions{2, 3, 1, 4}));
  const auto g5 = graph_of(fixture("two_candidates"));
  EXPECT_FALSE(path_exists(g5, 2, 5));
  EXPECT_FALSE(path_exists(g5, 5, 2));
  EXPECT_THROW(path_exists(g5, 3, 3), std::invalid_argument);
  EXPECT_THROW(path_exists(g5, 1, 9), std::invalid_argument);
  EXPECT_FALSE(path_exists(g4, 2, 4, {{3, 1, E::WriteRead}}));
}

TEST(ClassifyPair, FiveEventExample) {
  const auto t = fixture("five_events");
  EXPECT_EQ(classify(t, 1, 2).verdict, Verdict::Guaranteed);
  EXPECT_EQ(classify(t, 2, 4).verdict, Verdict::Guaranteed);
  const auto c = classify(t, 3, 5);
  EXPECT_EQ(c.verdict, Verdict::Maybe);
  EXPECT_EQ(c.witness, (Positions{3, 4, 2, 5}));
  EXPECT_EQ(classify(t, 1, 4).verdict, Verdict::Guaranteed);
}

TEST(ClassifyPair, DependencyGraphs) {
  const auto t5 = fixture("two_candidates");
  EXPECT_EQ(classify(t5, 2, 5).verdict, Verdict::Guaranteed);
  EXPECT_TRUE(classify(t5, 2, 5).witness.empty());
  EXPECT_EQ(classify(t5, 1, 4).verdict, Verdict::Maybe);
  EXPECT_EQ(classify(t5, 1, 4).witness, (Positions{1, 2, 3, 4}));
  const auto t4 = fixture("lost_dependency");
  EXPECT_EQ(classify(t4, 2, 4).verdict, Verdict::Maybe);
}

// The shortest path 4 -> 7 takes a write->read edge into r@8 and then needs
// r@7, which program order puts before r@8. No consistent path exists.
TEST(ClassifyPair, InconsistentShortestPath) {
  const auto t = gen_trace(testing::corpus_config(3759));
  const auto g = graph_of(t);
  const auto pair = make_race_pair(t, 4, 7);
  ASSERT_TRUE(path_exists(g, 4, 7));
  const auto c = classify_pair(g, pair);
  EXPECT_EQ(c.verdict, Verdict::Guaranteed);
  EXPECT_FALSE(c.unresolved);
  EXPECT_EQ(oracle_classify(t, pair), Verdict::Guaranteed);

  const auto starved = classify_pair(g, pair, 0);
  EXPECT_EQ(starved.verdict, Verdict::Maybe);
  EXPECT_TRUE(starved.unresolved);
}

TEST(DiagGraph, Consistency) {
  const auto t = gen_trace(testing::corpus_config(3759));
  const auto g = graph_of(t);
  EXPECT_TRUE(g.consistent({}));
  EXPECT_FALSE(g.consistent({{9, 6, E::WriteRead}, {10, 7, E::WriteRead}}));
  EXPECT_FALSE(g.consistent({{4, 8, E::WriteRead}, {9, 6, E::WriteRead}, {10, 7, E::WriteRead}}));
  EXPECT_FALSE(g.consistent({{4, 8, E::WriteRead}, {2, 8, E::WriteRead}}));
  EXPECT_TRUE(g.consistent({{4, 8, E::WriteRead}}));
}

TEST(DiagnoseAll, Examples) {
  const auto r5 = diagnose_all(fixture("two_candidates"));
  EXPECT_EQ(r5.totals.total(), 4u);
  EXPECT_EQ(r5.totals.maybe, 1u);
  EXPECT_EQ(r5.wr_max, 2u);
  EXPECT_EQ(r5.reads, 1u);

  const auto r51 = diagnose_all(fixture("five_events"));
  EXPECT_EQ(r51.totals.guaranteed, 3u);
  EXPECT_EQ(r51.totals.maybe, 1u);
  const auto ww = static_cast<std::size_t>(RaceCategory::WriteWrite);
  EXPECT_EQ(r51.by_category[ww].maybe, 1u);
  EXPECT_EQ(r51.by_category[ww].guaranteed, 1u);

  const auto empty = diagnose_all(Trace{});
  EXPECT_TRUE(empty.classifications.empty());
  EXPECT_EQ(empty.totals.total(), 0u);
  EXPECT_EQ(empty.reads, 0u);
}

TEST(DiagnoseAll, ParallelMatchesSequential) {
  GenConfig cfg;
  cfg.threads = 4;
  cfg.vars = 3;
  cfg.events = 400;
  cfg.seed = 11;
  const auto t = gen_trace(cfg);
  const auto one = diagnose_all(t);
  const auto four = diagnose_all(t, {.jobs = 4});
  ASSERT_EQ(one.classifications.size(), four.classifications.size());
  for (std::size_t i = 0; i < one.classifications.size(); ++i) {
    EXPECT_EQ(one.classifications[i].verdict, four.classifications[i].verdict);
    EXPECT_EQ(one.classifications[i].witness, four.classifications[i].witness);
  }
}

class DiagnosisCorpus : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(DiagnosisCorpus, Properties) {
  for (std::uint64_t seed = GetParam(); seed < GetParam() + 250; ++seed) {
    const auto t = gen_trace(testing::corpus_config(seed));
    SCOPED_TRACE("seed " + std::to_string(seed));
    const auto phase1 = run_sshb_phase1(t);
    const auto g = build_graph(t, phase1);
    const DiagGraph plain(t.size(), phase1.edges);
    const auto hb = hb_relation(t);

    for (std::size_t a = 1; a <= t.size(); ++a)
      for (std::size_t b = 1; b <= t.size(); ++b) {
        EXPECT_EQ(g.hb(a, b), hb.ordered(a, b)) << a << "," << b;
        EXPECT_EQ(plain.hb(a, b), hb.ordered(a, b)) << a << "," << b;
      }

    // Materializing the W2 candidate edges changes no verdict.
    auto edges = phase1.edges;
    for (const auto& c : phase1.candidates)
      for (auto w : c.w2) edges.push_back({w, c.read, E::WriteRead});
    const DiagGraph full(t.size(), edges, phase1.clocks);

    const SomeShbOracle oracle(t);
    for (const auto& pair : phase1.races) {
      const auto c = classify_pair(g, pair);
      EXPECT_FALSE(c.unresolved);
      EXPECT_EQ(c.verdict, oracle.classify(pair)) << pair.first << "," << pair.second;
      EXPECT_EQ(classify_pair(full, pair).verdict, c.verdict);
      EXPECT_EQ(classify_pair(plain, pair).verdict, c.verdict);
      if (c.verdict == Verdict::Maybe) {
        // The witness is a simple path joining the pair.
        ASSERT_GE(c.witness.size(), 2u);
        const auto ends = std::minmax(c.witness.front(), c.witness.back());
        EXPECT_EQ(ends, std::minmax(pair.first, pair.second));
        auto sorted = c.witness;
        std::sort(sorted.begin(), sorted.end());
        EXPECT_EQ(std::adjacent_find(sorted.begin(), sorted.end()), sorted.end());
        for (std::size_t k = 0; k + 1 < c.witness.size(); ++k) {
          const auto u = c.witness[k], v = c.witness[k + 1];
          EXPECT_TRUE(g.has_edge(u, v, E::ProgramOrder) || g.has_edge(u, v, E::ReleaseAcquire) ||
                      (g.has_edge(u, v, E::WriteRead) &&
                       !(std::minmax(u, v) == std::minmax(pair.first, pair.second))));
        }
      }
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, DiagnosisCorpus, ::testing::Values(3701, 12001, 20001));

}  // namespace
}  // namespace racediag
