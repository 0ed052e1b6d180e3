#pragma once

#include <compare>
#include <string>
#include <utility>
#include <vector>

#include "racediag/trace.hpp"
#include "racediag/vclock.hpp"

namespace racediag {

/// WriteRead: the write appears first in the trace; ReadWrite: the read does.
enum class RaceCategory : std::uint8_t { WriteWrite, WriteRead, ReadWrite };

std::string_view to_string(RaceCategory c);

/// Two conflicting events, `first.pos < second.pos`.
struct RacePair {
  std::size_t first = 0;
  std::size_t second = 0;
  RaceCategory category = RaceCategory::WriteWrite;
  VarIndex var = 0;

  friend bool operator==(const RacePair& a, const RacePair& b) {
    return a.first == b.first && a.second == b.second;
  }
  friend auto operator<=>(const RacePair& a, const RacePair& b) {
    return std::pair(a.first, a.second) <=> std::pair(b.first, b.second);
  }
};

/// Orders `a` and `b` by position and derives the category. Both must be
/// conflicting accesses.
RacePair make_race_pair(const Trace& t, std::size_t a, std::size_t b);

/// Unordered pair of source locations, smaller string first.
std::pair<std::string, std::string> loc_pair(const Trace& t, const RacePair& p);

/// Keeps the first race pair per distinct location pair.
std::vector<RacePair> dedup_by_location(const Trace& t, const std::vector<RacePair>& races);

enum class EdgeOrigin : std::uint8_t { ProgramOrder, ReleaseAcquire, WriteRead };

/// Graph edge between trace positions. ProgramOrder and ReleaseAcquire edges
/// carry the HB label; WriteRead edges carry W(dst) and always end at the read.
struct LabeledEdge {
  std::size_t src = 0;
  std::size_t dst = 0;
  EdgeOrigin origin = EdgeOrigin::ProgramOrder;

  bool is_hb() const { return origin != EdgeOrigin::WriteRead; }

  friend bool operator==(const LabeledEdge&, const LabeledEdge&) = default;
  friend auto operator<=>(const LabeledEdge&, const LabeledEdge&) = default;
};

/// How race pairs and write-read candidate edges are enumerated.
///
/// Frontier follows the published pseudo code literally: only the antichains
/// cw(x)/cr(x) are consulted, so an access that was pruned from them is never
/// paired again. Complete reports every unordered conflicting pair and the
/// exact unsynchronized candidates W1(r) of every read; cw/cr are still
/// maintained and bounded the same way.
enum class PairMode : std::uint8_t { Complete, Frontier };

struct AnalysisOptions {
  PairMode mode = PairMode::Complete;
};

struct EpochRef {
  Epoch epoch;
  std::size_t pos = 0;
};

struct AnalyzerState {
  std::vector<VectorClock> threads;  // Th(i)
  std::vector<VectorClock> locks;    // L(y), clock of the last release
  std::vector<std::vector<EpochRef>> cw;  // concurrent writes per variable
  std::vector<std::vector<EpochRef>> cr;  // concurrent reads per variable
  std::size_t max_cw = 0;                 // largest |cw(x)| seen at any step
  std::size_t max_cr = 0;
};

struct FastTrackRace {
  std::size_t pos = 0;      // event at which the race was detected
  std::size_t partner = 0;  // earlier conflicting access
  RaceCategory category = RaceCategory::WriteWrite;
  VectorClock clock;        // Th(i) of the detecting event
};

struct FastTrackReport {
  std::vector<FastTrackRace> races;  // detection order
  /// Races after the first may stem from ignored write-read dependencies.
  bool sound_up_to_first_race = true;

  std::size_t racy_events() const;
};

FastTrackReport run_fasttrack(const Trace& t);

/// HB race pairs (no write-read dependencies), sorted by (first, second).
std::vector<RacePair> run_hb_partner(const Trace& t, AnalysisOptions opts = {});

/// SHB race pairs: a read additionally joins the clock of the last write to
/// its variable. A read still races with that last write when the two are
/// unordered apart from the dependency itself.
std::vector<RacePair> run_shb_partner(const Trace& t, AnalysisOptions opts = {});

/// Write-read dependency candidates of one read: W1 unsynchronized, W2
/// synchronized closest writes, each sorted by position.
struct ReadCandidates {
  std::size_t read = 0;
  std::vector<std::size_t> w1;
  std::vector<std::size_t> w2;
  /// W2 minus the writes that happen before some W1 element.
  std::vector<std::size_t> w2_kept;

  std::size_t size() const { return w1.size() + w2.size(); }
  std::size_t kept() const { return w1.size() + w2_kept.size(); }
};

/// Vector clock of every event as seen by the analysis (after the acquire
/// join, before the increment), used for constant-time HB queries.
struct EventClocks {
  std::size_t width = 0;
  std::vector<ThreadIndex> tid;  // index pos-1
  std::vector<Stamp> table;      // row pos-1, `width` stamps each

  std::size_t size() const { return tid.size(); }
  const Stamp* row(std::size_t pos) const { return table.data() + (pos - 1) * width; }
  /// Event `a` happens before event `b` (strictly).
  bool hb(std::size_t a, std::size_t b) const {
    if (tid[a - 1] == tid[b - 1]) return a < b;
    return row(a)[tid[a - 1]] <= row(b)[tid[a - 1]];
  }
};

struct Phase1Result {
  std::vector<RacePair> races;        // sorted by (first, second)
  std::vector<LabeledEdge> edges;     // PO successor, release->acquire, W candidates
  std::vector<ReadCandidates> candidates;  // one entry per read, trace order
  AnalyzerState state;
  EventClocks clocks;
};

/// First phase of the guaranteed/maybe diagnosis: HB race pairs plus the
/// edge set of the diagnosis graph.
Phase1Result run_sshb_phase1(const Trace& t, AnalysisOptions opts = {});

}  // namespace racediag
