#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <utility>
#include <variant>
#include <vector>

#include "racediag/analyzers.hpp"
#include "racediag/trace.hpp"

namespace racediag {

/// Directed edge between 1-based trace positions.
using PosEdge = std::pair<std::size_t, std::size_t>;

/// Strict partial order over the events of a trace, stored as a
/// reachability bitset table computed from a set of generating edges.
class PartialOrder {
 public:
  static constexpr std::size_t kMaxEvents = 10000;

  PartialOrder() = default;

  /// Transitive closure of `edges` over positions 1..n. Returns the order, or
  /// a cycle (positions in path order, the last one leading back to the
  /// first) if the edges are cyclic. Throws std::length_error for n above
  /// kMaxEvents.
  static std::variant<PartialOrder, std::vector<std::size_t>> close(std::size_t n,
                                                                    std::vector<PosEdge> edges);

  std::size_t size() const { return n_; }
  /// a is strictly before b.
  bool ordered(std::size_t a, std::size_t b) const;
  /// Distinct events ordered in neither direction.
  bool unordered(std::size_t a, std::size_t b) const {
    return a != b && !ordered(a, b) && !ordered(b, a);
  }
  const std::vector<PosEdge>& generating_edges() const { return edges_; }

  /// Reachability over the generating edges with one edge removed.
  bool reaches_without(std::size_t a, std::size_t b, const PosEdge& removed) const;

  friend bool operator==(const PartialOrder& a, const PartialOrder& b) {
    return a.n_ == b.n_ && a.bits_ == b.bits_;
  }

 private:
  std::size_t n_ = 0;
  std::size_t words_ = 0;
  std::vector<std::uint64_t> bits_;  // row a: events reachable from a
  std::vector<PosEdge> edges_;
};

using CycleWitness = std::vector<std::size_t>;

/// Generating edges of HB: program-order successors and release-acquire
/// dependencies taken literally (first other-thread acquire of the lock
/// after the release).
std::vector<PosEdge> hb_edges(const Trace& t);
/// hb_edges plus nearest-preceding-write edges into every read.
std::vector<PosEdge> shb_edges(const Trace& t);

PartialOrder hb_relation(const Trace& t);
PartialOrder shb_relation(const Trace& t);

struct WrdCandidates {
  std::size_t read = 0;
  std::vector<std::size_t> w1;  // HB-unordered with read, maximal
  std::vector<std::size_t> w2;  // HB-before read, maximal

  std::vector<std::size_t> all() const;
  std::size_t size() const { return w1.size() + w2.size(); }
};

WrdCandidates wrd_candidates(const Trace& t, const PartialOrder& hb, std::size_t read);
/// Candidates for every read, in trace order.
std::vector<WrdCandidates> all_wrd_candidates(const Trace& t, const PartialOrder& hb);

/// Drops every W2 element that happens before some W1 element.
WrdCandidates prune_candidates(const WrdCandidates& c, const PartialOrder& hb);

bool has_initial_write(const Trace& t, const PartialOrder& hb, std::size_t read);

/// HB plus an edge from every candidate to its read.
std::variant<PartialOrder, CycleWitness> strong_shb(const Trace& t);

class CandidateProductTooLarge : public std::runtime_error {
 public:
  CandidateProductTooLarge(std::uint64_t product, std::uint64_t cap);
  std::uint64_t product() const { return product_; }
  std::uint64_t cap() const { return cap_; }

 private:
  std::uint64_t product_;
  std::uint64_t cap_;
};

struct SomeShbInstance {
  /// Chosen (write, read) edge for every read with candidates. A W2 choice
  /// stands for all members of W2(r): each yields the HB order for that read.
  std::vector<PosEdge> choice;
  /// Number of original combinations this instance represents.
  std::uint64_t multiplicity = 1;
  PartialOrder order;
};

struct SomeShbSummary {
  std::uint64_t combinations = 0;  // product of |W(r)| over reads with candidates
  std::uint64_t acyclic = 0;       // combinations yielding a partial order
  std::size_t instances = 0;       // distinct acyclic relations visited
};

constexpr std::uint64_t kDefaultCandidateCap = 1ull << 20;

/// Visits every acyclic SomeSHB instance. Throws CandidateProductTooLarge
/// when the full product of candidate set sizes exceeds `cap`.
SomeShbSummary for_each_someshb(const Trace& t,
                                const std::function<void(const SomeShbInstance&)>& visit,
                                std::uint64_t cap = kDefaultCandidateCap);

struct SomeShbEnumeration {
  SomeShbSummary summary;
  std::vector<SomeShbInstance> instances;
};

SomeShbEnumeration enumerate_someshb(const Trace& t, std::uint64_t cap = kDefaultCandidateCap);

enum class Verdict : std::uint8_t { Guaranteed, Maybe, NotAnHbRace };

std::string_view to_string(Verdict v);

/// Brute-force classifier over all SomeSHB instances of one trace.
class SomeShbOracle {
 public:
  explicit SomeShbOracle(const Trace& t, std::uint64_t cap = kDefaultCandidateCap);

  /// Maybe iff some instance orders the pair other than through a direct
  /// chosen edge between the two events.
  Verdict classify(std::size_t a, std::size_t b) const;
  Verdict classify(const RacePair& p) const { return classify(p.first, p.second); }

  const PartialOrder& hb() const { return hb_; }
  const SomeShbSummary& summary() const { return enumeration_.summary; }

 private:
  PartialOrder hb_;
  SomeShbEnumeration enumeration_;
};

Verdict oracle_classify(const Trace& t, const RacePair& pair,
                        std::uint64_t cap = kDefaultCandidateCap);

/// Conflicting pairs unordered by hb_relation, sorted.
std::vector<RacePair> hb_race_pairs(const Trace& t);
/// Conflicting pairs unordered by shb_relation, plus (w, r) pairs where w is
/// the nearest write before r and only that direct edge orders them.
std::vector<RacePair> shb_race_pairs(const Trace& t);

}  // namespace racediag
