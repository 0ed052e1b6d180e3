#pragma once

#include <array>
#include <optional>
#include <vector>

#include "racediag/analyzers.hpp"
#include "racediag/relations.hpp"
#include "racediag/trace.hpp"

namespace racediag {

/// Events as nodes; edges in generating form (program-order successor,
/// release->acquire, unsynchronized write->read candidates). Candidates from
/// W2 are left out since HB edges already connect them to their read.
class DiagGraph {
 public:
  DiagGraph() = default;
  /// Without clocks, a clock table is derived from the HB-labeled edges,
  /// which must then point forward in position.
  DiagGraph(std::size_t n, std::vector<LabeledEdge> edges,
            std::optional<EventClocks> clocks = std::nullopt);

  std::size_t size() const { return n_; }
  const std::vector<LabeledEdge>& edges() const { return edges_; }
  /// Outgoing edges of the event at `pos`.
  std::vector<LabeledEdge> out(std::size_t pos) const;
  bool has_edge(std::size_t src, std::size_t dst, EdgeOrigin origin) const;

  /// Breadth-first search from `from` to `to` that never uses an edge in
  /// `omit`. Returns the node sequence of a simple path.
  std::optional<std::vector<std::size_t>> path(std::size_t from, std::size_t to,
                                               const std::vector<LabeledEdge>& omit = {}) const;

  /// Reachability over HB-labeled edges only, from the clock table.
  bool hb(std::size_t a, std::size_t b) const;

  /// The write->read edges can all hold in one execution: together with HB
  /// they form no cycle, and no read takes two of them.
  bool consistent(const std::vector<LabeledEdge>& w_edges) const;
  /// Same test for the write->read edges of one path, in path order (each
  /// read reaches the next edge's write). Linear in the number of edges.
  bool consistent_chain(const std::vector<LabeledEdge>& w_edges) const;

  /// Searches for a path from `from` to `to` whose write->read edges are
  /// consistent. Gives up after examining `budget` candidate edges (sets
  /// *exhausted).
  std::optional<std::vector<std::size_t>> consistent_path(std::size_t from, std::size_t to,
                                                          const std::vector<LabeledEdge>& omit,
                                                          std::size_t budget,
                                                          bool* exhausted = nullptr) const;

 private:
  std::vector<std::size_t> hb_path(std::size_t a, std::size_t b) const;
  EventClocks derive_clocks() const;

  std::size_t n_ = 0;
  std::vector<LabeledEdge> edges_;
  std::vector<std::size_t> offsets_;  // CSR over edges_ sorted by src
  std::vector<std::size_t> floor_;    // lowest position reachable from each node
  std::vector<std::size_t> in_offsets_;  // CSR by dst
  std::vector<std::size_t> in_edges_;    // indices into edges_
  std::vector<LabeledEdge> w_edges_;
  std::optional<EventClocks> clocks_;
};

DiagGraph build_graph(const Trace& t, const Phase1Result& phase1);

/// Throws std::invalid_argument when from == to or a node is out of range.
std::optional<std::vector<std::size_t>> path_exists(const DiagGraph& g, std::size_t from,
                                                    std::size_t to,
                                                    const std::vector<LabeledEdge>& omit = {});

struct Classification {
  RacePair pair;
  Verdict verdict = Verdict::Guaranteed;
  std::vector<std::size_t> witness;  // path for Maybe, empty otherwise
  bool lockset_fp = false;
  /// The consistent-path search ran out of budget; verdict left at Maybe.
  bool unresolved = false;
};

constexpr std::size_t kDefaultSearchBudget = 1u << 20;

/// Maybe iff some path connects the pair (either direction, without the
/// pair's own write->read edge) whose write->read edges are consistent.
Classification classify_pair(const DiagGraph& g, const RacePair& pair,
                             std::size_t budget = kDefaultSearchBudget);

struct VerdictCounts {
  std::size_t guaranteed = 0;
  std::size_t maybe = 0;

  std::size_t total() const { return guaranteed + maybe; }
};

struct DiagnoseOptions {
  AnalysisOptions analysis;
  unsigned jobs = 1;  // worker threads for classification
  std::size_t search_budget = kDefaultSearchBudget;
};

struct DiagnosisReport {
  std::vector<Classification> classifications;  // in race order
  std::array<VerdictCounts, 3> by_category{};   // indexed by RaceCategory
  VerdictCounts totals;
  std::size_t lockset_fp = 0;
  std::size_t unresolved = 0;

  std::size_t reads = 0;
  double wr_avg = 0;  // candidates kept per read
  std::size_t wr_max = 0;
  std::size_t edges = 0;
  std::size_t max_cw = 0;
  std::size_t max_cr = 0;

  double phase1_ms = 0;
  double phase2_ms = 0;

  /// Recounts totals and per-category verdicts from the classifications.
  void recount();
};

DiagnosisReport diagnose_all(const Trace& t, DiagnoseOptions opts = {});

}  // namespace racediag
