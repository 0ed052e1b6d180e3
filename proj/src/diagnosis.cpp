#include "racediag/diagnosis.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <deque>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_map>

namespace racediag {

DiagGraph::DiagGraph(std::size_t n, std::vector<LabeledEdge> edges, std::optional<EventClocks> clocks)
    : n_(n), edges_(std::move(edges)), clocks_(std::move(clocks)) {
  if (clocks_ && clocks_->size() != n_) throw std::invalid_argument("clock table size mismatch");
  for (const auto& e : edges_)
    if (e.src < 1 || e.dst < 1 || e.src > n_ || e.dst > n_)
      throw std::invalid_argument("edge outside graph");
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
  offsets_.assign(n_ + 2, 0);
  for (const auto& e : edges_) ++offsets_[e.src + 1];
  for (std::size_t p = 1; p < offsets_.size(); ++p) offsets_[p] += offsets_[p - 1];

  // back[p]: smallest target of a backward edge whose source is >= p. Every
  // path from p stays at or above the fixpoint of p -> back[p].
  constexpr auto kNone = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> back(n_ + 2, kNone);
  for (const auto& e : edges_)
    if (e.dst < e.src) back[e.src] = std::min(back[e.src], e.dst);
  for (std::size_t p = n_; p >= 1; --p) back[p] = std::min(back[p], back[p + 1]);
  floor_.assign(n_ + 1, 0);
  for (std::size_t p = 1; p <= n_; ++p) floor_[p] = back[p] < p ? floor_[back[p]] : p;
  for (const auto& e : edges_)
    if (!e.is_hb()) w_edges_.push_back(e);
  in_offsets_.assign(n_ + 2, 0);
  for (const auto& e : edges_) ++in_offsets_[e.dst + 1];
  for (std::size_t p = 1; p < in_offsets_.size(); ++p) in_offsets_[p] += in_offsets_[p - 1];
  in_edges_.resize(edges_.size());
  {
    auto fill = in_offsets_;
    for (std::size_t k = 0; k < edges_.size(); ++k) in_edges_[fill[edges_[k].dst]++] = k;
  }
  if (!clocks_) clocks_ = derive_clocks();
}

// Threads are the chains of program-order edges; stamps count positions
// along a chain, joined over incoming HB edges in position order.
EventClocks DiagGraph::derive_clocks() const {
  EventClocks c;
  c.tid.assign(n_, 0);
  std::vector<std::size_t> index(n_ + 1, 0), po_pred(n_ + 1, 0);
  std::vector<std::vector<std::size_t>> preds(n_ + 1);
  for (const auto& e : edges_) {
    if (!e.is_hb()) continue;
    if (e.src >= e.dst) throw std::invalid_argument("HB edge against trace order");
    preds[e.dst].push_back(e.src);
    if (e.origin == EdgeOrigin::ProgramOrder) po_pred[e.dst] = e.src;
  }
  for (std::size_t v = 1; v <= n_; ++v) {
    if (po_pred[v]) {
      c.tid[v - 1] = c.tid[po_pred[v] - 1];
      index[v] = index[po_pred[v]] + 1;
    } else {
      c.tid[v - 1] = static_cast<ThreadIndex>(c.width++);
      index[v] = 1;
    }
  }
  c.table.assign(n_ * c.width, 0);
  for (std::size_t v = 1; v <= n_; ++v) {
    Stamp* row = c.table.data() + (v - 1) * c.width;
    for (auto u : preds[v]) {
      const Stamp* from = c.row(u);
      for (std::size_t j = 0; j < c.width; ++j) row[j] = std::max(row[j], from[j]);
    }
    row[c.tid[v - 1]] = static_cast<Stamp>(index[v]);
  }
  return c;
}

std::vector<LabeledEdge> DiagGraph::out(std::size_t pos) const {
  if (pos < 1 || pos > n_) throw std::out_of_range("node outside graph");
  return {edges_.begin() + static_cast<std::ptrdiff_t>(offsets_[pos]),
          edges_.begin() + static_cast<std::ptrdiff_t>(offsets_[pos + 1])};
}

bool DiagGraph::has_edge(std::size_t src, std::size_t dst, EdgeOrigin origin) const {
  if (src < 1 || src > n_) return false;
  return std::binary_search(edges_.begin() + static_cast<std::ptrdiff_t>(offsets_[src]),
                            edges_.begin() + static_cast<std::ptrdiff_t>(offsets_[src + 1]),
                            LabeledEdge{src, dst, origin});
}

namespace {

// Per-thread BFS scratch reused across queries; `seen[v] == generation`
// marks v visited in the current search.
struct Scratch {
  std::vector<std::uint32_t> seen;
  std::vector<std::size_t> parent;
  std::uint32_t generation = 0;

  void reset(std::size_t n) {
    if (seen.size() != n + 1 || generation == std::numeric_limits<std::uint32_t>::max()) {
      seen.assign(n + 1, 0);
      parent.assign(n + 1, 0);
      generation = 0;
    }
    ++generation;
  }
};

}  // namespace

std::optional<std::vector<std::size_t>> DiagGraph::path(std::size_t from, std::size_t to,
                                                        const std::vector<LabeledEdge>& omit) const {
  if (from < 1 || to < 1 || from > n_ || to > n_) throw std::invalid_argument("node outside graph");
  if (from == to) throw std::invalid_argument("path query from a node to itself");
  thread_local Scratch s;
  s.reset(n_);
  std::deque<std::size_t> queue{from};
  s.seen[from] = s.generation;
  while (!queue.empty()) {
    const auto v = queue.front();
    queue.pop_front();
    for (std::size_t k = offsets_[v]; k < offsets_[v + 1]; ++k) {
      const auto& e = edges_[k];
      const auto w = e.dst;
      if (s.seen[w] == s.generation) continue;
      if (std::find(omit.begin(), omit.end(), e) != omit.end()) continue;
      s.seen[w] = s.generation;
      s.parent[w] = v;
      if (w == to) {
        std::vector<std::size_t> nodes{to};
        for (auto u = to; u != from;) nodes.push_back(u = s.parent[u]);
        std::reverse(nodes.begin(), nodes.end());
        return nodes;
      }
      if (floor_[w] > to) continue;  // cannot get back down to `to`
      queue.push_back(w);
    }
  }
  return std::nullopt;
}

std::vector<std::size_t> DiagGraph::hb_path(std::size_t a, std::size_t b) const {
  if (a == b) return {a};
  // HB edges only point forward, so nothing beyond b is useful.
  std::vector<std::size_t> parent(b + 1, 0);
  std::deque<std::size_t> queue{a};
  parent[a] = a;
  while (!queue.empty()) {
    const auto v = queue.front();
    queue.pop_front();
    for (std::size_t k = offsets_[v]; k < offsets_[v + 1]; ++k) {
      const auto& e = edges_[k];
      if (!e.is_hb() || e.dst > b || parent[e.dst]) continue;
      parent[e.dst] = v;
      if (e.dst == b) {
        std::vector<std::size_t> nodes{b};
        for (auto u = b; u != a;) nodes.push_back(u = parent[u]);
        std::reverse(nodes.begin(), nodes.end());
        return nodes;
      }
      queue.push_back(e.dst);
    }
  }
  return {};
}

bool DiagGraph::hb(std::size_t a, std::size_t b) const {
  if (a < 1 || b < 1 || a > n_ || b > n_) throw std::invalid_argument("node outside graph");
  return a != b && clocks_->hb(a, b);
}

bool DiagGraph::consistent(const std::vector<LabeledEdge>& w) const {
  std::vector<std::size_t> reads;
  for (const auto& e : w) reads.push_back(e.dst);
  std::sort(reads.begin(), reads.end());
  if (std::adjacent_find(reads.begin(), reads.end()) != reads.end()) return false;
  // Edge i leads to edge j when read i reaches write j through HB; a cycle
  // in that relation is a cycle of HB plus the chosen edges.
  const std::size_t m = w.size();
  std::vector<std::vector<std::size_t>> next(m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      if (w[i].dst == w[j].src || hb(w[i].dst, w[j].src)) next[i].push_back(j);
  std::vector<int> colour(m, 0);
  std::function<bool(std::size_t)> cyclic = [&](std::size_t i) {
    colour[i] = 1;
    for (auto j : next[i])
      if (colour[j] == 1 || (colour[j] == 0 && cyclic(j))) return true;
    colour[i] = 2;
    return false;
  };
  for (std::size_t i = 0; i < m; ++i)
    if (colour[i] == 0 && cyclic(i)) return false;
  return true;
}

bool DiagGraph::consistent_chain(const std::vector<LabeledEdge>& w) const {
  const auto& clk = *clocks_;
  std::vector<Stamp> joined(clk.width, 0);
  for (const auto& e : w) {
    const Stamp* row = clk.row(e.src);
    for (std::size_t j = 0; j < clk.width; ++j) joined[j] = std::max(joined[j], row[j]);
    const auto rt = clk.tid[e.dst - 1];
    if (clk.row(e.dst)[rt] <= joined[rt]) return false;
  }
  return true;
}

std::optional<std::vector<std::size_t>> DiagGraph::consistent_path(
    std::size_t from, std::size_t to, const std::vector<LabeledEdge>& omit, std::size_t budget,
    bool* exhausted) const {
  if (from < 1 || to < 1 || from > n_ || to > n_) throw std::invalid_argument("node outside graph");
  if (from == to) throw std::invalid_argument("path query from a node to itself");
  if (exhausted) *exhausted = false;
  const auto& clk = *clocks_;
  const std::size_t width = clk.width;

  // Only edges on some from -> to path in the graph can help.
  auto sweep = [&](std::size_t start, bool forward) {
    std::vector<char> seen(n_ + 1, 0);
    std::vector<std::size_t> stack{start};
    seen[start] = 1;
    while (!stack.empty()) {
      const auto v = stack.back();
      stack.pop_back();
      const auto lo = forward ? offsets_[v] : in_offsets_[v];
      const auto hi = forward ? offsets_[v + 1] : in_offsets_[v + 1];
      for (auto k = lo; k < hi; ++k) {
        const auto& e = forward ? edges_[k] : edges_[in_edges_[k]];
        const auto u = forward ? e.dst : e.src;
        if (seen[u] || std::find(omit.begin(), omit.end(), e) != omit.end()) continue;
        seen[u] = 1;
        stack.push_back(u);
      }
    }
    return seen;
  };
  const auto ahead = sweep(from, true);
  const auto behind = sweep(to, false);
  // Grouped by the writer's thread, in position order: the writes a point
  // reaches form a suffix of each group.
  std::vector<std::vector<std::size_t>> usable(width);
  for (std::size_t k = 0; k < w_edges_.size(); ++k) {
    const auto& e = w_edges_[k];
    if (ahead[e.src] && behind[e.dst] && std::find(omit.begin(), omit.end(), e) == omit.end())
      usable[clk.tid[e.src - 1]].push_back(k);
  }

  // A path is a chain from -> w1 => r1 -> w2 => ... => rm -> to where "->" is
  // HB (or equality) and "=>" a write->read edge. The chosen edges close a
  // cycle with HB exactly when some r_i reaches a write w_j with j <= i, so
  // it suffices to keep the join of the chosen writes' clocks and require
  // each new read to lie outside it. Labels (point, join) are expanded
  // breadth first; a label is dropped when another at the same point has a
  // pointwise smaller join.
  struct Label {
    std::size_t point;
    std::vector<Stamp> joined;
    std::size_t parent;  // label index, or npos for the start
    std::size_t edge;    // index into w_edges_ that led here
    bool dead = false;
  };
  constexpr auto npos = std::numeric_limits<std::size_t>::max();
  std::vector<Label> labels;
  std::unordered_map<std::size_t, std::vector<std::size_t>> at_point;
  std::deque<std::size_t> queue;
  auto leq = [](const std::vector<Stamp>& a, const std::vector<Stamp>& b) {
    for (std::size_t j = 0; j < a.size(); ++j)
      if (a[j] > b[j]) return false;
    return true;
  };
  auto offer = [&](std::size_t point, std::vector<Stamp> joined, std::size_t parent, std::size_t edge) {
    auto& ids = at_point[point];
    for (auto id : ids)
      if (!labels[id].dead && leq(labels[id].joined, joined)) return;
    for (auto id : ids)
      if (!labels[id].dead && leq(joined, labels[id].joined)) labels[id].dead = true;
    ids.push_back(labels.size());
    queue.push_back(labels.size());
    labels.push_back({point, std::move(joined), parent, edge});
  };

  offer(from, std::vector<Stamp>(width, 0), npos, npos);
  std::size_t work = 0;
  std::optional<std::size_t> goal;
  while (!queue.empty() && !goal) {
    const auto id = queue.front();
    queue.pop_front();
    if (labels[id].dead) continue;
    const auto point = labels[id].point;
    const auto joined = labels[id].joined;  // offer() may grow labels
    if (point == to || hb(point, to)) {
      goal = id;
      break;
    }
    for (const auto& group : usable) {
      auto k_it = std::partition_point(group.begin(), group.end(), [&](std::size_t k) {
        const auto w = w_edges_[k].src;
        return w != point && !hb(point, w);
      });
      for (; k_it != group.end(); ++k_it) {
      const auto k = *k_it;
      if (++work > budget) {
        if (exhausted) *exhausted = true;
        return std::nullopt;
      }
      const auto& e = w_edges_[k];
      const auto rt = clk.tid[e.dst - 1];
      const Stamp* w = clk.row(e.src);
      if (clk.row(e.dst)[rt] <= std::max(joined[rt], w[rt])) continue;
      std::vector<Stamp> next(width);
      for (std::size_t j = 0; j < width; ++j) next[j] = std::max(joined[j], w[j]);
      offer(e.dst, std::move(next), id, k);
      }
    }
  }
  if (!goal) return std::nullopt;
  std::vector<std::size_t> chosen;
  for (auto id = *goal; labels[id].parent != npos; id = labels[id].parent) chosen.push_back(labels[id].edge);
  std::reverse(chosen.begin(), chosen.end());

  // In a DAG every walk is simple, so joining the HB segments is enough.
  std::vector<std::size_t> nodes{from};
  auto extend = [&](std::size_t a, std::size_t b) {
    const auto seg = hb_path(a, b);
    nodes.insert(nodes.end(), seg.begin() + 1, seg.end());
  };
  std::size_t point = from;
  for (auto k : chosen) {
    const auto& e = w_edges_[k];
    extend(point, e.src);
    nodes.push_back(e.dst);
    point = e.dst;
  }
  extend(point, to);
  return nodes;
}

DiagGraph build_graph(const Trace& t, const Phase1Result& phase1) {
  std::optional<EventClocks> clocks;
  if (phase1.clocks.size() == t.size()) clocks = phase1.clocks;
  return DiagGraph(t.size(), phase1.edges, std::move(clocks));
}

namespace {

// Write->read edges a path uses; an HB edge is preferred when both exist.
std::vector<LabeledEdge> w_edges_on(const DiagGraph& g, const std::vector<std::size_t>& path) {
  std::vector<LabeledEdge> out;
  for (std::size_t k = 0; k + 1 < path.size(); ++k) {
    const auto a = path[k], b = path[k + 1];
    if (g.has_edge(a, b, EdgeOrigin::ProgramOrder) || g.has_edge(a, b, EdgeOrigin::ReleaseAcquire))
      continue;
    out.push_back({a, b, EdgeOrigin::WriteRead});
  }
  return out;
}

}  // namespace

std::optional<std::vector<std::size_t>> path_exists(const DiagGraph& g, std::size_t from,
                                                    std::size_t to,
                                                    const std::vector<LabeledEdge>& omit) {
  return g.path(from, to, omit);
}

Classification classify_pair(const DiagGraph& g, const RacePair& pair, std::size_t budget) {
  Classification c;
  c.pair = pair;
  std::vector<LabeledEdge> omit;
  if (pair.category == RaceCategory::WriteRead) {
    if (g.has_edge(pair.first, pair.second, EdgeOrigin::WriteRead))
      omit.push_back({pair.first, pair.second, EdgeOrigin::WriteRead});
  } else if (pair.category == RaceCategory::ReadWrite) {
    if (g.has_edge(pair.second, pair.first, EdgeOrigin::WriteRead))
      omit.push_back({pair.second, pair.first, EdgeOrigin::WriteRead});
  }
  std::vector<std::size_t> fallback;
  for (const auto& [a, b] : {std::pair(pair.first, pair.second), std::pair(pair.second, pair.first)}) {
    auto p = g.path(a, b, omit);
    if (!p) continue;
    if (g.consistent_chain(w_edges_on(g, *p))) {
      c.verdict = Verdict::Maybe;
      c.witness = std::move(*p);
      return c;
    }
    bool exhausted = false;
    if (auto q = g.consistent_path(a, b, omit, budget, &exhausted)) {
      c.verdict = Verdict::Maybe;
      c.witness = std::move(*q);
      return c;
    }
    if (exhausted) {
      c.unresolved = true;
      fallback = std::move(*p);
    }
  }
  if (c.unresolved) {
    c.verdict = Verdict::Maybe;
    c.witness = std::move(fallback);
  }
  return c;
}

void DiagnosisReport::recount() {
  by_category = {};
  totals = {};
  lockset_fp = 0;
  unresolved = 0;
  for (const auto& c : classifications) {
    if (c.unresolved) ++unresolved;
    auto& slot = by_category[static_cast<std::size_t>(c.pair.category)];
    if (c.verdict == Verdict::Guaranteed) {
      ++slot.guaranteed;
      ++totals.guaranteed;
    } else {
      ++slot.maybe;
      ++totals.maybe;
    }
    if (c.lockset_fp) ++lockset_fp;
  }
}

DiagnosisReport diagnose_all(const Trace& t, DiagnoseOptions opts) {
  using Clock = std::chrono::steady_clock;
  DiagnosisReport report;

  const auto t0 = Clock::now();
  const auto phase1 = run_sshb_phase1(t, opts.analysis);
  const auto t1 = Clock::now();
  const auto graph = build_graph(t, phase1);

  report.classifications.resize(phase1.races.size());
  const unsigned jobs = std::max(1u, std::min<unsigned>(opts.jobs, phase1.races.size()));
  if (jobs <= 1) {
    for (std::size_t k = 0; k < phase1.races.size(); ++k)
      report.classifications[k] = classify_pair(graph, phase1.races[k], opts.search_budget);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    for (unsigned j = 0; j < jobs; ++j)
      workers.emplace_back([&] {
        for (std::size_t k; (k = next++) < phase1.races.size();)
          report.classifications[k] = classify_pair(graph, phase1.races[k], opts.search_budget);
      });
    for (auto& w : workers) w.join();
  }
  const auto t2 = Clock::now();

  report.recount();
  report.reads = phase1.candidates.size();
  std::size_t kept = 0;
  for (const auto& c : phase1.candidates) {
    kept += c.kept();
    report.wr_max = std::max(report.wr_max, c.kept());
  }
  report.wr_avg = report.reads ? static_cast<double>(kept) / report.reads : 0.0;
  report.edges = graph.edges().size();
  report.max_cw = phase1.state.max_cw;
  report.max_cr = phase1.state.max_cr;
  report.phase1_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  report.phase2_ms = std::chrono::duration<double, std::milli>(t2 - t1).count();
  return report;
}

}  // namespace racediag
