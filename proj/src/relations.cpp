#include "racediag/relations.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <string>

namespace racediag {

namespace {

std::vector<std::vector<std::size_t>> adjacency(std::size_t n, const std::vector<PosEdge>& edges) {
  std::vector<std::vector<std::size_t>> adj(n + 1);
  for (const auto& [a, b] : edges) adj[a].push_back(b);
  return adj;
}

// Walks predecessors inside the leftover set of a failed topological sort
// until a node repeats; every leftover node has a leftover predecessor.
CycleWitness extract_cycle(std::size_t n, const std::vector<PosEdge>& edges,
                           const std::vector<bool>& leftover) {
  std::vector<std::vector<std::size_t>> preds(n + 1);
  for (const auto& [a, b] : edges)
    if (leftover[a] && leftover[b]) preds[b].push_back(a);
  std::size_t start = 1;
  while (!leftover[start]) ++start;
  std::vector<std::size_t> walk;
  std::vector<std::size_t> seen_at(n + 1, SIZE_MAX);
  std::size_t v = start;
  while (seen_at[v] == SIZE_MAX) {
    seen_at[v] = walk.size();
    walk.push_back(v);
    v = *std::min_element(preds[v].begin(), preds[v].end());
  }
  CycleWitness cycle(walk.begin() + static_cast<std::ptrdiff_t>(seen_at[v]), walk.end());
  std::reverse(cycle.begin(), cycle.end());
  std::rotate(cycle.begin(), std::min_element(cycle.begin(), cycle.end()), cycle.end());
  return cycle;
}

}  // namespace

std::variant<PartialOrder, CycleWitness> PartialOrder::close(std::size_t n,
                                                             std::vector<PosEdge> edges) {
  if (n > kMaxEvents)
    throw std::length_error("closure table limited to " + std::to_string(kMaxEvents) +
                            " events, trace has " + std::to_string(n));
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  for (const auto& [a, b] : edges)
    if (a < 1 || b < 1 || a > n || b > n || a == b)
      throw std::invalid_argument("bad edge " + std::to_string(a) + "->" + std::to_string(b));

  const auto adj = adjacency(n, edges);
  std::vector<std::size_t> indeg(n + 1, 0);
  for (const auto& e : edges) ++indeg[e.second];
  std::vector<std::size_t> order;
  order.reserve(n);
  for (std::size_t v = 1; v <= n; ++v)
    if (indeg[v] == 0) order.push_back(v);
  for (std::size_t head = 0; head < order.size(); ++head)
    for (auto s : adj[order[head]])
      if (--indeg[s] == 0) order.push_back(s);
  if (order.size() != n) {
    std::vector<bool> leftover(n + 1, true);
    leftover[0] = false;
    for (auto v : order) leftover[v] = false;
    return extract_cycle(n, edges, leftover);
  }

  PartialOrder po;
  po.n_ = n;
  po.words_ = (n + 63) / 64;
  po.bits_.assign((n + 1) * po.words_, 0);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    std::uint64_t* row = po.bits_.data() + *it * po.words_;
    for (auto s : adj[*it]) {
      const std::uint64_t* srow = po.bits_.data() + s * po.words_;
      for (std::size_t w = 0; w < po.words_; ++w) row[w] |= srow[w];
      row[(s - 1) / 64] |= 1ull << ((s - 1) % 64);
    }
  }
  po.edges_ = std::move(edges);
  return po;
}

bool PartialOrder::ordered(std::size_t a, std::size_t b) const {
  if (a < 1 || b < 1 || a > n_ || b > n_) throw std::out_of_range("position outside order");
  return (bits_[a * words_ + (b - 1) / 64] >> ((b - 1) % 64)) & 1u;
}

bool PartialOrder::reaches_without(std::size_t a, std::size_t b, const PosEdge& removed) const {
  const auto adj = adjacency(n_, edges_);
  std::vector<bool> seen(n_ + 1, false);
  std::deque<std::size_t> queue{a};
  seen[a] = true;
  while (!queue.empty()) {
    const auto v = queue.front();
    queue.pop_front();
    for (auto s : adj[v]) {
      if (seen[s] || PosEdge{v, s} == removed) continue;
      if (s == b) return true;
      seen[s] = true;
      queue.push_back(s);
    }
  }
  return false;
}

std::vector<PosEdge> hb_edges(const Trace& t) {
  std::vector<PosEdge> edges;
  std::vector<std::size_t> last(t.thread_count(), 0);
  std::vector<std::vector<std::size_t>> acquires(t.lock_count());
  for (const auto& e : t.events()) {
    if (last[e.tid]) edges.emplace_back(last[e.tid], e.pos);
    last[e.tid] = e.pos;
    if (e.is_acquire()) acquires[e.target].push_back(e.pos);
  }
  // rel(y)@j < acq(y)@k: the first acquire of y after j by another thread.
  // Any later one has that acquire in between.
  for (const auto& e : t.events()) {
    if (!e.is_release()) continue;
    const auto& acq = acquires[e.target];
    for (auto it = std::upper_bound(acq.begin(), acq.end(), e.pos); it != acq.end(); ++it)
      if (t.at(*it).tid != e.tid) {
        edges.emplace_back(e.pos, *it);
        break;
      }
  }
  return edges;
}

std::vector<PosEdge> shb_edges(const Trace& t) {
  auto edges = hb_edges(t);
  std::vector<std::size_t> last_write(t.var_count(), 0);
  for (const auto& e : t.events()) {
    if (e.is_read() && last_write[e.target]) edges.emplace_back(last_write[e.target], e.pos);
    if (e.is_write()) last_write[e.target] = e.pos;
  }
  return edges;
}

namespace {

PartialOrder close_acyclic(std::size_t n, std::vector<PosEdge> edges) {
  auto r = PartialOrder::close(n, std::move(edges));
  if (auto* po = std::get_if<PartialOrder>(&r)) return std::move(*po);
  throw std::logic_error("forward-only edge set produced a cycle");
}

}  // namespace

PartialOrder hb_relation(const Trace& t) { return close_acyclic(t.size(), hb_edges(t)); }

PartialOrder shb_relation(const Trace& t) { return close_acyclic(t.size(), shb_edges(t)); }

std::vector<std::size_t> WrdCandidates::all() const {
  std::vector<std::size_t> out = w1;
  out.insert(out.end(), w2.begin(), w2.end());
  std::sort(out.begin(), out.end());
  return out;
}

WrdCandidates wrd_candidates(const Trace& t, const PartialOrder& hb, std::size_t read) {
  const Event& r = t.at(read);
  if (!r.is_read()) throw std::invalid_argument(t.describe(r) + " is not a read");
  std::vector<std::size_t> unsynced, before;
  for (const auto& e : t.events()) {
    if (!e.is_write() || e.target != r.target) continue;
    if (hb.ordered(e.pos, read)) before.push_back(e.pos);
    else if (hb.unordered(e.pos, read)) unsynced.push_back(e.pos);
  }
  auto maximal = [&](const std::vector<std::size_t>& set) {
    std::vector<std::size_t> out;
    for (auto w : set)
      if (std::none_of(set.begin(), set.end(), [&](std::size_t o) { return hb.ordered(w, o); }))
        out.push_back(w);
    return out;
  };
  return {read, maximal(unsynced), maximal(before)};
}

std::vector<WrdCandidates> all_wrd_candidates(const Trace& t, const PartialOrder& hb) {
  std::vector<WrdCandidates> out;
  for (const auto& e : t.events())
    if (e.is_read()) out.push_back(wrd_candidates(t, hb, e.pos));
  return out;
}

WrdCandidates prune_candidates(const WrdCandidates& c, const PartialOrder& hb) {
  WrdCandidates out{c.read, c.w1, {}};
  for (auto g : c.w2)
    if (std::none_of(c.w1.begin(), c.w1.end(), [&](std::size_t f) { return hb.ordered(g, f); }))
      out.w2.push_back(g);
  return out;
}

bool has_initial_write(const Trace& t, const PartialOrder& hb, std::size_t read) {
  return !wrd_candidates(t, hb, read).w2.empty();
}

std::variant<PartialOrder, CycleWitness> strong_shb(const Trace& t) {
  const auto hb = hb_relation(t);
  auto edges = hb.generating_edges();
  for (const auto& c : all_wrd_candidates(t, hb))
    for (auto w : c.all()) edges.emplace_back(w, c.read);
  return PartialOrder::close(t.size(), std::move(edges));
}

CandidateProductTooLarge::CandidateProductTooLarge(std::uint64_t product, std::uint64_t cap)
    : std::runtime_error("candidate product " +
                         (product == UINT64_MAX ? std::string("overflows 64 bits")
                                                : std::to_string(product)) +
                         " exceeds cap " + std::to_string(cap)),
      product_(product),
      cap_(cap) {}

SomeShbSummary for_each_someshb(const Trace& t,
                                const std::function<void(const SomeShbInstance&)>& visit,
                                std::uint64_t cap) {
  const auto hb = hb_relation(t);
  struct Option {
    PosEdge edge;
    std::uint64_t multiplicity;
  };
  std::vector<std::vector<Option>> options;
  SomeShbSummary summary;
  summary.combinations = 1;
  for (const auto& c : all_wrd_candidates(t, hb)) {
    // A read without any candidate leaves the order unconstrained.
    if (c.size() == 0) continue;
    std::vector<Option> opts;
    for (auto w : c.w1) opts.push_back({{w, c.read}, 1});
    if (!c.w2.empty()) opts.push_back({{c.w2.front(), c.read}, c.w2.size()});
    const std::uint64_t k = c.size();
    summary.combinations =
        summary.combinations > UINT64_MAX / k ? UINT64_MAX : summary.combinations * k;
    options.push_back(std::move(opts));
  }
  if (summary.combinations > cap) throw CandidateProductTooLarge(summary.combinations, cap);

  std::vector<std::size_t> odometer(options.size(), 0);
  while (true) {
    SomeShbInstance inst;
    auto edges = hb.generating_edges();
    for (std::size_t r = 0; r < options.size(); ++r) {
      const auto& o = options[r][odometer[r]];
      inst.choice.push_back(o.edge);
      inst.multiplicity *= o.multiplicity;
      edges.push_back(o.edge);
    }
    auto closed = PartialOrder::close(t.size(), std::move(edges));
    if (auto* po = std::get_if<PartialOrder>(&closed)) {
      inst.order = std::move(*po);
      summary.acyclic += inst.multiplicity;
      ++summary.instances;
      visit(inst);
    }
    std::size_t r = 0;
    while (r < odometer.size() && ++odometer[r] == options[r].size()) odometer[r++] = 0;
    if (r == odometer.size()) break;
  }
  return summary;
}

SomeShbEnumeration enumerate_someshb(const Trace& t, std::uint64_t cap) {
  SomeShbEnumeration out;
  out.summary =
      for_each_someshb(t, [&](const SomeShbInstance& i) { out.instances.push_back(i); }, cap);
  return out;
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Guaranteed: return "guaranteed";
    case Verdict::Maybe: return "maybe";
    case Verdict::NotAnHbRace: return "not-an-hb-race";
  }
  return "?";
}

SomeShbOracle::SomeShbOracle(const Trace& t, std::uint64_t cap)
    : hb_(hb_relation(t)), enumeration_(enumerate_someshb(t, cap)) {}

Verdict SomeShbOracle::classify(std::size_t a, std::size_t b) const {
  if (!hb_.unordered(a, b)) return Verdict::NotAnHbRace;
  for (const auto& inst : enumeration_.instances) {
    if (!inst.order.ordered(a, b) && !inst.order.ordered(b, a)) continue;
    const auto direct = std::find_if(inst.choice.begin(), inst.choice.end(), [&](const PosEdge& e) {
      return e == PosEdge{a, b} || e == PosEdge{b, a};
    });
    if (direct == inst.choice.end()) return Verdict::Maybe;
    if (inst.order.reaches_without(a, b, *direct) || inst.order.reaches_without(b, a, *direct))
      return Verdict::Maybe;
  }
  return Verdict::Guaranteed;
}

Verdict oracle_classify(const Trace& t, const RacePair& pair, std::uint64_t cap) {
  return SomeShbOracle(t, cap).classify(pair);
}

std::vector<RacePair> hb_race_pairs(const Trace& t) {
  const auto hb = hb_relation(t);
  std::vector<RacePair> out;
  for (const auto& a : t.events())
    for (std::size_t b = a.pos + 1; b <= t.size(); ++b)
      if (conflicting(a, t.at(b)) && hb.unordered(a.pos, b)) out.push_back(make_race_pair(t, a.pos, b));
  return out;
}

std::vector<RacePair> shb_race_pairs(const Trace& t) {
  const auto shb = shb_relation(t);
  std::vector<std::size_t> nearest(t.size() + 1, 0);
  std::vector<std::size_t> last_write(t.var_count(), 0);
  for (const auto& e : t.events()) {
    if (e.is_read()) nearest[e.pos] = last_write[e.target];
    if (e.is_write()) last_write[e.target] = e.pos;
  }
  std::vector<RacePair> out;
  for (const auto& a : t.events())
    for (std::size_t b = a.pos + 1; b <= t.size(); ++b) {
      if (!conflicting(a, t.at(b))) continue;
      const bool direct = t.at(b).is_read() && nearest[b] == a.pos && t.at(b).tid != a.tid;
      if (shb.unordered(a.pos, b) || (direct && !shb.reaches_without(a.pos, b, {a.pos, b})))
        out.push_back(make_race_pair(t, a.pos, b));
    }
  return out;
}

}  // namespace racediag
