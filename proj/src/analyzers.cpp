#include "racediag/analyzers.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

namespace racediag {

std::string_view to_string(RaceCategory c) {
  switch (c) {
    case RaceCategory::WriteWrite: return "write-write";
    case RaceCategory::WriteRead: return "write-read";
    case RaceCategory::ReadWrite: return "read-write";
  }
  return "?";
}

RacePair make_race_pair(const Trace& t, std::size_t a, std::size_t b) {
  if (a == b) throw std::invalid_argument("race pair needs two distinct events");
  if (a > b) std::swap(a, b);
  const Event& first = t.at(a);
  const Event& second = t.at(b);
  if (!conflicting(first, second))
    throw std::invalid_argument("events " + t.describe(first) + " and " + t.describe(second) +
                                " do not conflict");
  RacePair p;
  p.first = a;
  p.second = b;
  p.var = first.target;
  if (first.is_read()) p.category = RaceCategory::ReadWrite;
  else if (second.is_read()) p.category = RaceCategory::WriteRead;
  else p.category = RaceCategory::WriteWrite;
  return p;
}

std::pair<std::string, std::string> loc_pair(const Trace& t, const RacePair& p) {
  auto a = t.location(t.at(p.first));
  auto b = t.location(t.at(p.second));
  if (b < a) std::swap(a, b);
  return {std::move(a), std::move(b)};
}

std::vector<RacePair> dedup_by_location(const Trace& t, const std::vector<RacePair>& races) {
  std::set<std::pair<std::string, std::string>> seen;
  std::vector<RacePair> out;
  for (const auto& p : races)
    if (seen.insert(loc_pair(t, p)).second) out.push_back(p);
  return out;
}

std::size_t FastTrackReport::racy_events() const {
  std::set<std::size_t> events;
  for (const auto& r : races) events.insert(r.pos);
  return events.size();
}

FastTrackReport run_fasttrack(const Trace& t) {
  const std::size_t k = t.thread_count();
  std::vector<VectorClock> th;
  th.reserve(k);
  for (ThreadIndex i = 0; i < k; ++i) th.push_back(VectorClock::for_thread(k, i));
  std::vector<VectorClock> locks(t.lock_count(), VectorClock(k));
  std::vector<EpochRef> last_write(t.var_count());  // stamp 0: no write yet
  std::vector<std::vector<EpochRef>> reads(t.var_count());

  FastTrackReport report;
  auto record = [&](const Event& e, std::size_t partner) {
    report.races.push_back(
        {e.pos, partner, make_race_pair(t, partner, e.pos).category, th[e.tid]});
  };

  for (const auto& e : t.events()) {
    const ThreadIndex i = e.tid;
    auto& clock = th[i];
    switch (e.op) {
      case Op::Acquire:
        clock.join_with(locks[e.target]);
        break;
      case Op::Release:
        locks[e.target] = clock;
        clock.increment(i);
        break;
      case Op::Write: {
        for (const auto& r : reads[e.target])
          if (epoch_concurrent(r.epoch, clock)) record(e, r.pos);
        const auto& lw = last_write[e.target];
        if (lw.epoch.stamp > 0 && epoch_concurrent(lw.epoch, clock)) record(e, lw.pos);
        last_write[e.target] = {{i, clock[i]}, e.pos};
        clock.increment(i);
        break;
      }
      case Op::Read: {
        const auto& lw = last_write[e.target];
        if (lw.epoch.stamp > 0 && epoch_concurrent(lw.epoch, clock)) record(e, lw.pos);
        auto& rs = reads[e.target];
        std::vector<EpochRef> next{{{i, clock[i]}, e.pos}};
        for (const auto& r : rs)
          if (r.epoch.tid != i && epoch_concurrent(r.epoch, clock)) next.push_back(r);
        rs = std::move(next);
        clock.increment(i);
        break;
      }
    }
  }
  return report;
}

namespace {

struct AccessRecord {
  Stamp stamp = 0;
  std::size_t pos = 0;
  ThreadIndex tid = 0;
  std::size_t row = 0;  // index into the clock table, when recorded
};

struct EngineConfig {
  PairMode mode = PairMode::Complete;
  bool join_last_write = false;  // SHB
  bool record_edges = false;     // SSHB
  bool resolve_candidates = false;
};

// Single pass over a trace shared by the HB, SHB and SSHB analyses.
class StreamingEngine {
 public:
  StreamingEngine(const Trace& t, EngineConfig cfg) : trace_(t), cfg_(cfg), k_(t.thread_count()) {
    state_.threads.reserve(k_);
    for (ThreadIndex i = 0; i < k_; ++i) state_.threads.push_back(VectorClock::for_thread(k_, i));
    state_.locks.assign(t.lock_count(), VectorClock(k_));
    state_.cw.resize(t.var_count());
    state_.cr.resize(t.var_count());
    writes_.assign(t.var_count(), std::vector<std::vector<AccessRecord>>(k_));
    reads_.assign(t.var_count(), std::vector<std::vector<AccessRecord>>(k_));
    last_release_.assign(t.lock_count(), 0);
    last_event_.assign(k_, 0);
    if (cfg_.join_last_write) {
      last_write_clock_.assign(t.var_count(), VectorClock(k_));
      last_write_.assign(t.var_count(), EpochRef{});
    }
  }

  void run() {
    if (cfg_.resolve_candidates) {
      clocks_.width = k_;
      clocks_.tid.reserve(trace_.size());
      clocks_.table.reserve(trace_.size() * k_);
    }
    for (const auto& e : trace_.events()) {
      if (cfg_.record_edges) {
        if (last_event_[e.tid]) edges_.push_back({last_event_[e.tid], e.pos, EdgeOrigin::ProgramOrder});
        last_event_[e.tid] = e.pos;
      }
      switch (e.op) {
        case Op::Acquire: on_acquire(e); break;
        case Op::Release: on_release(e); break;
        case Op::Write: on_write(e); break;
        case Op::Read: on_read(e); break;
      }
    }
    if (cfg_.resolve_candidates && clocks_.size() != trace_.size())
      throw std::logic_error("clock table out of step with the trace");
    if (cfg_.resolve_candidates) resolve_candidates();
    std::sort(races_.begin(), races_.end());
  }

  std::vector<RacePair> take_races() { return std::move(races_); }
  std::vector<LabeledEdge> take_edges() { return std::move(edges_); }
  std::vector<ReadCandidates> take_candidates() { return std::move(candidates_); }
  AnalyzerState take_state() { return std::move(state_); }
  EventClocks take_clocks() { return std::move(clocks_); }

 private:
  void add_race(std::size_t a, std::size_t b) { races_.push_back(make_race_pair(trace_, a, b)); }

  // Every access of thread j in `list` whose stamp exceeds `known` is
  // unordered with the current event.
  void pair_with_suffix(const std::vector<AccessRecord>& list, Stamp known, std::size_t pos) {
    auto it = std::partition_point(list.begin(), list.end(),
                                   [&](const AccessRecord& r) { return r.stamp <= known; });
    for (; it != list.end(); ++it) add_race(it->pos, pos);
  }

  void pair_with_history(const std::vector<std::vector<AccessRecord>>& per_thread,
                         const VectorClock& clock, ThreadIndex self, std::size_t pos) {
    for (ThreadIndex j = 0; j < k_; ++j)
      if (j != self) pair_with_suffix(per_thread[j], clock[j], pos);
  }

  static void keep_concurrent(std::vector<EpochRef>& set, const EpochRef& cur,
                              const VectorClock& clock) {
    std::vector<EpochRef> next{cur};
    for (const auto& x : set)
      if (epoch_concurrent(x.epoch, clock)) next.push_back(x);
    set = std::move(next);
  }

  // Rows are indexed by position, so the returned row is pos-1.
  std::size_t record_clock(const Event& e, const VectorClock& clock) {
    if (!cfg_.resolve_candidates) return 0;
    clocks_.tid.push_back(e.tid);
    clocks_.table.insert(clocks_.table.end(), clock.stamps().begin(), clock.stamps().end());
    return e.pos - 1;
  }

  const Stamp* row(std::size_t r) const { return clocks_.table.data() + r * k_; }

  void on_acquire(const Event& e) {
    state_.threads[e.tid].join_with(state_.locks[e.target]);
    record_clock(e, state_.threads[e.tid]);
    if (cfg_.record_edges && last_release_[e.target])
      edges_.push_back({last_release_[e.target], e.pos, EdgeOrigin::ReleaseAcquire});
  }

  void on_release(const Event& e) {
    auto& clock = state_.threads[e.tid];
    record_clock(e, clock);
    state_.locks[e.target] = clock;
    last_release_[e.target] = e.pos;
    clock.increment(e.tid);
  }

  void on_write(const Event& e) {
    const ThreadIndex i = e.tid;
    const VarIndex x = e.target;
    auto& clock = state_.threads[i];
    const EpochRef cur{{i, clock[i]}, e.pos};

    if (cfg_.mode == PairMode::Frontier) {
      for (const auto& w : state_.cw[x])
        if (epoch_concurrent(w.epoch, clock)) add_race(w.pos, e.pos);
    } else {
      pair_with_history(writes_[x], clock, i, e.pos);
    }
    keep_concurrent(state_.cw[x], cur, clock);
    state_.max_cw = std::max(state_.max_cw, state_.cw[x].size());

    if (cfg_.mode == PairMode::Frontier) {
      for (const auto& r : state_.cr[x]) {
        if (!epoch_concurrent(r.epoch, clock)) continue;
        if (cfg_.record_edges) edges_.push_back({e.pos, r.pos, EdgeOrigin::WriteRead});
        add_race(r.pos, e.pos);
      }
    } else {
      pair_with_history(reads_[x], clock, i, e.pos);
    }

    if (cfg_.join_last_write) {
      last_write_clock_[x] = clock;
      last_write_[x] = cur;
    }
    writes_[x][i].push_back({cur.epoch.stamp, e.pos, i, record_clock(e, clock)});
    clock.increment(i);
  }

  void on_read(const Event& e) {
    const ThreadIndex i = e.tid;
    const VarIndex x = e.target;
    auto& clock = state_.threads[i];
    const EpochRef cur{{i, clock[i]}, e.pos};

    if (cfg_.mode == PairMode::Frontier) {
      for (const auto& w : state_.cw[x]) {
        if (!epoch_concurrent(w.epoch, clock)) continue;
        if (cfg_.record_edges) edges_.push_back({w.pos, e.pos, EdgeOrigin::WriteRead});
        add_race(w.pos, e.pos);
      }
      if (cfg_.join_last_write) clock.join_with(last_write_clock_[x]);
    } else if (cfg_.join_last_write) {
      // The last write races with this read when only the dependency itself
      // orders them; every other write is checked against the joined clock.
      const EpochRef lw = last_write_[x];
      const bool lw_races = lw.pos && lw.epoch.tid != i && epoch_concurrent(lw.epoch, clock);
      clock.join_with(last_write_clock_[x]);
      pair_with_history(writes_[x], clock, i, e.pos);
      if (lw_races) add_race(lw.pos, e.pos);
    } else {
      pair_with_history(writes_[x], clock, i, e.pos);
    }

    keep_concurrent(state_.cr[x], cur, clock);
    state_.max_cr = std::max(state_.max_cr, state_.cr[x].size());
    reads_[x][i].push_back({cur.epoch.stamp, e.pos, i, record_clock(e, clock)});
    clock.increment(i);
  }

  // Keeps the candidates that are not ordered before another candidate.
  std::vector<const AccessRecord*> maxima(const std::vector<const AccessRecord*>& c) const {
    std::vector<const AccessRecord*> out;
    for (const auto* a : c) {
      bool dominated = false;
      for (const auto* b : c)
        if (a != b && a->stamp <= row(b->row)[a->tid]) {
          dominated = true;
          break;
        }
      if (!dominated) out.push_back(a);
    }
    return out;
  }

  // Exact W1/W2 per read. Per thread only the last write not ordered after the
  // read (W1 side) or the last write ordered before it (W2 side) can be
  // maximal, so each side has at most k candidates before the maxima filter.
  void resolve_candidates() {
    for (const auto& per_thread : reads_)
      for (const auto& list : per_thread)
        for (const auto& rec : list) resolve_read(trace_.at(rec.pos), rec);
    std::sort(candidates_.begin(), candidates_.end(),
              [](const ReadCandidates& a, const ReadCandidates& b) { return a.read < b.read; });
  }

  void resolve_read(const Event& e, const AccessRecord& rec) {
    const Stamp* rc = row(rec.row);
    std::vector<const AccessRecord*> c1, c2;
    for (ThreadIndex j = 0; j < k_; ++j) {
      const auto& ws = writes_[e.target][j];
      const auto lo = std::partition_point(ws.begin(), ws.end(),
                                           [&](const AccessRecord& w) { return w.stamp <= rc[j]; });
      if (lo != ws.begin()) c2.push_back(&*(lo - 1));
      if (j == e.tid) continue;
      const auto hi = std::partition_point(
          lo, ws.end(), [&](const AccessRecord& w) { return row(w.row)[e.tid] < rec.stamp; });
      if (hi != lo) c1.push_back(&*(hi - 1));
    }
    ReadCandidates out;
    out.read = e.pos;
    const auto w1 = maxima(c1);
    const auto w2 = maxima(c2);
    for (const auto* w : w1) out.w1.push_back(w->pos);
    for (const auto* g : w2) {
      out.w2.push_back(g->pos);
      if (std::none_of(w1.begin(), w1.end(),
                       [&](const AccessRecord* f) { return g->stamp <= row(f->row)[g->tid]; }))
        out.w2_kept.push_back(g->pos);
    }
    std::sort(out.w1.begin(), out.w1.end());
    std::sort(out.w2.begin(), out.w2.end());
    std::sort(out.w2_kept.begin(), out.w2_kept.end());
    if (cfg_.record_edges && cfg_.mode == PairMode::Complete)
      for (auto w : out.w1) edges_.push_back({w, e.pos, EdgeOrigin::WriteRead});
    candidates_.push_back(std::move(out));
  }

  const Trace& trace_;
  EngineConfig cfg_;
  std::size_t k_;
  AnalyzerState state_;
  std::vector<RacePair> races_;
  std::vector<LabeledEdge> edges_;
  std::vector<ReadCandidates> candidates_;

  std::vector<std::vector<std::vector<AccessRecord>>> writes_;  // [var][thread]
  std::vector<std::vector<std::vector<AccessRecord>>> reads_;
  EventClocks clocks_;
  std::vector<std::size_t> last_release_;  // 0: lock never released
  std::vector<std::size_t> last_event_;    // per thread, 0: none yet
  std::vector<VectorClock> last_write_clock_;
  std::vector<EpochRef> last_write_;
};

}  // namespace

std::vector<RacePair> run_hb_partner(const Trace& t, AnalysisOptions opts) {
  StreamingEngine engine(t, {opts.mode, false, false, false});
  engine.run();
  return engine.take_races();
}

std::vector<RacePair> run_shb_partner(const Trace& t, AnalysisOptions opts) {
  StreamingEngine engine(t, {opts.mode, true, false, false});
  engine.run();
  return engine.take_races();
}

Phase1Result run_sshb_phase1(const Trace& t, AnalysisOptions opts) {
  StreamingEngine engine(t, {opts.mode, false, true, true});
  engine.run();
  Phase1Result out;
  out.races = engine.take_races();
  out.edges = engine.take_edges();
  out.candidates = engine.take_candidates();
  out.state = engine.take_state();
  out.clocks = engine.take_clocks();
  return out;
}

}  // namespace racediag
