#include "racediag/generate.hpp"

#include <algorithm>
#include <random>
#include <string>
#include <vector>

namespace racediag {

namespace {

std::string name(char prefix, std::size_t index) { return prefix + std::to_string(index + 1); }

constexpr double kReleaseChance = 0.35;
constexpr double kNestChance = 0.1;

}  // namespace

Trace gen_trace(const GenConfig& cfg) {
  if (cfg.threads < 1) throw GenConfigError("threads must be at least 1");
  if (cfg.events > 0 && cfg.vars == 0) throw GenConfigError("events need at least one variable");
  if (cfg.lock_discipline < 0 || cfg.lock_discipline > 1)
    throw GenConfigError("lock discipline must lie in [0, 1]");
  if (cfg.lock_discipline > 0 && cfg.locks == 0)
    throw GenConfigError("lock discipline above 0 needs at least one lock");
  if (cfg.read_ratio < 0 || cfg.read_ratio > 1) throw GenConfigError("read ratio must lie in [0, 1]");

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };

  TraceBuilder b;
  std::vector<std::vector<std::size_t>> held(cfg.threads);  // stack per thread
  std::vector<bool> taken(cfg.locks, false);
  std::vector<std::vector<bool>> touched(cfg.threads, std::vector<bool>(cfg.vars, false));
  std::size_t held_total = 0;

  auto release = [&](std::size_t th) {
    const auto l = held[th].back();
    held[th].pop_back();
    taken[l] = false;
    --held_total;
    b.add(name('T', th), Op::Release, name('m', l));
  };
  auto try_acquire = [&](std::size_t th, std::size_t remaining) {
    // Room for the acquire, one access and every pending release.
    if (remaining < held_total + 3) return false;
    std::vector<std::size_t> free;
    for (std::size_t l = 0; l < cfg.locks; ++l)
      if (!taken[l]) free.push_back(l);
    if (free.empty()) return false;
    const auto l = free[pick(free.size())];
    taken[l] = true;
    held[th].push_back(l);
    ++held_total;
    b.add(name('T', th), Op::Acquire, name('m', l));
    return true;
  };

  while (b.size() < cfg.events) {
    const std::size_t remaining = cfg.events - b.size();
    if (remaining <= held_total) {
      std::size_t th = 0;
      while (held[th].empty()) ++th;
      release(th);
      continue;
    }
    const auto th = pick(cfg.threads);
    if (!held[th].empty()) {
      if (coin(rng) < kReleaseChance) {
        release(th);
        continue;
      }
      if (coin(rng) < kNestChance && try_acquire(th, remaining)) continue;
    } else if (cfg.lock_discipline > 0 && coin(rng) < cfg.lock_discipline &&
               try_acquire(th, remaining)) {
      continue;
    }
    const auto v = pick(cfg.vars);
    Op op = coin(rng) < cfg.read_ratio ? Op::Read : Op::Write;
    if (cfg.ensure_initial_writes && !touched[th][v]) op = Op::Write;
    touched[th][v] = true;
    b.add(name('T', th), op, name('v', v));
  }
  return std::move(b).build();
}

bool swap_allowed(const Event& a, const Event& b, PerturbMode mode) {
  if (a.tid == b.tid) return false;
  if (a.is_sync() && b.is_sync() && a.target == b.target)
    return mode == PerturbMode::RR && a.is_release() && b.is_acquire();
  return true;
}

Trace perturb(const Trace& t, PerturbMode mode, std::uint64_t seed, std::optional<std::size_t> swaps) {
  std::vector<Event> events = t.events();
  if (events.size() >= 2) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> at(0, events.size() - 2);
    const std::size_t attempts = swaps.value_or(events.size());
    for (std::size_t k = 0; k < attempts; ++k) {
      const auto i = at(rng);
      if (swap_allowed(events[i], events[i + 1], mode)) std::swap(events[i], events[i + 1]);
    }
  }
  TraceBuilder b;
  for (const auto& e : events) b.add_from(t, e);
  return std::move(b).build();
}

}  // namespace racediag
