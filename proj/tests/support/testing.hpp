#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "racediag/generate.hpp"
#include "racediag/trace.hpp"

namespace racediag::testing {

inline std::string data_path(const std::string& file) {
  return std::string(RACEDIAG_TEST_DATA) + "/" + file;
}

inline Trace fixture(const std::string& name) { return load_trace(data_path(name + ".csv")); }

/// Small Strict trace for exhaustive oracle comparison: at most 12 events and
/// 3 threads, every read preceded by a same-thread write.
inline GenConfig corpus_config(std::uint64_t seed) {
  std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ull + 17);
  auto between = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };
  GenConfig cfg;
  cfg.threads = between(1, 3);
  cfg.vars = between(1, 3);
  cfg.locks = between(0, 2);
  cfg.events = between(0, 12);
  cfg.lock_discipline = cfg.locks ? std::uniform_real_distribution<double>(0.0, 0.8)(rng) : 0.0;
  cfg.read_ratio = std::uniform_real_distribution<double>(0.2, 0.8)(rng);
  cfg.ensure_initial_writes = true;
  cfg.seed = seed;
  return cfg;
}

}  // namespace racediag::testing
