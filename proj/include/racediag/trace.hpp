#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace racediag {

using ThreadIndex = std::uint32_t;
using VarIndex = std::uint32_t;
using LockIndex = std::uint32_t;

enum class Op : std::uint8_t { Read, Write, Acquire, Release };

/// Two-letter code used by the trace file format (RD, WR, LK, UK).
std::string_view op_code(Op op);

/// One recorded operation. `target` indexes the variable table for
/// reads/writes and the lock table for acquires/releases.
struct Event {
  std::size_t pos = 0;  // 1-based trace position
  ThreadIndex tid = 0;
  Op op = Op::Read;
  std::uint32_t target = 0;
  std::optional<std::string> loc;
  std::optional<std::uint64_t> gan;  // global access number

  bool is_access() const { return op == Op::Read || op == Op::Write; }
  bool is_sync() const { return !is_access(); }
  bool is_read() const { return op == Op::Read; }
  bool is_write() const { return op == Op::Write; }
  bool is_acquire() const { return op == Op::Acquire; }
  bool is_release() const { return op == Op::Release; }

  friend bool operator==(const Event&, const Event&) = default;
};

/// Two accesses conflict when they touch the same variable and one writes.
inline bool conflicting(const Event& a, const Event& b) {
  return a.is_access() && b.is_access() && a.target == b.target &&
         (a.is_write() || b.is_write());
}

struct TraceMeta {
  std::size_t events = 0;
  std::size_t threads = 0;
  std::size_t vars = 0;
  std::size_t locks = 0;
  std::size_t reads = 0;
  std::size_t writes = 0;
  std::size_t syncs = 0;
};

class TraceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public TraceError {
 public:
  ParseError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Immutable event list plus the interning tables for thread, variable and
/// lock names. Thread indices follow order of first appearance.
class Trace {
 public:
  Trace() = default;

  const std::vector<Event>& events() const { return events_; }
  std::size_t size() const { return events_.size(); }
  bool empty() const { return events_.empty(); }

  /// Event at 1-based position `pos`.
  const Event& at(std::size_t pos) const;

  std::size_t thread_count() const { return thread_names_.size(); }
  std::size_t var_count() const { return var_names_.size(); }
  std::size_t lock_count() const { return lock_names_.size(); }

  const std::string& thread_name(ThreadIndex t) const { return thread_names_.at(t); }
  const std::string& var_name(VarIndex v) const { return var_names_.at(v); }
  const std::string& lock_name(LockIndex l) const { return lock_names_.at(l); }
  const std::string& target_name(const Event& e) const;

  std::optional<ThreadIndex> find_thread(std::string_view name) const;
  std::optional<VarIndex> find_var(std::string_view name) const;
  std::optional<LockIndex> find_lock(std::string_view name) const;

  /// Source location of `e`; "tid:pos" when the trace carries none.
  std::string location(const Event& e) const;

  /// Short human label such as "w(x)@4".
  std::string describe(const Event& e) const;
  std::string describe(std::size_t pos) const { return describe(at(pos)); }

  TraceMeta meta() const;

  friend bool operator==(const Trace&, const Trace&) = default;

 private:
  friend class TraceBuilder;

  std::vector<Event> events_;
  std::vector<std::string> thread_names_;
  std::vector<std::string> var_names_;
  std::vector<std::string> lock_names_;
};

/// Appends events by name and interns them. Positions are assigned in
/// append order.
class TraceBuilder {
 public:
  /// Throws TraceError when `target` is already used in the other namespace.
  TraceBuilder& add(std::string_view tid, Op op, std::string_view target,
                    std::optional<std::string> loc = std::nullopt,
                    std::optional<std::uint64_t> gan = std::nullopt);

  /// Re-adds an event from another trace, keeping its names, loc and gan.
  TraceBuilder& add_from(const Trace& source, const Event& e);

  std::size_t size() const { return trace_.events_.size(); }

  Trace build() &&;

 private:
  std::uint32_t intern(std::vector<std::string>& names,
                       std::unordered_map<std::string, std::uint32_t>& index,
                       std::string_view name);

  Trace trace_;
  std::unordered_map<std::string, std::uint32_t> thread_index_;
  std::unordered_map<std::string, std::uint32_t> var_index_;
  std::unordered_map<std::string, std::uint32_t> lock_index_;
};

// Trace file: one event per line, `pos,tid,OP,target[,loc[,gan]]`, '#' starts
// a comment line, blank lines ignored.
Trace parse_trace(std::istream& in);
Trace parse_trace(std::string_view text);
Trace load_trace(const std::string& path);

void serialize_trace(const Trace& t, std::ostream& out);
std::string serialize_trace(const Trace& t);

}  // namespace racediag
