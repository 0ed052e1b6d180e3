#include "racediag/trace.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace racediag {

namespace {

std::string_view trim(std::string_view s) {
  constexpr std::string_view ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return out;
}

std::optional<std::uint64_t> parse_uint(std::string_view s) {
  std::uint64_t v = 0;
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end || s.empty()) return std::nullopt;
  return v;
}

std::optional<Op> parse_op(std::string_view s) {
  if (s == "RD") return Op::Read;
  if (s == "WR") return Op::Write;
  if (s == "LK") return Op::Acquire;
  if (s == "UK") return Op::Release;
  return std::nullopt;
}

}  // namespace

std::string_view op_code(Op op) {
  switch (op) {
    case Op::Read: return "RD";
    case Op::Write: return "WR";
    case Op::Acquire: return "LK";
    case Op::Release: return "UK";
  }
  return "??";
}

ParseError::ParseError(std::size_t line, const std::string& what)
    : TraceError("line " + std::to_string(line) + ": " + what), line_(line) {}

const Event& Trace::at(std::size_t pos) const {
  if (pos == 0 || pos > events_.size())
    throw std::out_of_range("trace position " + std::to_string(pos) + " out of range");
  return events_[pos - 1];
}

const std::string& Trace::target_name(const Event& e) const {
  return e.is_access() ? var_name(e.target) : lock_name(e.target);
}

namespace {
template <class Names>
std::optional<std::uint32_t> find_name(const Names& names, std::string_view name) {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return static_cast<std::uint32_t>(i);
  return std::nullopt;
}
}  // namespace

std::optional<ThreadIndex> Trace::find_thread(std::string_view name) const {
  return find_name(thread_names_, name);
}
std::optional<VarIndex> Trace::find_var(std::string_view name) const {
  return find_name(var_names_, name);
}
std::optional<LockIndex> Trace::find_lock(std::string_view name) const {
  return find_name(lock_names_, name);
}

std::string Trace::location(const Event& e) const {
  if (e.loc) return *e.loc;
  return thread_name(e.tid) + ":" + std::to_string(e.pos);
}

std::string Trace::describe(const Event& e) const {
  std::string head;
  switch (e.op) {
    case Op::Read: head = "r"; break;
    case Op::Write: head = "w"; break;
    case Op::Acquire: head = "acq"; break;
    case Op::Release: head = "rel"; break;
  }
  return head + "(" + target_name(e) + ")@" + std::to_string(e.pos);
}

TraceMeta Trace::meta() const {
  TraceMeta m;
  m.events = events_.size();
  m.threads = thread_count();
  m.vars = var_count();
  m.locks = lock_count();
  for (const auto& e : events_) {
    if (e.is_read()) ++m.reads;
    else if (e.is_write()) ++m.writes;
    else ++m.syncs;
  }
  return m;
}

std::uint32_t TraceBuilder::intern(std::vector<std::string>& names,
                                   std::unordered_map<std::string, std::uint32_t>& index,
                                   std::string_view name) {
  auto [it, fresh] = index.try_emplace(std::string(name), static_cast<std::uint32_t>(names.size()));
  if (fresh) names.emplace_back(name);
  return it->second;
}

TraceBuilder& TraceBuilder::add(std::string_view tid, Op op, std::string_view target,
                                std::optional<std::string> loc,
                                std::optional<std::uint64_t> gan) {
  if (tid.empty()) throw TraceError("empty thread id");
  if (target.empty()) throw TraceError("empty target");
  Event e;
  e.pos = trace_.events_.size() + 1;
  e.op = op;
  const std::string key(target);
  if (e.is_access()) {
    if (lock_index_.count(key))
      throw TraceError("name '" + key + "' used both as variable and as lock");
    e.target = intern(trace_.var_names_, var_index_, target);
  } else {
    if (var_index_.count(key))
      throw TraceError("name '" + key + "' used both as variable and as lock");
    e.target = intern(trace_.lock_names_, lock_index_, target);
  }
  e.tid = intern(trace_.thread_names_, thread_index_, tid);
  e.loc = std::move(loc);
  e.gan = gan;
  trace_.events_.push_back(std::move(e));
  return *this;
}

TraceBuilder& TraceBuilder::add_from(const Trace& source, const Event& e) {
  return add(source.thread_name(e.tid), e.op, source.target_name(e), e.loc, e.gan);
}

Trace TraceBuilder::build() && { return std::move(trace_); }

Trace parse_trace(std::istream& in) {
  TraceBuilder builder;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;

    const auto f = split_fields(body);
    if (f.size() < 4 || f.size() > 6)
      throw ParseError(lineno, "expected 4 to 6 comma-separated fields, got " +
                                   std::to_string(f.size()));

    const auto pos = parse_uint(f[0]);
    if (!pos) throw ParseError(lineno, "invalid position '" + std::string(f[0]) + "'");
    const std::size_t expected = builder.size() + 1;
    if (*pos != expected) {
      if (*pos >= 1 && *pos < expected)
        throw ParseError(lineno, "duplicate position " + std::to_string(*pos));
      throw ParseError(lineno, "non-contiguous position " + std::to_string(*pos) +
                                   " (expected " + std::to_string(expected) + ")");
    }

    if (f[1].empty()) throw ParseError(lineno, "empty thread id");
    const auto op = parse_op(f[2]);
    if (!op) throw ParseError(lineno, "unknown op code '" + std::string(f[2]) + "'");
    if (f[3].empty()) throw ParseError(lineno, "empty target");

    std::optional<std::string> loc;
    if (f.size() >= 5 && !f[4].empty()) loc = std::string(f[4]);
    std::optional<std::uint64_t> gan;
    if (f.size() == 6 && !f[5].empty()) {
      gan = parse_uint(f[5]);
      if (!gan) throw ParseError(lineno, "invalid global access number '" + std::string(f[5]) + "'");
    }

    try {
      builder.add(f[1], *op, f[3], std::move(loc), gan);
    } catch (const ParseError&) {
      throw;
    } catch (const TraceError& err) {
      throw ParseError(lineno, err.what());
    }
  }
  return std::move(builder).build();
}

Trace parse_trace(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_trace(in);
}

Trace load_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw TraceError("cannot open trace file '" + path + "'");
  return parse_trace(in);
}

void serialize_trace(const Trace& t, std::ostream& out) {
  for (const auto& e : t.events()) {
    out << e.pos << ',' << t.thread_name(e.tid) << ',' << op_code(e.op) << ','
        << t.target_name(e);
    if (e.loc || e.gan) out << ',' << e.loc.value_or("");
    if (e.gan) out << ',' << *e.gan;
    out << '\n';
  }
}

std::string serialize_trace(const Trace& t) {
  std::ostringstream out;
  serialize_trace(t, out);
  return out.str();
}

}  // namespace racediag
