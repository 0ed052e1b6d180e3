#include "racediag/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "racediag/analyzers.hpp"
#include "racediag/diagnosis.hpp"
#include "racediag/generate.hpp"
#include "racediag/lockset.hpp"
#include "racediag/relations.hpp"
#include "racediag/report.hpp"
#include "racediag/validate.hpp"

namespace racediag {

namespace {

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommonArgs {
  std::string input;
  std::string format = "text";
  std::string out;
  std::string mode = "complete";
  bool dummy_releases = false;
};

void add_input(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("-i,--input", a.input, "Trace file")->required();
}

void add_output(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--format", a.format, "Report format")->check(CLI::IsMember({"text", "json"}));
  cmd->add_option("-o,--out", a.out, "Write the report to this file instead of stdout");
}

void add_analysis(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--mode", a.mode, "Pair enumeration: complete or frontier (literal cw/cr)")
      ->check(CLI::IsMember({"complete", "frontier"}));
  cmd->add_flag("--insert-dummy-releases", a.dummy_releases,
                "Close dangling acquires with releases at the trace end");
}

AnalysisOptions analysis_options(const CommonArgs& a) {
  return {a.mode == "frontier" ? PairMode::Frontier : PairMode::Complete};
}

// Loads the input and checks per-thread lock matching.
Trace load_checked(const CommonArgs& a) {
  Trace t;
  try {
    t = load_trace(a.input);
  } catch (const TraceError& e) {
    throw InputError(e.what());
  }
  auto report = validate(t, ValidityLevel::Lenient, {a.dummy_releases});
  if (report.repaired) t = std::move(*report.repaired);
  if (!report.ok())
    throw InputError("trace is not well formed:\n" + report.summary(t));
  return t;
}

void emit(const CommonArgs& a, std::ostream& out, const std::string& text) {
  if (a.out.empty()) {
    out << text;
    return;
  }
  std::ofstream f(a.out);
  if (!f) throw InputError("cannot write '" + a.out + "'");
  f << text;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

std::string meta_line(const Trace& t) {
  const auto m = t.meta();
  std::ostringstream s;
  s << "trace: " << m.events << " events, " << m.threads << " threads, " << m.vars << " vars, "
    << m.locks << " locks (" << m.reads << " reads, " << m.writes << " writes, " << m.syncs
    << " syncs)\n";
  return s.str();
}

std::string counts_line(const std::string& label, const std::vector<RacePair>& races) {
  std::size_t n[3] = {0, 0, 0};
  for (const auto& r : races) ++n[static_cast<std::size_t>(r.category)];
  std::ostringstream s;
  s << label << ": " << races.size() << " races (ww " << n[0] << ", wr " << n[1] << ", rw " << n[2]
    << ")\n";
  return s.str();
}

std::string path_string(const Trace& t, const std::vector<std::size_t>& path) {
  std::string s;
  for (std::size_t k = 0; k < path.size(); ++k) {
    if (k) s += " -> ";
    s += t.describe(path[k]);
  }
  return s;
}

std::vector<Classification> dedup_classifications(const Trace& t,
                                                  const std::vector<Classification>& cs) {
  std::set<std::pair<std::string, std::string>> seen;
  std::vector<Classification> out;
  for (const auto& c : cs)
    if (seen.insert(loc_pair(t, c.pair)).second) out.push_back(c);
  return out;
}

struct AnalyzeArgs : CommonArgs {
  std::string algo = "hb";
  bool dedup = false;
};

int cmd_analyze(const AnalyzeArgs& a, std::ostream& out) {
  const auto t = load_checked(a);
  const auto opts = analysis_options(a);
  Json doc = document("analyze", t);
  doc["algo"] = a.algo;
  std::ostringstream text;
  text << meta_line(t);

  if (a.algo == "fasttrack") {
    const auto r = run_fasttrack(t);
    doc["fasttrack"] = fasttrack_json(t, r);
    text << "fasttrack: " << r.races.size() << " races at " << r.racy_events()
         << " events (sound up to the first race only)\n";
    for (const auto& x : r.races)
      text << "  " << t.describe(x.pos) << " with " << t.describe(x.partner) << " "
           << to_string(x.category) << " " << x.clock.str() << "\n";
  } else {
    std::vector<RacePair> races;
    if (a.algo == "hb") {
      races = run_hb_partner(t, opts);
    } else if (a.algo == "shb") {
      races = run_shb_partner(t, opts);
    } else {
      const auto p1 = run_sshb_phase1(t, opts);
      races = p1.races;
      doc["edges"] = p1.edges.size();
      doc["max_cw"] = p1.state.max_cw;
      doc["max_cr"] = p1.state.max_cr;
    }
    if (a.dedup) races = dedup_by_location(t, races);
    Json list = Json::array();
    for (const auto& r : races) list.push_back(race_json(t, r));
    doc["mode"] = a.mode;
    doc["dedup_by_location"] = a.dedup;
    doc["races"] = list;
    doc["counts"] = race_counts_json(races);
    text << counts_line(a.algo, races);
    for (const auto& r : races) text << "  " << race_line(t, r) << "\n";
  }
  emit(a, out, a.format == "json" ? dump(doc) : text.str());
  return kExitOk;
}

struct DiagnoseArgs : CommonArgs {
  bool lockset = false;
  bool oracle = false;
  bool dedup = false;
  std::uint64_t cap = kDefaultCandidateCap;
  unsigned jobs = 1;
  std::size_t budget = kDefaultSearchBudget;
};

int cmd_diagnose(const DiagnoseArgs& a, std::ostream& out, std::ostream& err) {
  const auto t = load_checked(a);
  auto report = diagnose_all(t, {analysis_options(a), a.jobs, a.budget});
  if (a.lockset) report = lockset_flags(std::move(report), compute_locksets(t));
  if (a.dedup) {
    report.classifications = dedup_classifications(t, report.classifications);
    report.recount();
  }

  std::optional<OracleCheck> check;
  if (a.oracle) {
    try {
      const SomeShbOracle oracle(t, a.cap);
      check.emplace();
      for (const auto& c : report.classifications) {
        const auto v = oracle.classify(c.pair);
        ++check->checked;
        if (v == c.verdict) ++check->agree;
        else check->disagreements.emplace_back(c, v);
      }
    } catch (const CandidateProductTooLarge& e) {
      err << "oracle check: " << e.what() << "\n";
      return kExitCapExceeded;
    } catch (const std::length_error& e) {
      err << "oracle check: " << e.what() << "\n";
      return kExitCapExceeded;
    }
  }

  Json doc = document("diagnose", t);
  doc["mode"] = a.mode;
  doc["lockset_filter"] = a.lockset;
  doc["dedup_by_location"] = a.dedup;
  doc.update(diagnosis_json(t, report, check));

  std::ostringstream text;
  text << meta_line(t);
  text << "races " << xg_string(report) << " (guaranteed " << report.totals.guaranteed
       << ", maybe " << report.totals.maybe;
  if (a.lockset) text << ", lockset fp " << report.lockset_fp;
  if (report.unresolved) text << ", unresolved " << report.unresolved;
  text << ")\n";
  for (const auto& c : report.classifications) {
    text << "  " << race_line(t, c.pair) << " " << to_string(c.verdict);
    if (c.lockset_fp) text << " [lockset fp]";
    if (c.unresolved) text << " [unresolved]";
    if (!c.witness.empty()) text << " via " << path_string(t, c.witness);
    text << "\n";
  }
  text << std::fixed << std::setprecision(2) << "#w(r) avg " << report.wr_avg << " max "
       << report.wr_max << ", " << report.edges << " edges\n";
  text << std::setprecision(3) << "Phase1 " << report.phase1_ms << " ms, Phase2 "
       << report.phase2_ms << " ms, Phase1+2 " << report.phase1_ms + report.phase2_ms << " ms\n";
  if (check)
    text << "oracle agreement " << check->agree << "/" << check->checked << "\n";
  emit(a, out, a.format == "json" ? dump(doc) : text.str());
  return kExitOk;
}

template <class F>
double time_ms(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

struct CompareArgs : CommonArgs {
  bool lockset = false;
};

int cmd_compare(const CompareArgs& a, std::ostream& out) {
  const auto t = load_checked(a);
  const auto opts = analysis_options(a);
  FastTrackReport ft;
  std::vector<RacePair> hb, shb;
  const double ft_ms = time_ms([&] { ft = run_fasttrack(t); });
  const double hb_ms = time_ms([&] { hb = run_hb_partner(t, opts); });
  const double shb_ms = time_ms([&] { shb = run_shb_partner(t, opts); });
  auto diag = diagnose_all(t, {opts, 1});
  if (a.lockset) diag = lockset_flags(std::move(diag), compute_locksets(t));

  std::vector<RacePair> sshb;
  for (const auto& c : diag.classifications) sshb.push_back(c.pair);

  Json doc = document("compare", t);
  doc["mode"] = a.mode;
  Json ftj = fasttrack_json(t, ft);
  Json algos = {{"fasttrack", {{"counts", ftj["counts"]}, {"racy_events", ft.racy_events()}, {"ms", ft_ms}}},
                {"hb", {{"counts", race_counts_json(hb)}, {"ms", hb_ms}}},
                {"shb", {{"counts", race_counts_json(shb)}, {"ms", shb_ms}}}};
  Json d = diagnosis_json(t, diag);
  algos["sshb"] = {{"counts", race_counts_json(sshb)},
                   {"summary", d["summary"]},
                   {"candidates", d["candidates"]},
                   {"timings_ms", d["timings_ms"]}};
  doc["algorithms"] = algos;
  Json hb_list = Json::array(), shb_list = Json::array();
  for (const auto& r : hb) hb_list.push_back(race_json(t, r));
  for (const auto& r : shb) shb_list.push_back(race_json(t, r));
  doc["hb_races"] = hb_list;
  doc["shb_races"] = shb_list;
  doc["classifications"] = d["classifications"];

  std::ostringstream text;
  text << meta_line(t);
  auto row = [&](const std::string& name, const std::vector<std::size_t>& n, double ms,
                 const std::string& extra) {
    text << std::left << std::setw(10) << name << std::right;
    for (auto v : n) text << std::setw(7) << v;
    text << std::setw(12) << std::fixed << std::setprecision(3) << ms << "  " << extra << "\n";
  };
  auto split = [](const std::vector<RacePair>& rs) {
    std::vector<std::size_t> n{rs.size(), 0, 0, 0};
    for (const auto& r : rs) ++n[1 + static_cast<std::size_t>(r.category)];
    return n;
  };
  std::vector<std::size_t> ftn{ft.races.size(), 0, 0, 0};
  for (const auto& r : ft.races) ++ftn[1 + static_cast<std::size_t>(r.category)];
  text << std::left << std::setw(10) << "algo" << std::right << std::setw(7) << "total"
       << std::setw(7) << "ww" << std::setw(7) << "wr" << std::setw(7) << "rw" << std::setw(12)
       << "ms" << "\n";
  row("fasttrack", ftn, ft_ms, "");
  row("hb", split(hb), hb_ms, "");
  row("shb", split(shb), shb_ms, "");
  std::ostringstream extra;
  extra << xg_string(diag);
  if (a.lockset) extra << ", lockset fp " << diag.lockset_fp;
  extra << std::fixed << std::setprecision(2) << ", #w(r) avg " << diag.wr_avg << " max "
        << diag.wr_max;
  row("sshb", split(sshb), diag.phase1_ms + diag.phase2_ms, extra.str());
  for (const auto& c : diag.classifications)
    text << "  " << race_line(t, c.pair) << " " << to_string(c.verdict)
         << (c.lockset_fp ? " [lockset fp]" : "") << (c.unresolved ? " [unresolved]" : "") << "\n";
  text << std::fixed << std::setprecision(3) << "sshb Phase1 " << diag.phase1_ms << " ms, Phase2 "
       << diag.phase2_ms << " ms, Phase1+2 " << diag.phase1_ms + diag.phase2_ms << " ms\n";
  emit(a, out, a.format == "json" ? dump(doc) : text.str());
  return kExitOk;
}

int cmd_gen(const GenConfig& cfg, const std::string& out_path, std::ostream& out) {
  Trace t;
  try {
    t = gen_trace(cfg);
  } catch (const GenConfigError& e) {
    throw InputError(e.what());
  }
  CommonArgs a;
  a.out = out_path;
  emit(a, out, serialize_trace(t));
  return kExitOk;
}

struct PerturbArgs {
  std::string input;
  std::string out;
  std::string mode = "rw";
  std::optional<std::size_t> swaps;
  std::uint64_t seed = 1;
};

int cmd_perturb(const PerturbArgs& p, std::ostream& out) {
  Trace t;
  try {
    t = load_trace(p.input);
  } catch (const TraceError& e) {
    throw InputError(e.what());
  }
  const auto strict = validate(t, ValidityLevel::Strict);
  if (!strict.ok()) throw InputError("perturb needs a Strict-valid trace:\n" + strict.summary(t));
  const auto r = perturb(t, p.mode == "rr" ? PerturbMode::RR : PerturbMode::RW, p.seed, p.swaps);
  CommonArgs a;
  a.out = p.out;
  emit(a, out, serialize_trace(r));
  return kExitOk;
}

struct ValidateArgs : CommonArgs {
  std::string level = "strict";
  std::string repaired_out;
};

int cmd_validate(const ValidateArgs& a, std::ostream& out) {
  Trace t;
  try {
    t = load_trace(a.input);
  } catch (const TraceError& e) {
    throw InputError(e.what());
  }
  const auto level = a.level == "strict" ? ValidityLevel::Strict : ValidityLevel::Lenient;
  const auto report = validate(t, level, {a.dummy_releases});
  const Trace& checked = report.repaired ? *report.repaired : t;
  if (!a.repaired_out.empty()) {
    CommonArgs r;
    r.out = a.repaired_out;
    emit(r, out, serialize_trace(checked));
  }
  Json doc = document("validate", checked);
  doc["level"] = a.level;
  doc["valid"] = report.ok();
  Json vs = Json::array();
  for (const auto& v : report.violations)
    vs.push_back({{"kind", to_string(v.kind)},
                  {"pos", v.pos},
                  {"thread", checked.thread_name(v.tid)},
                  {"lock", checked.lock_name(v.lock)}});
  doc["violations"] = vs;
  std::string text = report.ok() ? "valid (" + a.level + ")\n"
                                 : "invalid (" + a.level + ")\n" + report.summary(checked);
  emit(a, out, a.format == "json" ? dump(doc) : text);
  return report.ok() ? kExitOk : kExitInputError;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Trace-based data race prediction and diagnosis", kToolName};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  AnalyzeArgs an;
  auto* analyze = app.add_subcommand("analyze", "Run one streaming race analysis");
  add_input(analyze, an);
  analyze->add_option("--algo", an.algo, "fasttrack, hb, shb or sshb")
      ->check(CLI::IsMember({"fasttrack", "hb", "shb", "sshb"}));
  analyze->add_flag("--dedup-by-location", an.dedup, "Keep one race per source-location pair");
  add_analysis(analyze, an);
  add_output(analyze, an);

  DiagnoseArgs dg;
  auto* diagnose = app.add_subcommand("diagnose", "Classify HB races as guaranteed or maybe");
  add_input(diagnose, dg);
  diagnose->add_flag("--lockset-filter", dg.lockset, "Flag guaranteed races with a common lock");
  diagnose->add_flag("--oracle-check", dg.oracle, "Cross-check verdicts by exhaustive enumeration");
  diagnose->add_option("--cap", dg.cap, "Candidate product limit for --oracle-check");
  diagnose->add_option("--jobs", dg.jobs, "Classification threads")->check(CLI::PositiveNumber);
  diagnose->add_option("--search-budget", dg.budget,
                       "Edge examinations per pair before a verdict is left unresolved");
  diagnose->add_flag("--dedup-by-location", dg.dedup, "Keep one race per source-location pair");
  add_analysis(diagnose, dg);
  add_output(diagnose, dg);

  CompareArgs cp;
  auto* compare = app.add_subcommand("compare", "Run fasttrack, hb, shb and sshb side by side");
  add_input(compare, cp);
  compare->add_flag("--lockset-filter", cp.lockset, "Flag guaranteed races with a common lock");
  add_analysis(compare, cp);
  add_output(compare, cp);

  GenConfig cfg;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen", "Generate a random Strict-valid trace");
  gen->add_option("--threads", cfg.threads, "Thread count")->capture_default_str();
  gen->add_option("--vars", cfg.vars, "Variable count")->capture_default_str();
  gen->add_option("--locks", cfg.locks, "Lock count")->capture_default_str();
  gen->add_option("--events", cfg.events, "Trace length")->capture_default_str();
  gen->add_option("--lock-discipline", cfg.lock_discipline,
                  "Chance that an access outside a critical section opens one")
      ->capture_default_str();
  gen->add_option("--read-ratio", cfg.read_ratio, "Share of accesses that are reads")
      ->capture_default_str();
  gen->add_flag("--ensure-initial-writes,!--no-ensure-initial-writes", cfg.ensure_initial_writes,
               "Start every thread's use of a variable with a write (on by default)");
  gen->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
  gen->add_option("-o,--out", gen_out, "Trace file to write (default stdout)");

  PerturbArgs pt;
  auto* pert = app.add_subcommand("perturb", "Reorder a trace the way inaccurate tracing would");
  pert->add_option("-i,--input", pt.input, "Trace file")->required();
  pert->add_option("--mode", pt.mode, "rw keeps lock order, rr may also record releases late")
      ->check(CLI::IsMember({"rw", "rr"}));
  pert->add_option("--swaps", pt.swaps, "Attempted adjacent swaps (default: trace length)");
  pert->add_option("--seed", pt.seed, "Random seed");
  pert->add_option("-o,--out", pt.out, "Trace file to write (default stdout)");

  ValidateArgs va;
  auto* val = app.add_subcommand("validate", "Check lock well-formedness");
  add_input(val, va);
  val->add_option("--level", va.level, "Well-formedness level")->check(CLI::IsMember({"strict", "lenient"}));
  val->add_flag("--insert-dummy-releases", va.dummy_releases,
                "Close dangling acquires with releases at the trace end");
  val->add_option("--write-repaired", va.repaired_out, "Write the checked trace here");
  add_output(val, va);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInputError;
  }

  try {
    if (analyze->parsed()) return cmd_analyze(an, out);
    if (diagnose->parsed()) return cmd_diagnose(dg, out, err);
    if (compare->parsed()) return cmd_compare(cp, out);
    if (gen->parsed()) return cmd_gen(cfg, gen_out, out);
    if (pert->parsed()) return cmd_perturb(pt, out);
    if (val->parsed()) return cmd_validate(va, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitInputError;
}

}  // namespace racediag
