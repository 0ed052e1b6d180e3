#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "racediag/cli.hpp"
#include "testing.hpp"

namespace racediag {
namespace {

using testing::data_path;
using nlohmann::json;

struct Run {
  int code = 0;
  std::string out, err;
  json doc() const { return json::parse(out); }
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  Run r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string input(const std::string& name) { return data_path(name + ".csv"); }

class TempDir {
 public:
  TempDir() {
    path_ = std::filesystem::temp_directory_path() /
            ("racediag-cli-" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
             "-" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  return {std::istreambuf_iterator<char>(in), {}};
}

void check_counts(const json& races, const json& counts) {
  std::map<std::string, std::size_t> seen;
  for (const auto& r : races) ++seen[r["category"].get<std::string>()];
  EXPECT_EQ(counts["total"], races.size());
  for (const auto* cat : {"write-write", "write-read", "read-write"}) EXPECT_EQ(counts[cat], seen[cat]);
}

TEST(CliAnalyze, HbPairs) {
  const auto r = cli({"analyze", "--algo", "hb", "--input", input("two_candidates"), "--format", "json"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto d = r.doc();
  EXPECT_EQ(d["races"].size(), 4u);
  check_counts(d["races"], d["counts"]);
  EXPECT_EQ(d["trace"]["events"], 5);
}

TEST(CliAnalyze, ShbLostDependency) {
  const auto d = cli({"analyze", "--algo", "shb", "-i", input("lost_dependency"), "--format", "json"}).doc();
  bool ww_y = false;
  for (const auto& r : d["races"]) ww_y |= r["category"] == "write-write" && r["var"] == "y";
  EXPECT_TRUE(ww_y);
}

TEST(CliAnalyze, EmptyTrace) {
  for (const auto* algo : {"sshb", "hb", "shb", "fasttrack"}) {
    const auto r = cli({"analyze", "--algo", algo, "-i", input("empty"), "--format", "json"});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    const auto d = r.doc();
    const auto& counts = std::string(algo) == "fasttrack" ? d["fasttrack"]["counts"] : d["counts"];
    EXPECT_EQ(counts["total"], 0) << algo;
  }
}

TEST(CliAnalyze, TextOutput) {
  const auto r = cli({"analyze", "--algo", "hb", "-i", input("five_events")});
  ASSERT_EQ(r.code, kExitOk);
  EXPECT_NE(r.out.find("w(y)@3"), std::string::npos);
}

TEST(CliDiagnose, FiveEventExample) {
  const auto r = cli({"diagnose", "-i", input("five_events"), "--format", "json"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto s = r.doc()["summary"];
  EXPECT_EQ(s["races"], 4);
  EXPECT_EQ(s["guaranteed"], 3);
  EXPECT_EQ(s["maybe"], 1);
  EXPECT_EQ(s["xg"], "4/3");
  EXPECT_EQ(r.doc()["classifications"].size(), 4u);
}

TEST(CliDiagnose, LocksetFilter) {
  const auto d = cli({"diagnose", "-i", input("overlapping_sections"), "--lockset-filter", "--format", "json"}).doc();
  EXPECT_EQ(d["summary"]["guaranteed"], 1);
  EXPECT_EQ(d["summary"]["lockset_fp"], 1);
  EXPECT_EQ(d["classifications"][0]["lockset_fp"], true);
}

TEST(CliDiagnose, OracleCheck) {
  const auto r = cli({"diagnose", "-i", input("two_candidates"), "--oracle-check", "--format", "json"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(r.doc()["oracle"]["agreement"], 1.0);
  EXPECT_EQ(r.doc()["oracle"]["checked"], 4);
}

TEST(CliDiagnose, OracleCapExceeded) {
  EXPECT_EQ(cli({"diagnose", "-i", input("two_reads"), "--oracle-check", "--cap", "3"}).code,
            kExitCapExceeded);
}

TEST(CliCompare, MissedRace) {
  const auto d = cli({"compare", "-i", input("two_candidates"), "--format", "json"}).doc();
  const auto& a = d["algorithms"];
  EXPECT_EQ(a["hb"]["counts"]["write-write"], 2);
  EXPECT_EQ(a["shb"]["counts"]["write-write"], 1);
  EXPECT_EQ(a["sshb"]["summary"]["maybe"], 1);
  for (const auto& c : d["classifications"]) {
    if (c["var"] == "y") EXPECT_EQ(c["verdict"], "maybe");
    if (c["first"] == 2 && c["second"] == 5) EXPECT_EQ(c["verdict"], "guaranteed");
  }
}

TEST(CliCompare, EmptyAndText) {
  const auto d = cli({"compare", "-i", input("empty"), "--format", "json"}).doc();
  for (const auto* algo : {"fasttrack", "hb", "shb", "sshb"}) EXPECT_EQ(d["algorithms"][algo]["counts"]["total"], 0);
  const auto text = cli({"compare", "-i", input("two_candidates")});
  EXPECT_EQ(text.code, kExitOk);
  EXPECT_NE(text.out.find("Phase1+2"), std::string::npos);
}

TEST(CliCompare, HbAtLeastShb) {
  TempDir dir;
  const auto path = dir.file("t.csv");
  ASSERT_EQ(cli({"gen", "--threads", "4", "--events", "1000", "--seed", "3", "-o", path}).code, kExitOk);
  const auto d = cli({"compare", "-i", path, "--format", "json"}).doc();
  EXPECT_GE(d["algorithms"]["hb"]["counts"]["total"], d["algorithms"]["shb"]["counts"]["total"]);
}

TEST(CliGen, EmptyAndDeterministic) {
  const auto empty = cli({"gen", "--threads", "2", "--events", "0", "--seed", "7"});
  EXPECT_EQ(empty.code, kExitOk);
  EXPECT_EQ(empty.out, "");
  const std::vector<std::string> args{"gen", "--threads", "3", "--events", "60", "--seed", "9"};
  EXPECT_EQ(cli(args).out, cli(args).out);
  EXPECT_EQ(parse_trace(cli(args).out).size(), 60u);
}

TEST(CliGen, InvalidConfig) {
  EXPECT_EQ(cli({"gen", "--locks", "0", "--lock-discipline", "0.5"}).code, kExitInputError);
  EXPECT_EQ(cli({"gen", "--threads", "0"}).code, kExitInputError);
}

TEST(CliPerturb, ReproducesLostDependency) {
  const auto r = cli({"perturb", "-i", input("write_read_dependency"), "--mode", "rw", "--seed", "1"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(r.out, slurp(input("lost_dependency")));
  EXPECT_EQ(cli({"perturb", "-i", input("three_threads"), "--mode", "rw", "--seed", "30", "--swaps", "20"}).out,
            slurp(input("two_candidates")));
  // Perturbing needs an accurate input.
  EXPECT_EQ(cli({"perturb", "-i", input("overlapping_sections")}).code, kExitInputError);
}

TEST(CliPerturb, WritesFile) {
  TempDir dir;
  const auto path = dir.file("p.csv");
  const std::vector<std::string> args{"perturb", "-i", input("locked_writes"), "--mode", "rr", "--seed", "22", "-o", path};
  ASSERT_EQ(cli(args).code, kExitOk);
  const auto first = slurp(path);
  ASSERT_EQ(cli(args).code, kExitOk);
  EXPECT_EQ(slurp(path), first);
  EXPECT_EQ(first, slurp(input("overlapping_sections")));
}

TEST(CliValidate, Levels) {
  EXPECT_EQ(cli({"validate", "-i", input("overlapping_sections"), "--level", "strict"}).code, kExitInputError);
  EXPECT_EQ(cli({"validate", "-i", input("overlapping_sections"), "--level", "lenient"}).code, kExitOk);
  EXPECT_EQ(cli({"validate", "-i", input("locked_writes"), "--level", "strict"}).code, kExitOk);
}

TEST(CliValidate, DanglingAcquire) {
  TempDir dir;
  const auto path = dir.file("d.csv");
  std::ofstream(path) << "1,T1,LK,y\n2,T1,WR,x\n";
  EXPECT_EQ(cli({"validate", "-i", path}).code, kExitInputError);
  EXPECT_EQ(cli({"analyze", "-i", path}).code, kExitInputError);
  EXPECT_EQ(cli({"analyze", "-i", path, "--insert-dummy-releases"}).code, kExitOk);
  const auto fixed = dir.file("f.csv");
  EXPECT_EQ(cli({"validate", "-i", path, "--insert-dummy-releases", "--write-repaired", fixed}).code, kExitOk);
  EXPECT_EQ(slurp(fixed), "1,T1,LK,y\n2,T1,WR,x\n3,T1,UK,y\n");
}

TEST(CliExitCodes, InputErrors) {
  EXPECT_EQ(cli({"analyze", "-i", "/nonexistent/trace.csv"}).code, kExitInputError);
  EXPECT_EQ(cli({"analyze", "--algo", "bogus", "-i", input("locked_writes")}).code, kExitInputError);
  EXPECT_EQ(cli({"frobnicate"}).code, kExitInputError);
  EXPECT_EQ(cli({}).code, kExitInputError);
  EXPECT_EQ(cli({"--help"}).code, kExitOk);
  TempDir dir;
  const auto bad = dir.file("bad.csv");
  std::ofstream(bad) << "1,T1,WR,x\n2,T1,ZZ,x\n";
  const auto r = cli({"diagnose", "-i", bad});
  EXPECT_EQ(r.code, kExitInputError);
  EXPECT_NE(r.err.find("2"), std::string::npos);
}

// Generated trace with a small pool of source locations so that dedup merges.
std::string located_trace(const TempDir& dir, std::uint64_t seed) {
  auto cfg = testing::corpus_config(seed);
  cfg.events = 40;
  cfg.threads = 3;
  const auto t = gen_trace(cfg);
  TraceBuilder b;
  for (const auto& e : t.events())
    b.add(t.thread_name(e.tid), e.op, t.target_name(e), "L" + std::to_string(e.pos % 5));
  const auto path = dir.file("loc" + std::to_string(seed) + ".csv");
  std::ofstream(path) << serialize_trace(std::move(b).build());
  return path;
}

TEST(CliProperty, CountsMatchListsAndDedupNeverIncreases) {
  TempDir dir;
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    const auto path = located_trace(dir, seed);
    for (const auto* algo : {"hb", "shb", "sshb"}) {
      const auto full = cli({"analyze", "--algo", algo, "-i", path, "--format", "json"}).doc();
      const auto dedup =
          cli({"analyze", "--algo", algo, "-i", path, "--format", "json", "--dedup-by-location"}).doc();
      check_counts(full["races"], full["counts"]);
      check_counts(dedup["races"], dedup["counts"]);
      for (const auto* cat : {"total", "write-write", "write-read", "read-write"})
        EXPECT_LE(dedup["counts"][cat], full["counts"][cat]) << algo << " seed " << seed;
    }
    const auto d = cli({"diagnose", "-i", path, "--format", "json"}).doc();
    const auto dd = cli({"diagnose", "-i", path, "--format", "json", "--dedup-by-location"}).doc();
    EXPECT_EQ(d["summary"]["races"], d["classifications"].size());
    EXPECT_EQ(dd["summary"]["races"], dd["classifications"].size());
    EXPECT_LE(dd["summary"]["races"], d["summary"]["races"]);
    EXPECT_LE(dd["summary"]["guaranteed"], d["summary"]["guaranteed"]);
    EXPECT_LE(dd["summary"]["maybe"], d["summary"]["maybe"]);
  }
}

TEST(CliReport, JsonKeysAndOutputFile) {
  TempDir dir;
  const auto out = dir.file("r.json");
  ASSERT_EQ(cli({"diagnose", "-i", input("two_candidates"), "--format", "json", "-o", out}).code, kExitOk);
  const auto d = json::parse(slurp(out));
  for (const auto* key : {"tool", "version", "command", "trace", "classifications", "summary",
                          "candidates", "timings_ms"})
    EXPECT_TRUE(d.contains(key)) << key;
  EXPECT_TRUE(d["timings_ms"].contains("phase1+2"));
  EXPECT_EQ(d["candidates"]["wr_max"], 2);
}

}  // namespace
}  // namespace racediag
