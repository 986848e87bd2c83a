// Copyright 2026 The pale Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "pale/cli.hpp"

#include <gtest/gtest.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "pale/scenarios.hpp"

namespace pale {
namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() /
           ("pale_cli_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

fs::path write_scenario_file(const TempDir& dir, const SimConfig& cfg,
                             const std::string& name) {
  fs::path p = dir.path / name;
  std::ofstream os(p);
  os << write_scenario(cfg);
  return p;
}

TEST(CmdRun, EndToEndOneSeedAllPass) {
  TempDir dir("run1");
  fs::path scn = write_scenario_file(dir, static_region(5, 7), "static.scn");
  RunSpec spec;
  spec.scenario_path = scn.string();
  spec.out_dir = (dir.path / "out").string();
  std::ostringstream out, err;
  int rc = cmd_run(spec, out, err);
  EXPECT_EQ(rc, 0) << err.str();
  EXPECT_TRUE(fs::exists(dir.path / "out" / "trace-7.jsonl"));
  EXPECT_TRUE(fs::exists(dir.path / "out" / "verdicts-7.jsonl"));
  EXPECT_TRUE(fs::exists(dir.path / "out" / "summary.txt"));
  EXPECT_NE(out.str().find("ALL CHECKS PASS"), std::string::npos);
  std::string verdicts = slurp(dir.path / "out" / "verdicts-7.jsonl");
  EXPECT_NE(verdicts.find("uniqueness"), std::string::npos);
  EXPECT_NE(verdicts.find("agreement"), std::string::npos);
  EXPECT_NE(verdicts.find("oracle-replay"), std::string::npos);
}

TEST(CmdRun, AssumptionViolationIsNamedAndRejected) {
  TempDir dir("run2");
  SimConfig cfg = static_region(5, 7);
  cfg.msg_delay = 50000;  // round length 10000 < D*msgDelay
  fs::path scn = write_scenario_file(dir, cfg, "broken.scn");
  RunSpec spec;
  spec.scenario_path = scn.string();
  spec.out_dir = (dir.path / "out").string();
  std::ostringstream out, err;
  int rc = cmd_run(spec, out, err);
  EXPECT_EQ(rc, 2);
  EXPECT_NE(err.str().find("round-length"), std::string::npos);
  EXPECT_NE(err.str().find("onTimerCost + D*msgDelay"), std::string::npos);
}

TEST(CmdRun, ParseErrorsReportLineAndField) {
  TempDir dir("run3");
  fs::path scn = dir.path / "bad.scn";
  {
    std::ofstream os(scn);
    os << "maxRatio 1.0\nnonsense 42\n";
  }
  RunSpec spec;
  spec.scenario_path = scn.string();
  spec.out_dir = (dir.path / "out").string();
  std::ostringstream out, err;
  EXPECT_EQ(cmd_run(spec, out, err), 2);
  EXPECT_NE(err.str().find("bad.scn:2"), std::string::npos);
  EXPECT_NE(err.str().find("nonsense"), std::string::npos);
}

TEST(CmdRun, SeedSweepWritesOneTracePerSeed) {
  TempDir dir("run4");
  fs::path scn = write_scenario_file(dir, random_churn(4, 1), "churn.scn");
  RunSpec spec;
  spec.scenario_path = scn.string();
  spec.seed_from = 1;
  spec.seed_to = 3;
  spec.out_dir = (dir.path / "out").string();
  std::ostringstream out, err;
  int rc = cmd_run(spec, out, err);
  EXPECT_EQ(rc, 0) << err.str();
  for (int s = 1; s <= 3; ++s) {
    EXPECT_TRUE(
        fs::exists(dir.path / "out" / ("trace-" + std::to_string(s) + ".jsonl")));
    EXPECT_TRUE(fs::exists(dir.path / "out" /
                           ("verdicts-" + std::to_string(s) + ".jsonl")));
  }
  EXPECT_NE(out.str().find("runs: 3"), std::string::npos);
}

TEST(CmdRun, RepeatedRunsProduceIdenticalArtifacts) {
  TempDir dir("run5");
  fs::path scn = write_scenario_file(dir, random_churn(5, 3), "churn.scn");
  RunSpec spec;
  spec.scenario_path = scn.string();
  std::ostringstream out, err;
  spec.out_dir = (dir.path / "a").string();
  ASSERT_EQ(cmd_run(spec, out, err), 0) << err.str();
  spec.out_dir = (dir.path / "b").string();
  ASSERT_EQ(cmd_run(spec, out, err), 0) << err.str();
  EXPECT_EQ(slurp(dir.path / "a" / "trace-3.jsonl"),
            slurp(dir.path / "b" / "trace-3.jsonl"));
  EXPECT_EQ(slurp(dir.path / "a" / "verdicts-3.jsonl"),
            slurp(dir.path / "b" / "verdicts-3.jsonl"));
  EXPECT_EQ(slurp(dir.path / "a" / "summary.txt"),
            slurp(dir.path / "b" / "summary.txt"));
}

TEST(CmdRun, FailingCheckerMeansNonzeroExit) {
  TempDir dir("run6");
  SimConfig cfg = static_region(4, 2);
  cfg.max_virtual_time = 20000;  // two rounds: nobody can get elected
  fs::path scn = write_scenario_file(dir, cfg, "short.scn");
  RunSpec spec;
  spec.scenario_path = scn.string();
  spec.out_dir = (dir.path / "out").string();
  spec.checks = {"termination"};
  std::ostringstream out, err;
  EXPECT_EQ(cmd_run(spec, out, err), 1);
  EXPECT_NE(out.str().find("CHECK FAILURES PRESENT"), std::string::npos);
}

TEST(CmdRun, ShippedScenarioFilesWork) {
  TempDir dir("run7");
  for (const char* name :
       {"static.scn", "adversarial_jitter.scn", "random_churn.scn",
        "mild_leader_failure.scn", "monotonic_join.scn", "merge.scn"}) {
    fs::path scn = fs::path(PALE_SCENARIO_DIR) / name;
    ASSERT_TRUE(fs::exists(scn)) << scn;
    RunSpec spec;
    spec.scenario_path = scn.string();
    spec.out_dir = (dir.path / "out" / name).string();
    std::ostringstream out, err;
    EXPECT_EQ(cmd_run(spec, out, err), 0) << name << ": " << err.str();
  }
}

TEST(CmdReplay, FullWindowNarratesEveryRecord) {
  TempDir dir("replay1");
  Trace t = run_sim(static_region(3, 5));
  fs::path tp = dir.path / "trace.jsonl";
  {
    std::ofstream os(tp);
    write_trace(t, os);
  }
  std::ostringstream out, err;
  int rc = cmd_replay(tp.string(), 0,
                      std::numeric_limits<VirtualTime>::max(), out, err);
  EXPECT_EQ(rc, 0) << err.str();
  std::size_t lines = 0;
  std::istringstream is(out.str());
  std::string line;
  while (std::getline(is, line)) ++lines;
  EXPECT_EQ(lines, t.events.size());
}

TEST(CmdReplay, EmptyWindowIsSilent) {
  TempDir dir("replay2");
  Trace t = run_sim(static_region(3, 5));
  fs::path tp = dir.path / "trace.jsonl";
  {
    std::ofstream os(tp);
    write_trace(t, os);
  }
  std::ostringstream out, err;
  EXPECT_EQ(cmd_replay(tp.string(), -10, -1, out, err), 0);
  EXPECT_TRUE(out.str().empty());
}

TEST(CmdReplay, MissingTraceIsADiagnostic) {
  std::ostringstream out, err;
  EXPECT_EQ(cmd_replay("/nonexistent/trace.jsonl", 0, 1, out, err), 2);
  EXPECT_FALSE(err.str().empty());
}

// A failing checker's witness window, narrated, shows the offending events.
TEST(CmdReplay, WitnessWindowContainsTheViolation) {
  TempDir dir("replay3");
  // Synthetic two-leader trace.
  Trace t;
  t.cfg = static_region(2, 1);
  std::uint64_t seq = 0;
  auto add = [&](VirtualTime at, NodeId node, TraceKind kind) -> TraceEvent& {
    TraceEvent ev;
    ev.t = at;
    ev.seq = seq++;
    ev.node = node;
    ev.kind = kind;
    t.events.push_back(ev);
    return t.events.back();
  };
  add(0, kNoNode, TraceKind::Config);
  add(0, 1, TraceKind::Up);
  add(0, 2, TraceKind::Up);
  add(40000, 1, TraceKind::BecameLeader).rounds_as_leading = 4;
  add(45000, 2, TraceKind::BecameLeader).rounds_as_leading = 4;
  Verdict v = check_uniqueness(t);
  ASSERT_FALSE(v.pass);
  fs::path tp = dir.path / "bad.jsonl";
  {
    std::ofstream os(tp);
    write_trace(t, os);
  }
  std::ostringstream out, err;
  ASSERT_EQ(cmd_replay(tp.string(), v.witness->from, v.witness->to, out, err),
            0);
  EXPECT_NE(out.str().find("BECAME LEADER"), std::string::npos);
  EXPECT_NE(out.str().find("node 2"), std::string::npos);
}

TEST(CmdTable2, SmallSizesSmoke) {
  TempDir dir("t2");
  std::ostringstream out, err;
  int rc = cmd_table2({4, 8}, (dir.path / "out").string(), out, err);
  EXPECT_EQ(rc, 0) << err.str();
  EXPECT_NE(out.str().find("message complexity summary"), std::string::npos);
  EXPECT_NE(out.str().find("leader-failure column constant across n: yes"),
            std::string::npos);
  EXPECT_TRUE(fs::exists(dir.path / "out" / "table2.txt"));
  EXPECT_TRUE(fs::exists(dir.path / "out" / "table2.jsonl"));
}

TEST(CliBinary, RunsAsAnExecutable) {
  TempDir dir("bin");
  fs::path scn = write_scenario_file(dir, static_region(3, 2), "s.scn");
  std::string cmd = std::string(PALE_CLI_PATH) + " run --scenario " +
                    scn.string() + " --out " + (dir.path / "out").string() +
                    " > " + (dir.path / "stdout.txt").string() + " 2>&1";
  int rc = std::system(cmd.c_str());
  EXPECT_EQ(rc, 0) << slurp(dir.path / "stdout.txt");
  EXPECT_TRUE(fs::exists(dir.path / "out" / "trace-2.jsonl"));
}

}  // namespace
}  // namespace pale
