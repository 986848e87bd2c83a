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

#pragma once

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "pale/checkers.hpp"
#include "pale/scenario_file.hpp"
#include "pale/scenarios.hpp"
#include "pale/sim.hpp"
#include "pale/trace.hpp"

namespace pale {

struct RunSpec {
  std::string scenario_path;
  std::uint64_t seed_from = 0;  // 0/0: use the scenario's own seed
  std::uint64_t seed_to = 0;
  std::string out_dir;
  std::vector<std::string> checks{"all"};
  std::string regime;  // "", "worst", "monotonic", "mild"
};

inline const std::vector<std::string>& known_checks() {
  static const std::vector<std::string> names = {
      "uniqueness", "agreement", "termination", "lemmas",
      "transport",  "joiner",    "threshold",   "oracle",
      "merge",      "messages"};
  return names;
}

// Applies one named checker group to a trace.
inline std::vector<Verdict> apply_check(const Trace& trace,
                                        const std::string& name,
                                        const std::string& regime) {
  std::vector<Verdict> out;
  if (name == "uniqueness") {
    out.push_back(check_uniqueness(trace));
  } else if (name == "agreement") {
    out.push_back(check_agreement(trace));
  } else if (name == "termination") {
    out.push_back(check_termination_bound(trace, trace.cfg));
  } else if (name == "lemmas") {
    out.push_back(check_handling_delay_bound(trace));
    out.push_back(check_beep_gap_bound(trace));
  } else if (name == "transport") {
    out.push_back(check_delivery_bound(trace));
    out.push_back(check_drift_bound(trace));
  } else if (name == "joiner") {
    out.push_back(check_joiner_latency(trace));
  } else if (name == "threshold") {
    out.push_back(check_leader_threshold(trace));
  } else if (name == "oracle") {
    out.push_back(oracle_replay(trace));
  } else if (name == "merge") {
    out.push_back(check_merge_convergence(trace));
  } else if (name == "messages") {
    Regime r;
    if (regime == "worst")
      r = Regime::Worst;
    else if (regime == "monotonic")
      r = Regime::Monotonic;
    else if (regime == "mild")
      r = Regime::Mild;
    else
      throw ConfigError("check 'messages' needs --regime worst|monotonic|mild");
    out.push_back(measure_messages(trace, r));
  } else {
    throw ConfigError("unknown check '" + name + "'");
  }
  return out;
}

// Expands "all" into every check applicable to this config.
inline std::vector<std::string> resolve_checks(
    const std::vector<std::string>& requested, const SimConfig& cfg,
    const std::string& regime) {
  std::vector<std::string> names;
  for (const auto& c : requested) {
    if (c != "all") {
      names.push_back(c);
      continue;
    }
    names.insert(names.end(),
                 {"uniqueness", "agreement", "lemmas", "transport", "joiner",
                  "threshold"});
    if (cfg.stable_node && !cfg.merge_time) names.push_back("termination");
    if (cfg.nodes.size() <= 5 && !cfg.merge_time) names.push_back("oracle");
    if (cfg.merge_time) names.push_back("merge");
    if (!regime.empty()) names.push_back("messages");
  }
  return names;
}

inline int cmd_run(const RunSpec& spec, std::ostream& out, std::ostream& err) {
  SimConfig cfg;
  try {
    cfg = load_scenario(spec.scenario_path);
  } catch (const ParseError& e) {
    err << "scenario parse error: " << e.what() << "\n";
    return 2;
  }
  auto violations = validate_config(cfg);
  if (!violations.empty()) {
    err << "scenario rejected, assumption violations:\n" << describe(violations);
    return 2;
  }

  std::vector<std::uint64_t> seeds;
  if (spec.seed_from == 0 && spec.seed_to == 0)
    seeds.push_back(cfg.seed);
  else
    for (std::uint64_t s = spec.seed_from; s <= spec.seed_to; ++s)
      seeds.push_back(s);
  if (seeds.empty()) {
    err << "empty seed range\n";
    return 2;
  }

  std::filesystem::path dir(spec.out_dir.empty() ? "." : spec.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    err << "cannot create output directory " << dir << ": " << ec.message()
        << "\n";
    return 2;
  }

  std::vector<std::string> checks;
  bool all_pass = true;
  std::map<std::string, std::pair<int, int>> tally;  // name -> (pass, total)
  std::ostringstream summary;

  for (std::uint64_t seed : seeds) {
    SimConfig run_cfg = cfg;
    run_cfg.seed = seed;
    Trace trace;
    try {
      trace = run_sim(run_cfg);
    } catch (const ScenarioError& e) {
      err << "seed " << seed << ": scenario error: " << e.what() << "\n";
      return 2;
    }
    {
      std::ofstream tf(dir / ("trace-" + std::to_string(seed) + ".jsonl"));
      write_trace(trace, tf);
    }
    checks = resolve_checks(spec.checks, run_cfg, spec.regime);
    std::ofstream vf(dir / ("verdicts-" + std::to_string(seed) + ".jsonl"));
    for (const auto& name : checks) {
      std::vector<Verdict> verdicts;
      try {
        verdicts = apply_check(trace, name, spec.regime);
      } catch (const ConfigError& e) {
        err << "check '" << name << "': " << e.what() << "\n";
        return 2;
      }
      for (const auto& v : verdicts) {
        vf << to_json(v) << "\n";
        auto& [pass, total] = tally[v.property];
        ++total;
        bool ok = v.pass || v.downgraded;
        if (ok) ++pass;
        all_pass = all_pass && ok;
        summary << "seed " << seed << ": " << summary_line(v) << "\n";
      }
    }
  }

  std::ostringstream table;
  table << "runs: " << seeds.size() << "  scenario: " << cfg.name << "\n";
  for (const auto& [name, pt] : tally)
    table << "  " << std::left << std::setw(22) << name << " " << pt.first
          << "/" << pt.second << " pass\n";
  table << (all_pass ? "ALL CHECKS PASS" : "CHECK FAILURES PRESENT") << "\n";

  {
    std::ofstream sf(dir / "summary.txt");
    sf << table.str() << "\n" << summary.str();
  }
  out << table.str();
  return all_pass ? 0 : 1;
}

// Message-complexity summary across region sizes: per-round worst case,
// monotonic join/leave totals, and the post-failure cost of replacing a
// leader. Exit is nonzero if a measured value breaks its bound or the
// monotonic totals stray from a linear fit by more than 15%.
inline int cmd_table2(const std::vector<int>& sizes, const std::string& out_dir,
                      std::ostream& out, std::ostream& err) {
  struct Row {
    int n;
    double worst, join, leave, mild;
    bool worst_ok, join_ok, leave_ok, mild_ok;
  };
  std::vector<Row> rows;
  try {
    for (int n : sizes) {
      Row row{};
      row.n = n;
      {
        Trace t = run_sim(worst_case_churn(n, 1));
        Verdict v = measure_messages(t, Regime::Worst);
        row.worst = *v.measured;
        row.worst_ok = v.pass;
      }
      {
        Trace t = run_sim(monotonic_join(n, 1));
        Verdict v = measure_messages(t, Regime::Monotonic);
        row.join = *v.measured;
        row.join_ok = v.pass;
      }
      {
        Trace t = run_sim(monotonic_leave(n, 1));
        Verdict v = measure_messages(t, Regime::Monotonic);
        row.leave = *v.measured;
        row.leave_ok = v.pass;
      }
      {
        Trace t = run_sim(mild_leader_failure(n, 1));
        Verdict v = measure_messages(t, Regime::Mild);
        row.mild = *v.measured;
        row.mild_ok = v.pass;
      }
      rows.push_back(row);
    }
  } catch (const std::exception& e) {
    err << "table2: " << e.what() << "\n";
    return 2;
  }

  // Least-squares fit total = a*n + b for the monotonic columns; relative
  // RMS residual must stay within 15%.
  auto fit_residual = [&](auto pick) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    double count = static_cast<double>(rows.size());
    for (const Row& r : rows) {
      sx += r.n;
      sy += pick(r);
      sxx += static_cast<double>(r.n) * r.n;
      sxy += r.n * pick(r);
    }
    double denom = count * sxx - sx * sx;
    double a = (count * sxy - sx * sy) / denom;
    double b = (sy - a * sx) / count;
    double ss = 0, mean = sy / count;
    for (const Row& r : rows) {
      double resid = pick(r) - (a * r.n + b);
      ss += resid * resid;
    }
    return std::sqrt(ss / count) / (mean > 0 ? mean : 1.0);
  };
  double join_resid = fit_residual([](const Row& r) { return r.join; });
  double leave_resid = fit_residual([](const Row& r) { return r.leave; });
  bool join_linear = join_resid <= 0.15;
  bool leave_linear = leave_resid <= 0.15;
  bool mild_constant = true;
  for (const Row& r : rows) mild_constant &= (r.mild == rows.front().mild);

  std::ostringstream os;
  os << "message complexity summary (one run per cell)\n";
  os << "  n    worst per-round    monotonic join    monotonic leave    leader failure\n";
  os << "       [O(n) per round]   [O(n) total]      [O(n) total]       [O(1)]\n";
  for (const Row& r : rows) {
    os << std::setw(4) << r.n << "   " << std::setw(12) << r.worst
       << (r.worst_ok ? "  ok" : "  FAIL") << "     " << std::setw(10)
       << r.join << (r.join_ok ? "  ok" : "  FAIL") << "      " << std::setw(10)
       << r.leave << (r.leave_ok ? "  ok" : "  FAIL") << "       "
       << std::setw(8) << r.mild << (r.mild_ok ? "  ok" : "  FAIL") << "\n";
  }
  os << "monotonic join linear fit residual  " << std::fixed
     << std::setprecision(1) << 100 * join_resid << "% "
     << (join_linear ? "(ok)" : "(FAIL)") << "\n";
  os << "monotonic leave linear fit residual " << 100 * leave_resid << "% "
     << (leave_linear ? "(ok)" : "(FAIL)") << "\n";
  os << "leader-failure column constant across n: "
     << (mild_constant ? "yes" : "NO") << "\n";
  out << os.str();

  if (!out_dir.empty()) {
    std::filesystem::path dir(out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
      err << "cannot create output directory " << dir << "\n";
      return 2;
    }
    std::ofstream tf(dir / "table2.txt");
    tf << os.str();
    std::ofstream rf(dir / "table2.jsonl");
    for (const Row& r : rows) {
      json j;
      j["n"] = r.n;
      j["worstPerRound"] = r.worst;
      j["monotonicJoinTotal"] = r.join;
      j["monotonicLeaveTotal"] = r.leave;
      j["leaderFailureTotal"] = r.mild;
      rf << j << "\n";
    }
  }

  bool ok = join_linear && leave_linear && mild_constant;
  for (const Row& r : rows)
    ok = ok && r.worst_ok && r.join_ok && r.leave_ok && r.mild_ok;
  return ok ? 0 : 1;
}

namespace cli_detail {

inline std::string describe_state_delta(const StateSummary& prev,
                                        const StateSummary& cur) {
  std::ostringstream os;
  if (prev.rank != cur.rank)
    os << " rank " << to_string(prev.rank) << "->" << to_string(cur.rank);
  if (prev.rounds_as_leading != cur.rounds_as_leading)
    os << " lead " << prev.rounds_as_leading << "->" << cur.rounds_as_leading;
  if (prev.pl0_del_cnt != cur.pl0_del_cnt)
    os << " del " << prev.pl0_del_cnt << "->" << cur.pl0_del_cnt;
  if (prev.best != cur.best) os << " best " << prev.best << "->" << cur.best;
  if (prev.leader != cur.leader)
    os << " leader " << prev.leader << "->" << cur.leader;
  if (prev.pl_size != cur.pl_size)
    os << " pl " << prev.pl_size << "->" << cur.pl_size;
  return os.str();
}

inline std::string narrate(const TraceEvent& ev,
                           std::map<NodeId, StateSummary>& last) {
  std::ostringstream os;
  os << "t=" << std::setw(9) << ev.t << " ";
  switch (ev.kind) {
    case TraceKind::Config:
      os << "config";
      break;
    case TraceKind::Up:
      os << "node " << ev.node << " up (local clock " << ev.local << ")";
      break;
    case TraceKind::Down:
      os << "node " << ev.node << " DOWN, state discarded";
      break;
    case TraceKind::Timer:
      os << "node " << ev.node << " round " << ev.round_index;
      break;
    case TraceKind::Deliver:
      os << "node " << ev.node << " <- beep from " << ev.from << " rank="
         << to_string(ev.msg.rank) << " round=" << ev.msg.round << " sent@"
         << ev.sent_at;
      break;
    case TraceKind::Drop:
      os << "node " << ev.node << " misses beep from " << ev.from << " ("
         << ev.note << ")";
      break;
    case TraceKind::Broadcast:
      os << "node " << ev.node << " -> beep rank=" << to_string(ev.msg.rank)
         << " round=" << ev.msg.round << " x" << ev.copies;
      break;
    case TraceKind::Handshake:
      os << "node " << ev.node << " HANDSHAKE with " << ev.target;
      break;
    case TraceKind::BecameLeader:
      os << "node " << ev.node << " BECAME LEADER at roundsAsLeading="
         << ev.rounds_as_leading;
      break;
    case TraceKind::Merge:
      os << "regions merged into one broadcast domain";
      break;
    case TraceKind::End:
      os << "run ended: " << ev.note;
      break;
  }
  if (ev.state) {
    auto it = last.find(ev.node);
    if (it != last.end()) {
      std::string delta = describe_state_delta(it->second, *ev.state);
      if (!delta.empty()) os << "  |" << delta;
    }
    last[ev.node] = *ev.state;
  }
  return os.str();
}

}  // namespace cli_detail

inline int cmd_replay(const std::string& trace_path, VirtualTime from,
                      VirtualTime to, std::ostream& out, std::ostream& err) {
  Trace trace;
  try {
    std::ifstream is(trace_path);
    if (!is) {
      err << "cannot open trace " << trace_path << "\n";
      return 2;
    }
    trace = read_trace(is);
  } catch (const std::exception& e) {
    err << "trace error: " << e.what() << "\n";
    return 2;
  }
  std::map<NodeId, StateSummary> last;
  for (const auto& ev : trace.events) {
    std::string line = cli_detail::narrate(ev, last);
    if (ev.t >= from && ev.t <= to) out << line << "\n";
  }
  return 0;
}

}  // namespace pale
