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

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pale/cli.hpp"

namespace {

// "7" or "1..100"
bool parse_seed_range(const std::string& s, std::uint64_t& from,
                      std::uint64_t& to) {
  auto dots = s.find("..");
  try {
    if (dots == std::string::npos) {
      from = to = std::stoull(s);
    } else {
      from = std::stoull(s.substr(0, dots));
      to = std::stoull(s.substr(dots + 2));
    }
  } catch (...) {
    return false;
  }
  return from != 0 && to >= from;
}

std::string default_out_dir() {
  if (const char* env = std::getenv("PALE_OUT_DIR")) return env;
  return ".";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "pale: agile leader election in partially asynchronous networks, "
      "simulated deterministically and checked against its guarantees"};
  app.require_subcommand(1);

  // run
  std::string scenario_path;
  std::string seed_range;
  std::string out_dir = default_out_dir();
  std::string check_list = "all";
  std::string regime;
  CLI::App* run = app.add_subcommand("run", "simulate a scenario and check it");
  run->add_option("--scenario", scenario_path, "scenario file")->required();
  run->add_option("--seed", seed_range, "seed k or range k..m");
  run->add_option("--out", out_dir, "output directory for traces/verdicts");
  run->add_option("--check", check_list,
                  "comma list of checks, or 'all' (uniqueness, agreement, "
                  "termination, lemmas, transport, joiner, threshold, oracle, "
                  "merge, messages)");
  run->add_option("--regime", regime,
                  "message regime for the 'messages' check: "
                  "worst|monotonic|mild");

  // table2
  std::string sizes_list = "4,8,16,32";
  std::string t2_out;
  CLI::App* table2 =
      app.add_subcommand("table2", "message complexity summary across sizes");
  table2->add_option("--sizes", sizes_list, "comma list of region sizes");
  table2->add_option("--out", t2_out, "directory for table artifacts");

  // replay
  std::string trace_path;
  long long from = 0;
  long long to = std::numeric_limits<long long>::max();
  CLI::App* replay =
      app.add_subcommand("replay", "narrate a trace window, human readable");
  replay->add_option("--trace", trace_path, "trace file (jsonl)")->required();
  replay->add_option("--from", from, "window start, virtual time");
  replay->add_option("--to", to, "window end, virtual time");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    pale::RunSpec spec;
    spec.scenario_path = scenario_path;
    if (!seed_range.empty() &&
        !parse_seed_range(seed_range, spec.seed_from, spec.seed_to)) {
      std::cerr << "bad --seed '" << seed_range << "' (want k or k..m, k>=1)\n";
      return 2;
    }
    spec.out_dir = out_dir;
    spec.regime = regime;
    spec.checks.clear();
    std::stringstream cs(check_list);
    std::string item;
    while (std::getline(cs, item, ','))
      if (!item.empty()) spec.checks.push_back(item);
    return pale::cmd_run(spec, std::cout, std::cerr);
  }
  if (table2->parsed()) {
    std::vector<int> sizes;
    std::stringstream ss(sizes_list);
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        sizes.push_back(std::stoi(item));
      } catch (...) {
        std::cerr << "bad --sizes entry '" << item << "'\n";
        return 2;
      }
    }
    if (sizes.empty()) {
      std::cerr << "empty --sizes\n";
      return 2;
    }
    return pale::cmd_table2(sizes, t2_out, std::cout, std::cerr);
  }
  if (replay->parsed())
    return pale::cmd_replay(trace_path, from, to, std::cout, std::cerr);
  return 2;
}
