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

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "pale/config.hpp"
#include "pale/errors.hpp"

namespace pale {

// Scenario files: plain key/value lines with nested node blocks.
//
//   # comment
//   name my-run
//   maxRatio 1.0
//   msgDelay 2000
//   node 1 {
//     physScore 0.9
//     roundLength 10000
//     clockRate 1/1
//     churn {
//       down 38000
//       up 45000
//     }
//   }
//
// Full key list in the README. Unknown keys are errors, as are malformed
// numbers; diagnostics carry file and line.

namespace scenario_file_detail {

struct Cursor {
  std::string file;
  std::size_t line = 0;

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(file + ":" + std::to_string(line) + ": " + msg);
  }
};

inline std::vector<std::string> tokens(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  std::string tok;
  while (is >> tok) {
    if (tok[0] == '#') break;
    out.push_back(tok);
  }
  return out;
}

inline double parse_double(const Cursor& c, const std::string& s) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) c.fail("bad number '" + s + "'");
    return v;
  } catch (const ParseError&) {
    throw;
  } catch (...) {
    c.fail("bad number '" + s + "'");
  }
}

inline std::int64_t parse_int(const Cursor& c, const std::string& s) {
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    c.fail("bad integer '" + s + "'");
  return v;
}

inline bool parse_bool(const Cursor& c, const std::string& s) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  c.fail("bad boolean '" + s + "' (want true/false)");
}

}  // namespace scenario_file_detail

inline SimConfig parse_scenario(std::istream& is, const std::string& filename) {
  using namespace scenario_file_detail;
  SimConfig cfg;
  cfg.max_virtual_time = 0;  // must be set explicitly

  enum class Ctx { Top, Node, Churn, ChurnRandom };
  Ctx ctx = Ctx::Top;
  NodeSpec node;
  Cursor cur{filename, 0};
  std::string line;

  while (std::getline(is, line)) {
    ++cur.line;
    auto tok = tokens(line);
    if (tok.empty()) continue;
    const std::string& key = tok[0];
    auto want = [&](std::size_t n) {
      if (tok.size() != n)
        cur.fail("'" + key + "' expects " + std::to_string(n - 1) +
                 " value(s)");
    };
    switch (ctx) {
      case Ctx::Top: {
        if (key == "node") {
          want(3);
          if (tok[2] != "{") cur.fail("expected '{' after node id");
          node = NodeSpec{};
          node.id = static_cast<NodeId>(parse_int(cur, tok[1]));
          ctx = Ctx::Node;
        } else if (key == "name") {
          want(2);
          cfg.name = tok[1];
        } else if (key == "maxRatio") {
          want(2);
          cfg.max_ratio = parse_double(cur, tok[1]);
        } else if (key == "msgDelay") {
          want(2);
          cfg.msg_delay = parse_int(cur, tok[1]);
        } else if (key == "delayMultiplier") {
          want(2);
          cfg.delay_multiplier = static_cast<int>(parse_int(cur, tok[1]));
        } else if (key == "onTimerCost") {
          want(2);
          cfg.on_timer_cost = parse_int(cur, tok[1]);
        } else if (key == "onMsgCost") {
          want(2);
          cfg.on_msg_cost = parse_int(cur, tok[1]);
        } else if (key == "w") {
          want(2);
          cfg.w = parse_double(cur, tok[1]);
        } else if (key == "numOfCopies") {
          want(2);
          cfg.num_of_copies =
              static_cast<std::uint32_t>(parse_int(cur, tok[1]));
        } else if (key == "seed") {
          want(2);
          cfg.seed = static_cast<std::uint64_t>(parse_int(cur, tok[1]));
        } else if (key == "maxVirtualTime") {
          want(2);
          cfg.max_virtual_time = parse_int(cur, tok[1]);
        } else if (key == "lossyMode") {
          want(2);
          cfg.lossy = parse_bool(cur, tok[1]);
        } else if (key == "lossProb") {
          want(2);
          cfg.loss_prob = parse_double(cur, tok[1]);
        } else if (key == "worstCaseDelay") {
          want(2);
          cfg.worst_case_delay = parse_bool(cur, tok[1]);
        } else if (key == "stableNode") {
          want(2);
          cfg.stable_node = static_cast<NodeId>(parse_int(cur, tok[1]));
        } else if (key == "mergeTime") {
          want(2);
          cfg.merge_time = parse_int(cur, tok[1]);
        } else {
          cur.fail("unknown key '" + key + "'");
        }
        break;
      }
      case Ctx::Node: {
        if (key == "}") {
          want(1);
          cfg.nodes.push_back(node);
          ctx = Ctx::Top;
        } else if (key == "physScore") {
          want(2);
          node.phys_score = parse_double(cur, tok[1]);
        } else if (key == "roundLength") {
          want(2);
          node.clock.round_length = parse_int(cur, tok[1]);
        } else if (key == "clockRate") {
          want(2);
          auto slash = tok[1].find('/');
          if (slash == std::string::npos)
            cur.fail("clockRate wants num/den, e.g. 1/1");
          node.clock.rate_num = parse_int(cur, tok[1].substr(0, slash));
          node.clock.rate_den = parse_int(cur, tok[1].substr(slash + 1));
        } else if (key == "region") {
          want(2);
          node.region = static_cast<int>(parse_int(cur, tok[1]));
        } else if (key == "localOffset") {
          want(2);
          node.local_offset = parse_int(cur, tok[1]);
        } else if (key == "churn") {
          want(2);
          if (tok[1] != "{") cur.fail("expected '{' after churn");
          ctx = Ctx::Churn;
        } else if (key == "churnRandom") {
          want(2);
          if (tok[1] != "{") cur.fail("expected '{' after churnRandom");
          node.churn.random = StochasticChurn{};
          ctx = Ctx::ChurnRandom;
        } else {
          cur.fail("unknown node key '" + key + "'");
        }
        break;
      }
      case Ctx::Churn: {
        if (key == "}") {
          want(1);
          ctx = Ctx::Node;
        } else if (key == "down" || key == "up") {
          want(2);
          node.churn.transitions.push_back(
              {parse_int(cur, tok[1]), key == "up"});
        } else {
          cur.fail("churn entries are 'down <t>' or 'up <t>'");
        }
        break;
      }
      case Ctx::ChurnRandom: {
        if (key == "}") {
          want(1);
          ctx = Ctx::Node;
        } else if (key == "failPerRound") {
          want(2);
          node.churn.random->fail_per_round = parse_double(cur, tok[1]);
        } else if (key == "downMin") {
          want(2);
          node.churn.random->down_min = parse_int(cur, tok[1]);
        } else if (key == "downMax") {
          want(2);
          node.churn.random->down_max = parse_int(cur, tok[1]);
        } else {
          cur.fail("unknown churnRandom key '" + key + "'");
        }
        break;
      }
    }
  }
  if (ctx != Ctx::Top) cur.fail("unterminated block at end of file");
  if (cfg.max_virtual_time <= 0)
    cur.fail("scenario must set maxVirtualTime");
  return cfg;
}

inline SimConfig load_scenario(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ParseError(path + ": cannot open scenario file");
  return parse_scenario(is, path);
}

namespace scenario_file_detail {

// Shortest representation that parses back to the same double.
inline std::string fmt(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, p);
}

}  // namespace scenario_file_detail

inline std::string write_scenario(const SimConfig& cfg) {
  using scenario_file_detail::fmt;
  std::ostringstream os;
  if (!cfg.name.empty()) os << "name " << cfg.name << "\n";
  os << "maxRatio " << fmt(cfg.max_ratio) << "\n";
  os << "msgDelay " << cfg.msg_delay << "\n";
  os << "delayMultiplier " << cfg.delay_multiplier << "\n";
  os << "onTimerCost " << cfg.on_timer_cost << "\n";
  os << "onMsgCost " << cfg.on_msg_cost << "\n";
  os << "w " << fmt(cfg.w) << "\n";
  os << "numOfCopies " << cfg.num_of_copies << "\n";
  os << "seed " << cfg.seed << "\n";
  os << "maxVirtualTime " << cfg.max_virtual_time << "\n";
  os << "lossyMode " << (cfg.lossy ? "true" : "false") << "\n";
  os << "lossProb " << fmt(cfg.loss_prob) << "\n";
  os << "worstCaseDelay " << (cfg.worst_case_delay ? "true" : "false") << "\n";
  if (cfg.stable_node) os << "stableNode " << *cfg.stable_node << "\n";
  if (cfg.merge_time) os << "mergeTime " << *cfg.merge_time << "\n";
  for (const auto& n : cfg.nodes) {
    os << "node " << n.id << " {\n";
    os << "  physScore " << fmt(n.phys_score) << "\n";
    os << "  roundLength " << n.clock.round_length << "\n";
    os << "  clockRate " << n.clock.rate_num << "/" << n.clock.rate_den << "\n";
    os << "  region " << n.region << "\n";
    os << "  localOffset " << n.local_offset << "\n";
    if (!n.churn.transitions.empty()) {
      os << "  churn {\n";
      for (const auto& tr : n.churn.transitions)
        os << "    " << (tr.up ? "up " : "down ") << tr.at << "\n";
      os << "  }\n";
    }
    if (n.churn.random) {
      os << "  churnRandom {\n";
      os << "    failPerRound " << fmt(n.churn.random->fail_per_round) << "\n";
      os << "    downMin " << n.churn.random->down_min << "\n";
      os << "    downMax " << n.churn.random->down_max << "\n";
      os << "  }\n";
    }
    os << "}\n";
  }
  return os.str();
}

}  // namespace pale
