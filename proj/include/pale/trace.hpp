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

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pale/config.hpp"
#include "pale/errors.hpp"
#include "pale/types.hpp"

namespace pale {

using json = nlohmann::ordered_json;

// Record kinds. Up/Down/Timer/Deliver are the events a node experiences;
// Broadcast/Handshake/BecameLeader are the actions it emitted while handling
// the preceding event; the rest is bookkeeping.
enum class TraceKind {
  Config,
  Up,
  Down,
  Timer,
  Deliver,
  Drop,
  Broadcast,
  Handshake,
  BecameLeader,
  Merge,
  End,
};

inline const char* to_cstr(TraceKind k) {
  switch (k) {
    case TraceKind::Config: return "config";
    case TraceKind::Up: return "up";
    case TraceKind::Down: return "down";
    case TraceKind::Timer: return "timer";
    case TraceKind::Deliver: return "deliver";
    case TraceKind::Drop: return "drop";
    case TraceKind::Broadcast: return "bcast";
    case TraceKind::Handshake: return "shake";
    case TraceKind::BecameLeader: return "lead";
    case TraceKind::Merge: return "merge";
    case TraceKind::End: return "end";
  }
  return "?";
}

inline std::optional<TraceKind> trace_kind_from(const std::string& s) {
  for (TraceKind k :
       {TraceKind::Config, TraceKind::Up, TraceKind::Down, TraceKind::Timer,
        TraceKind::Deliver, TraceKind::Drop, TraceKind::Broadcast,
        TraceKind::Handshake, TraceKind::BecameLeader, TraceKind::Merge,
        TraceKind::End})
    if (s == to_cstr(k)) return k;
  return std::nullopt;
}

// Compact view of a node's state carried on every node event, enough for a
// human reading a replay; the digest covers the full state.
struct StateSummary {
  std::uint64_t cnt_rounds = 0;
  std::uint32_t rounds_as_leading = 0;
  std::uint64_t pl0_del_cnt = 0;
  std::uint64_t last_lead_msg = 0;
  Rank rank;
  bool leader = false;
  NodeId best = kNoNode;
  std::uint32_t pl_size = 0;

  friend bool operator==(const StateSummary&, const StateSummary&) = default;
};

struct TraceEvent {
  VirtualTime t = 0;
  std::uint64_t seq = 0;
  NodeId node = kNoNode;  // kNoNode for config/merge/end records
  TraceKind kind = TraceKind::Config;

  LocalTime local = 0;          // up, timer, deliver
  std::uint64_t round_index = 0;  // timer: index of this round since coming up
  BeepMsg msg;                  // deliver, drop, bcast
  NodeId from = kNoNode;        // deliver, drop: sender
  VirtualTime sent_at = 0;      // deliver, drop
  VirtualTime arrived_at = 0;   // deliver: scheduled arrival
  std::uint32_t copies = 0;     // bcast
  NodeId target = kNoNode;      // shake
  std::uint32_t rounds_as_leading = 0;  // lead
  LeaderTie tie;                // lead
  std::string note;             // drop/end: reason
  std::optional<StateSummary> state;
  std::uint64_t digest = 0;

  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

struct Trace {
  SimConfig cfg;
  std::vector<TraceEvent> events;
};

// ---- JSON encoding -------------------------------------------------------

inline json to_json(const Rank& r) {
  if (r.inf) {
    json j;
    j["inf"] = json::array(
        {r.tie ? r.tie->acc_rank : 0.0,
         r.tie ? r.tie->rounds_active : 0,
         r.tie ? r.tie->id : kNoNode});
    return j;
  }
  return json(r.value);
}

inline Rank rank_from_json(const json& j) {
  if (j.is_object()) {
    const auto& t = j.at("inf");
    return Rank::infinity(LeaderTie{t.at(0).get<double>(),
                                    t.at(1).get<std::uint64_t>(),
                                    t.at(2).get<NodeId>()});
  }
  return Rank::finite(j.get<double>());
}

inline json to_json(const BeepMsg& m) {
  json j;
  j["t"] = m.time;
  j["rank"] = to_json(m.rank);
  j["id"] = m.id;
  j["r"] = m.round;
  return j;
}

inline BeepMsg beep_from_json(const json& j) {
  BeepMsg m;
  m.time = j.at("t").get<LocalTime>();
  m.rank = rank_from_json(j.at("rank"));
  m.id = j.at("id").get<NodeId>();
  m.round = j.at("r").get<std::uint32_t>();
  return m;
}

inline json to_json(const SimConfig& cfg) {
  json j;
  j["name"] = cfg.name;
  j["maxRatio"] = cfg.max_ratio;
  j["msgDelay"] = cfg.msg_delay;
  j["D"] = cfg.delay_multiplier;
  j["onTimerCost"] = cfg.on_timer_cost;
  j["onMsgCost"] = cfg.on_msg_cost;
  j["w"] = cfg.w;
  j["copies"] = cfg.num_of_copies;
  j["seed"] = cfg.seed;
  j["maxVirtualTime"] = cfg.max_virtual_time;
  j["lossy"] = cfg.lossy;
  j["lossProb"] = cfg.loss_prob;
  j["worstDelay"] = cfg.worst_case_delay;
  if (cfg.stable_node) j["stable"] = *cfg.stable_node;
  if (cfg.merge_time) j["mergeTime"] = *cfg.merge_time;
  j["nodes"] = json::array();
  for (const auto& n : cfg.nodes) {
    json nj;
    nj["id"] = n.id;
    nj["phys"] = n.phys_score;
    nj["rateNum"] = n.clock.rate_num;
    nj["rateDen"] = n.clock.rate_den;
    nj["roundLen"] = n.clock.round_length;
    nj["region"] = n.region;
    nj["offset"] = n.local_offset;
    if (!n.churn.transitions.empty()) {
      json tr = json::array();
      for (const auto& c : n.churn.transitions)
        tr.push_back(json::array({c.at, c.up ? 1 : 0}));
      nj["churn"] = tr;
    }
    if (n.churn.random) {
      json r;
      r["p"] = n.churn.random->fail_per_round;
      r["min"] = n.churn.random->down_min;
      r["max"] = n.churn.random->down_max;
      nj["churnRandom"] = r;
    }
    j["nodes"].push_back(nj);
  }
  return j;
}

inline SimConfig config_from_json(const json& j) {
  SimConfig cfg;
  cfg.name = j.value("name", std::string());
  cfg.max_ratio = j.at("maxRatio").get<double>();
  cfg.msg_delay = j.at("msgDelay").get<VirtualTime>();
  cfg.delay_multiplier = j.at("D").get<int>();
  cfg.on_timer_cost = j.at("onTimerCost").get<VirtualTime>();
  cfg.on_msg_cost = j.at("onMsgCost").get<VirtualTime>();
  cfg.w = j.at("w").get<double>();
  cfg.num_of_copies = j.at("copies").get<std::uint32_t>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.max_virtual_time = j.at("maxVirtualTime").get<VirtualTime>();
  cfg.lossy = j.at("lossy").get<bool>();
  cfg.loss_prob = j.at("lossProb").get<double>();
  cfg.worst_case_delay = j.at("worstDelay").get<bool>();
  if (j.contains("stable")) cfg.stable_node = j.at("stable").get<NodeId>();
  if (j.contains("mergeTime"))
    cfg.merge_time = j.at("mergeTime").get<VirtualTime>();
  for (const auto& nj : j.at("nodes")) {
    NodeSpec n;
    n.id = nj.at("id").get<NodeId>();
    n.phys_score = nj.at("phys").get<double>();
    n.clock.rate_num = nj.at("rateNum").get<std::int64_t>();
    n.clock.rate_den = nj.at("rateDen").get<std::int64_t>();
    n.clock.round_length = nj.at("roundLen").get<VirtualTime>();
    n.region = nj.at("region").get<int>();
    n.local_offset = nj.at("offset").get<LocalTime>();
    if (nj.contains("churn"))
      for (const auto& c : nj.at("churn"))
        n.churn.transitions.push_back(
            {c.at(0).get<VirtualTime>(), c.at(1).get<int>() != 0});
    if (nj.contains("churnRandom")) {
      StochasticChurn r;
      r.fail_per_round = nj.at("churnRandom").at("p").get<double>();
      r.down_min = nj.at("churnRandom").at("min").get<VirtualTime>();
      r.down_max = nj.at("churnRandom").at("max").get<VirtualTime>();
      n.churn.random = r;
    }
    cfg.nodes.push_back(n);
  }
  return cfg;
}

inline json to_json(const StateSummary& s) {
  json j;
  j["cnt"] = s.cnt_rounds;
  j["lead"] = s.rounds_as_leading;
  j["del"] = s.pl0_del_cnt;
  j["last"] = s.last_lead_msg;
  j["rank"] = to_json(s.rank);
  j["leader"] = s.leader;
  j["best"] = s.best;
  j["pl"] = s.pl_size;
  return j;
}

inline StateSummary state_summary_from_json(const json& j) {
  StateSummary s;
  s.cnt_rounds = j.at("cnt").get<std::uint64_t>();
  s.rounds_as_leading = j.at("lead").get<std::uint32_t>();
  s.pl0_del_cnt = j.at("del").get<std::uint64_t>();
  s.last_lead_msg = j.at("last").get<std::uint64_t>();
  s.rank = rank_from_json(j.at("rank"));
  s.leader = j.at("leader").get<bool>();
  s.best = j.at("best").get<NodeId>();
  s.pl_size = j.at("pl").get<std::uint32_t>();
  return s;
}

namespace detail {

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[i] = digits[v & 0xF];
    v >>= 4;
  }
  return s;
}

inline std::uint64_t from_hex64(const std::string& s) {
  std::uint64_t v = 0;
  for (char c : s) {
    v <<= 4;
    if (c >= '0' && c <= '9')
      v |= static_cast<std::uint64_t>(c - '0');
    else if (c >= 'a' && c <= 'f')
      v |= static_cast<std::uint64_t>(c - 'a' + 10);
  }
  return v;
}

}  // namespace detail

inline json to_json(const TraceEvent& ev, const SimConfig& cfg) {
  json j;
  j["t"] = ev.t;
  j["q"] = ev.seq;
  j["n"] = ev.node;
  j["k"] = to_cstr(ev.kind);
  json p;
  switch (ev.kind) {
    case TraceKind::Config:
      p = to_json(cfg);
      break;
    case TraceKind::Up:
      p["local"] = ev.local;
      break;
    case TraceKind::Down:
    case TraceKind::Merge:
      break;
    case TraceKind::Timer:
      p["local"] = ev.local;
      p["round"] = ev.round_index;
      break;
    case TraceKind::Deliver:
      p["local"] = ev.local;
      p["from"] = ev.from;
      p["sent"] = ev.sent_at;
      p["arr"] = ev.arrived_at;
      p["msg"] = to_json(ev.msg);
      break;
    case TraceKind::Drop:
      p["from"] = ev.from;
      p["sent"] = ev.sent_at;
      p["msg"] = to_json(ev.msg);
      p["why"] = ev.note;
      break;
    case TraceKind::Broadcast:
      p["msg"] = to_json(ev.msg);
      p["copies"] = ev.copies;
      break;
    case TraceKind::Handshake:
      p["to"] = ev.target;
      break;
    case TraceKind::BecameLeader:
      p["lead"] = ev.rounds_as_leading;
      p["tie"] = json::array(
          {ev.tie.acc_rank, ev.tie.rounds_active, ev.tie.id});
      break;
    case TraceKind::End:
      p["why"] = ev.note;
      break;
  }
  if (ev.state) p["st"] = to_json(*ev.state);
  j["p"] = p;
  if (ev.kind != TraceKind::Config) j["d"] = detail::hex64(ev.digest);
  return j;
}

inline TraceEvent event_from_json(const json& j) {
  TraceEvent ev;
  ev.t = j.at("t").get<VirtualTime>();
  ev.seq = j.at("q").get<std::uint64_t>();
  ev.node = j.at("n").get<NodeId>();
  auto kind = trace_kind_from(j.at("k").get<std::string>());
  if (!kind) throw ParseError("trace: unknown event kind");
  ev.kind = *kind;
  const json& p = j.at("p");
  switch (ev.kind) {
    case TraceKind::Config:
      break;
    case TraceKind::Up:
      ev.local = p.at("local").get<LocalTime>();
      break;
    case TraceKind::Down:
    case TraceKind::Merge:
      break;
    case TraceKind::Timer:
      ev.local = p.at("local").get<LocalTime>();
      ev.round_index = p.at("round").get<std::uint64_t>();
      break;
    case TraceKind::Deliver:
      ev.local = p.at("local").get<LocalTime>();
      ev.from = p.at("from").get<NodeId>();
      ev.sent_at = p.at("sent").get<VirtualTime>();
      ev.arrived_at = p.at("arr").get<VirtualTime>();
      ev.msg = beep_from_json(p.at("msg"));
      break;
    case TraceKind::Drop:
      ev.from = p.at("from").get<NodeId>();
      ev.sent_at = p.at("sent").get<VirtualTime>();
      ev.msg = beep_from_json(p.at("msg"));
      ev.note = p.at("why").get<std::string>();
      break;
    case TraceKind::Broadcast:
      ev.msg = beep_from_json(p.at("msg"));
      ev.copies = p.at("copies").get<std::uint32_t>();
      break;
    case TraceKind::Handshake:
      ev.target = p.at("to").get<NodeId>();
      break;
    case TraceKind::BecameLeader:
      ev.rounds_as_leading = p.at("lead").get<std::uint32_t>();
      ev.tie = LeaderTie{p.at("tie").at(0).get<double>(),
                         p.at("tie").at(1).get<std::uint64_t>(),
                         p.at("tie").at(2).get<NodeId>()};
      break;
    case TraceKind::End:
      ev.note = p.at("why").get<std::string>();
      break;
  }
  if (p.contains("st")) ev.state = state_summary_from_json(p.at("st"));
  if (j.contains("d")) ev.digest = detail::from_hex64(j.at("d").get<std::string>());
  return ev;
}

inline void write_trace(const Trace& trace, std::ostream& os) {
  for (const auto& ev : trace.events) os << to_json(ev, trace.cfg) << "\n";
}

inline std::string trace_to_string(const Trace& trace) {
  std::ostringstream os;
  write_trace(trace, os);
  return os.str();
}

inline Trace read_trace(std::istream& is) {
  Trace trace;
  std::string line;
  std::size_t lineno = 0;
  bool saw_config = false;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const std::exception& e) {
      throw ParseError("trace line " + std::to_string(lineno) + ": " +
                       e.what());
    }
    TraceEvent ev = event_from_json(j);
    if (ev.kind == TraceKind::Config) {
      trace.cfg = config_from_json(j.at("p"));
      saw_config = true;
    }
    trace.events.push_back(std::move(ev));
  }
  if (!saw_config) throw ParseError("trace: missing config record");
  return trace;
}

}  // namespace pale
