#include "vpm/alignment.hpp"

#include <algorithm>
#include <queue>
#include <tuple>
#include <unordered_map>

#include "json.hpp"
#include "vpm/error.hpp"

namespace vpm {

LabelSequence activity_sequence(const Trace& trace) {
  LabelSequence out;
  bool has_start = std::any_of(trace.events.begin(), trace.events.end(),
                               [](const HighLevelEvent& e) { return e.lifecycle == Lifecycle::start; });
  const Lifecycle wanted = has_start ? Lifecycle::start : Lifecycle::complete;
  for (const auto& e : trace.events) {
    if (e.lifecycle == wanted) out.push_back(e.cls.label());
  }
  return out;
}

std::vector<LabelSequence> activity_sequences(const EventLog& log) {
  std::vector<LabelSequence> out;
  out.reserve(log.traces.size());
  for (const auto& t : log.traces) out.push_back(activity_sequence(t));
  return out;
}

bool Move::silent_model() const { return type == MoveType::model && label.empty(); }

std::size_t Alignment::count(MoveType type) const {
  return static_cast<std::size_t>(std::count_if(moves.begin(), moves.end(), [&](const Move& m) { return m.type == type; }));
}

std::size_t Alignment::silent_moves() const {
  return static_cast<std::size_t>(std::count_if(moves.begin(), moves.end(), [](const Move& m) { return m.silent_model(); }));
}

std::size_t Alignment::visible_model_moves() const { return count(MoveType::model) - silent_moves(); }

std::vector<std::size_t> Alignment::firing_sequence() const {
  std::vector<std::size_t> out;
  for (const auto& m : moves) {
    if (m.transition) out.push_back(*m.transition);
  }
  return out;
}

namespace {

struct StateKey {
  Marking marking;
  std::uint32_t pos;
  bool operator==(const StateKey&) const = default;
};

struct StateHash {
  std::size_t operator()(const StateKey& k) const {
    std::size_t h = 0x9e3779b97f4a7c15ULL ^ k.pos;
    for (auto c : k.marking) h = (h ^ c) * 0x100000001b3ULL + (h >> 29);
    return h;
  }
};

struct Node {
  Marking marking;
  std::uint32_t pos;
  std::int64_t g;
  std::int64_t parent;
  MoveType move;
  std::int64_t transition;  // -1 for log moves
};

struct StateInfo {
  std::int64_t g;
  bool closed;
};

}  // namespace

Alignment align_trace(const LabelSequence& trace, const PetriNet& net, const AlignOptions& options) {
  net.validate();
  const auto& c = options.costs;
  if (c.synchronous < 0 || c.silent_model < 0 || c.visible_model < 0 || c.log < 0) {
    throw Error("alignment costs must be non-negative");
  }
  const auto labels = net.visible_labels();
  const std::size_t n = trace.size();
  std::vector<std::int64_t> unknown_suffix(n + 1, 0);
  for (std::size_t i = n; i-- > 0;) unknown_suffix[i] = unknown_suffix[i + 1] + (labels.count(trace[i]) ? 0 : 1);
  auto h = [&](std::uint32_t pos) { return unknown_suffix[pos] * c.log; };

  std::vector<Node> nodes;
  std::unordered_map<StateKey, StateInfo, StateHash> states;
  using Entry = std::tuple<std::int64_t, std::int64_t, std::size_t>;  // f, -pos, node
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;

  auto relax = [&](Marking m, std::uint32_t pos, std::int64_t g, std::int64_t parent, MoveType mt, std::int64_t t) {
    StateKey key{m, pos};
    auto it = states.find(key);
    if (it != states.end() && (it->second.closed || it->second.g <= g)) return;
    states[key] = {g, false};
    nodes.push_back({std::move(m), pos, g, parent, mt, t});
    open.emplace(g + h(pos), -static_cast<std::int64_t>(pos), nodes.size() - 1);
  };

  relax(net.initial_marking(), 0, 0, -1, MoveType::log, -1);
  std::size_t explored = 0;
  while (!open.empty()) {
    auto [f, negpos, idx] = open.top();
    open.pop();
    StateKey key{nodes[idx].marking, nodes[idx].pos};
    auto& info = states[key];
    if (info.closed || info.g < nodes[idx].g) continue;
    info.closed = true;
    if (++explored > options.state_budget) throw StateBudgetExceeded(options.state_budget);

    const Node node = nodes[idx];
    if (node.pos == n && node.marking == net.final_marking()) {
      Alignment a;
      a.cost = node.g;
      a.explored_states = explored;
      for (std::int64_t i = static_cast<std::int64_t>(idx); nodes[i].parent >= 0; i = nodes[i].parent) {
        const Node& cur = nodes[i];
        Move mv;
        mv.type = cur.move;
        if (cur.move == MoveType::log || cur.move == MoveType::synchronous) {
          mv.label = trace[cur.pos - 1];
        }
        if (cur.transition >= 0) {
          mv.transition = static_cast<std::size_t>(cur.transition);
          if (cur.move == MoveType::model) {
            const auto& lbl = net.transitions()[mv.transition.value()].label;
            mv.label = lbl ? *lbl : std::string{};
          }
        }
        a.moves.push_back(std::move(mv));
      }
      std::reverse(a.moves.begin(), a.moves.end());
      return a;
    }

    for (std::size_t t : net.enabled_transitions(node.marking)) {
      Marking next = net.fire(node.marking, t);
      const auto& lbl = net.transitions()[t].label;
      const auto ti = static_cast<std::int64_t>(t);
      if (lbl) {
        if (node.pos < n && *lbl == trace[node.pos]) {
          relax(next, node.pos + 1, node.g + c.synchronous, static_cast<std::int64_t>(idx), MoveType::synchronous, ti);
        }
        relax(std::move(next), node.pos, node.g + c.visible_model, static_cast<std::int64_t>(idx), MoveType::model, ti);
      } else {
        relax(std::move(next), node.pos, node.g + c.silent_model, static_cast<std::int64_t>(idx), MoveType::model, ti);
      }
    }
    if (node.pos < n) {
      relax(node.marking, node.pos + 1, node.g + c.log, static_cast<std::int64_t>(idx), MoveType::log, -1);
    }
  }
  throw FinalUnreachable("final marking is unreachable from the initial marking");
}

FitnessReport log_fitness(const std::vector<LabelSequence>& log, const PetriNet& net, const AlignOptions& options,
                          FitnessAggregation aggregation) {
  FitnessReport report;
  report.model_only_cost = align_trace({}, net, options).cost;
  std::map<LabelSequence, Alignment> cache;
  std::int64_t denominators = 0;
  double fitness_sum = 0.0;
  for (const auto& trace : log) {
    auto it = cache.find(trace);
    if (it == cache.end()) it = cache.emplace(trace, align_trace(trace, net, options)).first;
    const Alignment& a = it->second;
    TraceFitness tf;
    tf.cost = a.cost;
    tf.denominator = static_cast<std::int64_t>(trace.size()) * options.costs.log + report.model_only_cost;
    tf.fitness = tf.denominator > 0 ? 1.0 - static_cast<double>(tf.cost) / static_cast<double>(tf.denominator) : 1.0;
    tf.synchronous = a.count(MoveType::synchronous);
    tf.log = a.count(MoveType::log);
    tf.model = a.visible_model_moves();
    tf.silent = a.silent_moves();
    report.synchronous += tf.synchronous;
    report.log_moves += tf.log;
    report.model_moves += tf.model;
    report.silent_moves += tf.silent;
    report.total_cost += tf.cost;
    denominators += tf.denominator;
    fitness_sum += tf.fitness;
    report.traces.push_back(tf);
  }
  if (aggregation == FitnessAggregation::trace_average) {
    report.fitness = log.empty() ? 1.0 : fitness_sum / static_cast<double>(log.size());
  } else {
    report.fitness = denominators > 0 ? 1.0 - static_cast<double>(report.total_cost) / static_cast<double>(denominators) : 1.0;
  }
  return report;
}

std::string FitnessReport::to_json() const {
  nlohmann::ordered_json j;
  j["fitness"] = fitness;
  j["traces"] = traces.size();
  j["synchronous_moves"] = synchronous;
  j["log_moves"] = log_moves;
  j["model_moves"] = model_moves;
  j["silent_moves"] = silent_moves;
  j["total_cost"] = total_cost;
  j["model_only_cost"] = model_only_cost;
  nlohmann::ordered_json per = nlohmann::ordered_json::array();
  for (const auto& t : traces) {
    per.push_back({{"fitness", t.fitness},
                   {"cost", t.cost},
                   {"synchronous", t.synchronous},
                   {"log", t.log},
                   {"model", t.model}});
  }
  j["per_trace"] = per;
  return j.dump(2) + "\n";
}

}  // namespace vpm
