#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vpm/event_model.hpp"
#include "vpm/petri_net.hpp"

namespace vpm {

using LabelSequence = std::vector<std::string>;

// Activity labels of a trace: its start events in trace order, or its
// complete events when the trace has no start events.
LabelSequence activity_sequence(const Trace& trace);
std::vector<LabelSequence> activity_sequences(const EventLog& log);

struct AlignmentCosts {
  std::int64_t synchronous = 0;
  std::int64_t silent_model = 0;
  std::int64_t visible_model = 1;
  std::int64_t log = 1;
};

inline constexpr std::size_t kDefaultStateBudget = 1'000'000;

struct AlignOptions {
  AlignmentCosts costs;
  std::size_t state_budget = kDefaultStateBudget;
};

enum class MoveType { synchronous, log, model };

struct Move {
  MoveType type = MoveType::log;
  // Trace label for synchronous and log moves, transition label for visible
  // model moves, empty for silent model moves.
  std::string label;
  std::optional<std::size_t> transition;

  bool silent_model() const;
};

struct Alignment {
  std::vector<Move> moves;
  std::int64_t cost = 0;
  std::size_t explored_states = 0;

  std::size_t count(MoveType type) const;
  std::size_t silent_moves() const;
  std::size_t visible_model_moves() const;
  // Transitions fired by synchronous and model moves, in order.
  std::vector<std::size_t> firing_sequence() const;
};

// Minimum-cost alignment by A* over (marking, trace position). The heuristic
// counts remaining events whose label no transition carries. Throws
// FinalUnreachable or StateBudgetExceeded.
Alignment align_trace(const LabelSequence& trace, const PetriNet& net, const AlignOptions& options = {});

enum class FitnessAggregation { cost_sum, trace_average };

struct TraceFitness {
  double fitness = 1.0;
  std::int64_t cost = 0;
  std::int64_t denominator = 0;
  std::size_t synchronous = 0, log = 0, model = 0, silent = 0;
};

struct FitnessReport {
  double fitness = 1.0;
  std::vector<TraceFitness> traces;
  std::size_t synchronous = 0, log_moves = 0, model_moves = 0, silent_moves = 0;
  std::int64_t total_cost = 0;
  std::int64_t model_only_cost = 0;

  std::string to_json() const;
};

// Trace fitness is 1 - cost / (cost of all log moves + cheapest model-only
// run). Log fitness uses the ratio of summed costs by default.
FitnessReport log_fitness(const std::vector<LabelSequence>& log, const PetriNet& net, const AlignOptions& options = {},
                          FitnessAggregation aggregation = FitnessAggregation::cost_sum);

}  // namespace vpm
