#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "vpm/alignment.hpp"
#include "vpm/process_tree.hpp"

namespace vpm {

// Multiset of activity sequences.
using VariantLog = std::map<LabelSequence, std::int64_t>;

VariantLog to_variant_log(const std::vector<LabelSequence>& traces);

struct DirectlyFollowsGraph {
  std::set<std::string> activities;
  std::map<std::pair<std::string, std::string>, std::int64_t> edges;
  std::map<std::string, std::int64_t> start;
  std::map<std::string, std::int64_t> end;
  std::map<std::string, std::int64_t> counts;
  std::int64_t traces = 0;
  std::int64_t empty_traces = 0;

  bool has_edge(const std::string& a, const std::string& b) const;
  std::int64_t edge(const std::string& a, const std::string& b) const;
};

DirectlyFollowsGraph build_dfg(const VariantLog& log);

// Drops a->b when its frequency is below f times the strongest edge leaving
// a. Start and end activities are thinned by the same rule.
DirectlyFollowsGraph filter_dfg(const DirectlyFollowsGraph& dfg, double f);

// Inductive Miner - infrequent with noise threshold f in [0,1].
ProcessTree discover_imf(const VariantLog& log, double f);
ProcessTree discover_imf(const std::vector<LabelSequence>& traces, double f);

}  // namespace vpm
