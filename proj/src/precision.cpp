#include "vpm/precision.hpp"

#include <map>

#include "json.hpp"
#include "vpm/error.hpp"

namespace vpm {

std::set<std::string> enabled_visible_closure(const PetriNet& net, const Marking& m, std::size_t limit) {
  std::set<std::string> labels;
  std::set<Marking> seen{m};
  std::vector<Marking> stack{m};
  while (!stack.empty() && seen.size() <= limit) {
    Marking cur = std::move(stack.back());
    stack.pop_back();
    for (std::size_t t : net.enabled_transitions(cur)) {
      const auto& tr = net.transitions()[t];
      if (tr.label) {
        labels.insert(*tr.label);
      } else {
        Marking next = net.fire(cur, t);
        if (seen.insert(next).second) stack.push_back(std::move(next));
      }
    }
  }
  return labels;
}

namespace {

struct PrefixState {
  std::int64_t weight = 0;
  std::set<std::string> reflected;
  std::set<Marking> markings;
};

}  // namespace

PrecisionReport etc_precision_report(const std::vector<LabelSequence>& log, const PetriNet& net,
                                     const AlignOptions& options) {
  if (log.empty()) throw EmptyLog("precision needs at least one trace");
  std::map<LabelSequence, Alignment> cache;
  std::map<LabelSequence, PrefixState> states;
  for (const auto& trace : log) {
    auto it = cache.find(trace);
    if (it == cache.end()) it = cache.emplace(trace, align_trace(trace, net, options)).first;
    // Each prefix is represented by the marking right after its last visible
    // firing; silent continuations are covered by the closure.
    Marking m = net.initial_marking();
    Marking anchor = m;
    LabelSequence prefix;
    for (std::size_t t : it->second.firing_sequence()) {
      const auto& label = net.transitions()[t].label;
      m = net.fire(m, t);
      if (!label) continue;
      auto& s = states[prefix];
      ++s.weight;
      s.reflected.insert(*label);
      s.markings.insert(anchor);
      prefix.push_back(*label);
      anchor = m;
    }
  }
  PrecisionReport report;
  for (const auto& [prefix, s] : states) {
    if (s.weight == 0) continue;
    std::set<std::string> available;
    for (const auto& m : s.markings) {
      auto labels = enabled_visible_closure(net, m);
      available.insert(labels.begin(), labels.end());
    }
    available.insert(s.reflected.begin(), s.reflected.end());
    ++report.states;
    report.reflected += s.weight * static_cast<std::int64_t>(s.reflected.size());
    report.available += s.weight * static_cast<std::int64_t>(available.size());
    report.escaping += available.size() - s.reflected.size();
  }
  report.precision = report.available == 0 ? 1.0
                                           : static_cast<double>(report.reflected) / static_cast<double>(report.available);
  return report;
}

double etc_precision(const std::vector<LabelSequence>& log, const PetriNet& net, const AlignOptions& options) {
  return etc_precision_report(log, net, options).precision;
}

std::string PrecisionReport::to_json() const {
  nlohmann::ordered_json j;
  j["precision"] = precision;
  j["reflected"] = reflected;
  j["available"] = available;
  j["states"] = states;
  j["escaping_edges"] = escaping;
  return j.dump(2) + "\n";
}

}  // namespace vpm
