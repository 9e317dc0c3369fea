#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace vpm {

// Token count per place, indexed like PetriNet::places().
using Marking = std::vector<std::uint32_t>;

struct Transition {
  std::string id;
  // Empty for silent (tau) transitions.
  std::optional<std::string> label;
  std::vector<std::size_t> inputs;
  std::vector<std::size_t> outputs;

  bool silent() const { return !label.has_value(); }
};

// Labeled place/transition net with unit arc weights. Arcs only connect a
// place to a transition or a transition to a place.
class PetriNet {
 public:
  std::size_t add_place(std::string name);
  std::size_t add_transition(std::string id, std::optional<std::string> label);
  void add_input_arc(std::size_t place, std::size_t transition);
  void add_output_arc(std::size_t transition, std::size_t place);

  const std::vector<std::string>& places() const { return places_; }
  const std::vector<Transition>& transitions() const { return transitions_; }
  std::size_t arc_count() const;

  void set_initial_marking(Marking m) { initial_ = std::move(m); }
  void set_final_marking(Marking m) { final_ = std::move(m); }
  const Marking& initial_marking() const { return initial_; }
  const Marking& final_marking() const { return final_; }
  Marking empty_marking() const { return Marking(places_.size(), 0); }

  bool is_enabled(const Marking& m, std::size_t transition) const;
  std::vector<std::size_t> enabled_transitions(const Marking& m) const;
  // Throws NotEnabled.
  Marking fire(const Marking& m, std::size_t transition) const;

  std::set<std::string> visible_labels() const;

  // Throws InvalidNet on empty or mis-sized markings or dangling indices.
  void validate() const;

 private:
  std::vector<std::string> places_;
  std::vector<Transition> transitions_;
  Marking initial_;
  Marking final_;
};

// PNML (ptnet grammar) with a <finalmarkings> block. Silent transitions carry
// the ProM `$invisible$` tool-specific marker.
std::string export_pnml(const PetriNet& net);
PetriNet import_pnml(std::string_view xml);
PetriNet import_pnml_file(const std::string& path);

}  // namespace vpm
