#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "vpm/petri_net.hpp"

namespace vpm {

enum class TreeOp { activity, tau, sequence, exclusive, parallel, loop };

// Block-structured process model. A loop's first child is the do-part, the
// others are redo-parts: do (redo_i do)*.
struct ProcessTree {
  TreeOp op = TreeOp::tau;
  std::string label;  // activities only
  std::vector<ProcessTree> children;

  static ProcessTree activity(std::string label);
  static ProcessTree silent();
  static ProcessTree sequence(std::vector<ProcessTree> children);
  static ProcessTree exclusive(std::vector<ProcessTree> children);
  static ProcessTree parallel(std::vector<ProcessTree> children);
  static ProcessTree loop(std::vector<ProcessTree> children);

  // Throws Error on operators with fewer than two children (one for
  // sequence/exclusive/parallel is tolerated) or loops with fewer than two.
  void validate() const;

  std::size_t activity_count() const;
  int depth() const;

  friend bool operator==(const ProcessTree&, const ProcessTree&) = default;
};

// Notation: a, tau, ->(..), X(..), +(..), *(..).
std::string to_string(const ProcessTree& tree);

// Sound workflow net with places `source` and `sink`; silent transitions
// route the operators.
PetriNet tree_to_net(const ProcessTree& tree);

struct Variant {
  std::string name;
  std::vector<std::string> activities;
};

// Lines "name: act1,act2,..."; blank lines and lines starting with '#' are
// skipped. Throws ParseError and DuplicateVariantName.
std::vector<Variant> parse_variant_spec(std::istream& in);
std::vector<Variant> load_variant_spec_file(const std::string& path);

// Exclusive choice over the variants, with shared prefixes factored out.
ProcessTree build_tree_from_variants(const std::vector<Variant>& variants);
PetriNet build_model_from_variants(const std::vector<Variant>& variants);

}  // namespace vpm
