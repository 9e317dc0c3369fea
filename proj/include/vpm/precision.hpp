#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "vpm/alignment.hpp"
#include "vpm/petri_net.hpp"

namespace vpm {

// Visible labels that become enabled from `m` after any number of silent
// firings. Exploration stops after `limit` markings.
std::set<std::string> enabled_visible_closure(const PetriNet& net, const Marking& m, std::size_t limit = 100000);

struct PrecisionReport {
  double precision = 1.0;
  std::int64_t reflected = 0;  // sum of w(s) * |reflected(s)|
  std::int64_t available = 0;  // sum of w(s) * |available(s)|
  std::size_t states = 0;
  std::size_t escaping = 0;    // distinct (state, label) pairs never observed

  std::string to_json() const;
};

// Escaping-edges precision on optimal alignments. States are the visible
// prefixes of the aligned model runs that are followed by another event.
// Throws EmptyLog.
PrecisionReport etc_precision_report(const std::vector<LabelSequence>& log, const PetriNet& net,
                                     const AlignOptions& options = {});
double etc_precision(const std::vector<LabelSequence>& log, const PetriNet& net, const AlignOptions& options = {});

}  // namespace vpm
