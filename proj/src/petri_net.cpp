#include "vpm/petri_net.hpp"

#include <algorithm>
#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <fstream>
#include <map>
#include <sstream>

#include "vpm/error.hpp"

namespace vpm {

std::size_t PetriNet::add_place(std::string name) {
  places_.push_back(std::move(name));
  initial_.resize(places_.size(), 0);
  final_.resize(places_.size(), 0);
  return places_.size() - 1;
}

std::size_t PetriNet::add_transition(std::string id, std::optional<std::string> label) {
  transitions_.push_back({std::move(id), std::move(label), {}, {}});
  return transitions_.size() - 1;
}

void PetriNet::add_input_arc(std::size_t place, std::size_t transition) {
  if (place >= places_.size() || transition >= transitions_.size()) throw InvalidNet("arc references unknown node");
  auto& in = transitions_[transition].inputs;
  if (std::find(in.begin(), in.end(), place) != in.end()) throw InvalidNet("duplicate arc");
  in.push_back(place);
}

void PetriNet::add_output_arc(std::size_t transition, std::size_t place) {
  if (place >= places_.size() || transition >= transitions_.size()) throw InvalidNet("arc references unknown node");
  auto& out = transitions_[transition].outputs;
  if (std::find(out.begin(), out.end(), place) != out.end()) throw InvalidNet("duplicate arc");
  out.push_back(place);
}

std::size_t PetriNet::arc_count() const {
  std::size_t n = 0;
  for (const auto& t : transitions_) n += t.inputs.size() + t.outputs.size();
  return n;
}

bool PetriNet::is_enabled(const Marking& m, std::size_t transition) const {
  for (std::size_t p : transitions_[transition].inputs) {
    if (m[p] == 0) return false;
  }
  return true;
}

std::vector<std::size_t> PetriNet::enabled_transitions(const Marking& m) const {
  std::vector<std::size_t> out;
  for (std::size_t t = 0; t < transitions_.size(); ++t) {
    if (is_enabled(m, t)) out.push_back(t);
  }
  return out;
}

Marking PetriNet::fire(const Marking& m, std::size_t transition) const {
  if (transition >= transitions_.size() || !is_enabled(m, transition)) {
    throw NotEnabled("transition " + (transition < transitions_.size() ? transitions_[transition].id : std::to_string(transition)) +
                     " is not enabled");
  }
  Marking next = m;
  for (std::size_t p : transitions_[transition].inputs) --next[p];
  for (std::size_t p : transitions_[transition].outputs) ++next[p];
  return next;
}

std::set<std::string> PetriNet::visible_labels() const {
  std::set<std::string> out;
  for (const auto& t : transitions_) {
    if (t.label) out.insert(*t.label);
  }
  return out;
}

void PetriNet::validate() const {
  if (initial_.size() != places_.size() || final_.size() != places_.size()) throw InvalidNet("marking size mismatch");
  auto nonempty = [](const Marking& m) { return std::any_of(m.begin(), m.end(), [](auto c) { return c > 0; }); };
  if (!nonempty(initial_)) throw InvalidNet("initial marking is empty");
  if (!nonempty(final_)) throw InvalidNet("final marking is empty");
  for (const auto& t : transitions_) {
    for (auto p : t.inputs)
      if (p >= places_.size()) throw InvalidNet("dangling arc");
    for (auto p : t.outputs)
      if (p >= places_.size()) throw InvalidNet("dangling arc");
  }
}

namespace {

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

namespace pt = boost::property_tree;

std::string xml_attr(const pt::ptree& node, const char* name) {
  if (auto a = node.get_child_optional("<xmlattr>")) {
    if (auto v = a->get_optional<std::string>(name)) return *v;
  }
  return {};
}

std::string text_child(const pt::ptree& node, const char* child) {
  if (auto c = node.get_child_optional(child)) {
    if (auto t = c->get_optional<std::string>("text")) return *t;
  }
  return {};
}

}  // namespace

std::string export_pnml(const PetriNet& net) {
  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<pnml>\n";
  os << "  <net id=\"net1\" type=\"http://www.pnml.org/version-2009/grammar/pnmlcoremodel\">\n";
  os << "    <page id=\"n0\">\n";
  for (std::size_t p = 0; p < net.places().size(); ++p) {
    os << "      <place id=\"p" << p << "\">\n";
    os << "        <name>\n          <text>" << escape(net.places()[p]) << "</text>\n        </name>\n";
    if (net.initial_marking()[p] > 0) {
      os << "        <initialMarking>\n          <text>" << net.initial_marking()[p] << "</text>\n        </initialMarking>\n";
    }
    os << "      </place>\n";
  }
  for (std::size_t t = 0; t < net.transitions().size(); ++t) {
    const auto& tr = net.transitions()[t];
    os << "      <transition id=\"t" << t << "\">\n";
    os << "        <name>\n          <text>" << escape(tr.label ? *tr.label : tr.id) << "</text>\n        </name>\n";
    if (tr.silent()) {
      os << "        <toolspecific tool=\"ProM\" version=\"6.4\" activity=\"$invisible$\" localNodeID=\""
         << escape(tr.id) << "\"/>\n";
    }
    os << "      </transition>\n";
  }
  std::size_t arc = 0;
  for (std::size_t t = 0; t < net.transitions().size(); ++t) {
    for (std::size_t p : net.transitions()[t].inputs) {
      os << "      <arc id=\"a" << arc++ << "\" source=\"p" << p << "\" target=\"t" << t << "\"/>\n";
    }
    for (std::size_t p : net.transitions()[t].outputs) {
      os << "      <arc id=\"a" << arc++ << "\" source=\"t" << t << "\" target=\"p" << p << "\"/>\n";
    }
  }
  os << "    </page>\n";
  os << "    <finalmarkings>\n      <marking>\n";
  for (std::size_t p = 0; p < net.places().size(); ++p) {
    if (net.final_marking()[p] > 0) {
      os << "        <place idref=\"p" << p << "\">\n          <text>" << net.final_marking()[p]
         << "</text>\n        </place>\n";
    }
  }
  os << "      </marking>\n    </finalmarkings>\n";
  os << "  </net>\n";
  os << "</pnml>\n";
  return os.str();
}

PetriNet import_pnml(std::string_view xml) {
  pt::ptree doc;
  try {
    std::istringstream in{std::string(xml)};
    pt::read_xml(in, doc, pt::xml_parser::no_comments | pt::xml_parser::trim_whitespace);
  } catch (const pt::xml_parser_error& e) {
    throw ParseError(std::string("malformed PNML: ") + e.message(), e.line());
  }
  auto netp = doc.get_child_optional("pnml.net");
  if (!netp) throw ParseError("PNML without <pnml><net>");

  PetriNet net;
  std::map<std::string, std::size_t> place_ids, trans_ids;
  std::vector<std::pair<std::string, std::string>> arcs;
  std::map<std::string, std::uint32_t> initial, final_tokens;

  auto read_nodes = [&](const pt::ptree& container, auto& self) -> void {
    for (const auto& [tag, node] : container) {
      if (tag == "page") {
        self(node, self);
      } else if (tag == "place") {
        std::string id = xml_attr(node, "id");
        std::string name = text_child(node, "name");
        place_ids[id] = net.add_place(name.empty() ? id : name);
        std::string init = text_child(node, "initialMarking");
        if (!init.empty()) initial[id] = static_cast<std::uint32_t>(std::stoul(init));
      } else if (tag == "transition") {
        std::string id = xml_attr(node, "id");
        std::string name = text_child(node, "name");
        bool invisible = false;
        for (const auto& [ctag, cnode] : node) {
          if (ctag == "toolspecific" && xml_attr(cnode, "activity") == "$invisible$") invisible = true;
        }
        std::optional<std::string> label;
        if (!invisible) label = name.empty() ? id : name;
        trans_ids[id] = net.add_transition(id, label);
      } else if (tag == "arc") {
        arcs.emplace_back(xml_attr(node, "source"), xml_attr(node, "target"));
      } else if (tag == "finalmarkings") {
        for (const auto& [mtag, mnode] : node) {
          if (mtag != "marking") continue;
          for (const auto& [ptag, pnode] : mnode) {
            if (ptag != "place") continue;
            std::string ref = xml_attr(pnode, "idref");
            std::string tokens = pnode.get("text", std::string("1"));
            final_tokens[ref] = static_cast<std::uint32_t>(std::stoul(tokens));
          }
          break;
        }
      }
    }
  };
  try {
    read_nodes(*netp, read_nodes);
  } catch (const std::invalid_argument&) {
    throw ParseError("invalid token count in PNML");
  }

  for (const auto& [src, dst] : arcs) {
    if (place_ids.count(src) && trans_ids.count(dst)) {
      net.add_input_arc(place_ids[src], trans_ids[dst]);
    } else if (trans_ids.count(src) && place_ids.count(dst)) {
      net.add_output_arc(trans_ids[src], place_ids[dst]);
    } else {
      throw InvalidNet("arc " + src + " -> " + dst + " does not join a place and a transition");
    }
  }
  Marking mi = net.empty_marking(), mf = net.empty_marking();
  for (const auto& [id, n] : initial) mi[place_ids.at(id)] = n;
  for (const auto& [id, n] : final_tokens) {
    if (!place_ids.count(id)) throw InvalidNet("final marking references unknown place " + id);
    mf[place_ids.at(id)] = n;
  }
  net.set_initial_marking(mi);
  net.set_final_marking(mf);
  net.validate();
  return net;
}

PetriNet import_pnml_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open PNML file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return import_pnml(buf.str());
}

}  // namespace vpm
