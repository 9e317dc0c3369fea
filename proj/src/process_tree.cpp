#include "vpm/process_tree.hpp"

#include <fstream>
#include <istream>
#include <map>
#include <memory>
#include <set>

#include "vpm/error.hpp"

namespace vpm {

ProcessTree ProcessTree::activity(std::string label) {
  ProcessTree t;
  t.op = TreeOp::activity;
  t.label = std::move(label);
  return t;
}

ProcessTree ProcessTree::silent() { return ProcessTree{}; }

namespace {

ProcessTree make(TreeOp op, std::vector<ProcessTree> children) {
  ProcessTree t;
  t.op = op;
  t.children = std::move(children);
  return t;
}

}  // namespace

ProcessTree ProcessTree::sequence(std::vector<ProcessTree> children) { return make(TreeOp::sequence, std::move(children)); }
ProcessTree ProcessTree::exclusive(std::vector<ProcessTree> children) { return make(TreeOp::exclusive, std::move(children)); }
ProcessTree ProcessTree::parallel(std::vector<ProcessTree> children) { return make(TreeOp::parallel, std::move(children)); }
ProcessTree ProcessTree::loop(std::vector<ProcessTree> children) { return make(TreeOp::loop, std::move(children)); }

void ProcessTree::validate() const {
  switch (op) {
    case TreeOp::activity:
      if (label.empty()) throw Error("activity leaf without label");
      if (!children.empty()) throw Error("leaf with children");
      return;
    case TreeOp::tau:
      if (!children.empty()) throw Error("leaf with children");
      return;
    case TreeOp::loop:
      if (children.size() < 2) throw Error("loop needs a do-part and at least one redo-part");
      break;
    default:
      if (children.empty()) throw Error("operator without children");
  }
  for (const auto& c : children) c.validate();
}

std::size_t ProcessTree::activity_count() const {
  if (op == TreeOp::activity) return 1;
  std::size_t n = 0;
  for (const auto& c : children) n += c.activity_count();
  return n;
}

int ProcessTree::depth() const {
  int d = 0;
  for (const auto& c : children) d = std::max(d, c.depth());
  return children.empty() ? 0 : d + 1;
}

std::string to_string(const ProcessTree& tree) {
  switch (tree.op) {
    case TreeOp::activity: return tree.label;
    case TreeOp::tau: return "tau";
    default: break;
  }
  std::string out;
  switch (tree.op) {
    case TreeOp::sequence: out = "->("; break;
    case TreeOp::exclusive: out = "X("; break;
    case TreeOp::parallel: out = "+("; break;
    default: out = "*("; break;
  }
  for (std::size_t i = 0; i < tree.children.size(); ++i) {
    if (i) out += ", ";
    out += to_string(tree.children[i]);
  }
  return out + ")";
}

namespace {

class NetBuilder {
 public:
  PetriNet build(const ProcessTree& tree) {
    tree.validate();
    std::size_t source = net_.add_place("source");
    std::size_t sink = net_.add_place("sink");
    add(tree, source, sink);
    Marking init = net_.empty_marking(), fin = net_.empty_marking();
    init[source] = 1;
    fin[sink] = 1;
    net_.set_initial_marking(init);
    net_.set_final_marking(fin);
    return std::move(net_);
  }

 private:
  std::size_t place() { return net_.add_place("p" + std::to_string(net_.places().size())); }

  std::size_t transition(std::optional<std::string> label) {
    return net_.add_transition("t" + std::to_string(net_.transitions().size()), std::move(label));
  }

  void link(std::size_t from, std::size_t t, std::size_t to) {
    net_.add_input_arc(from, t);
    net_.add_output_arc(t, to);
  }

  // No fragment produces into its own entry place or consumes from its exit
  // place, so exclusive branches may share both.
  void add(const ProcessTree& n, std::size_t src, std::size_t sink) {
    switch (n.op) {
      case TreeOp::activity:
        link(src, transition(n.label), sink);
        return;
      case TreeOp::tau:
        link(src, transition(std::nullopt), sink);
        return;
      case TreeOp::sequence: {
        std::size_t cur = src;
        for (std::size_t i = 0; i < n.children.size(); ++i) {
          std::size_t next = i + 1 == n.children.size() ? sink : place();
          add(n.children[i], cur, next);
          cur = next;
        }
        return;
      }
      case TreeOp::exclusive:
        for (const auto& c : n.children) add(c, src, sink);
        return;
      case TreeOp::parallel: {
        std::size_t split = transition(std::nullopt);
        std::size_t join = transition(std::nullopt);
        net_.add_input_arc(src, split);
        net_.add_output_arc(join, sink);
        for (const auto& c : n.children) {
          std::size_t s = place(), e = place();
          net_.add_output_arc(split, s);
          net_.add_input_arc(e, join);
          add(c, s, e);
        }
        return;
      }
      case TreeOp::loop: {
        std::size_t ds = place(), de = place();
        link(src, transition(std::nullopt), ds);
        add(n.children[0], ds, de);
        link(de, transition(std::nullopt), sink);
        for (std::size_t i = 1; i < n.children.size(); ++i) {
          std::size_t rs = place(), re = place();
          link(de, transition(std::nullopt), rs);
          add(n.children[i], rs, re);
          link(re, transition(std::nullopt), ds);
        }
        return;
      }
    }
  }

  PetriNet net_;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct TrieNode {
  bool terminal = false;
  std::map<std::string, std::unique_ptr<TrieNode>> children;
};

ProcessTree prepend(ProcessTree head, ProcessTree rest) {
  if (rest.op == TreeOp::sequence) {
    rest.children.insert(rest.children.begin(), std::move(head));
    return rest;
  }
  return ProcessTree::sequence({std::move(head), std::move(rest)});
}

ProcessTree trie_to_tree(const TrieNode& node) {
  std::vector<ProcessTree> options;
  if (node.terminal) options.push_back(ProcessTree::silent());
  for (const auto& [label, child] : node.children) {
    if (child->children.empty()) {
      options.push_back(ProcessTree::activity(label));
    } else {
      options.push_back(prepend(ProcessTree::activity(label), trie_to_tree(*child)));
    }
  }
  if (options.empty()) return ProcessTree::silent();
  if (options.size() == 1) return std::move(options.front());
  return ProcessTree::exclusive(std::move(options));
}

}  // namespace

PetriNet tree_to_net(const ProcessTree& tree) { return NetBuilder{}.build(tree); }

std::vector<Variant> parse_variant_spec(std::istream& in) {
  std::vector<Variant> out;
  std::set<std::string> names;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto colon = t.find(':');
    if (colon == std::string::npos) throw ParseError("expected 'name: act1,act2,...'", lineno);
    Variant v;
    v.name = trim(t.substr(0, colon));
    if (v.name.empty()) throw ParseError("variant without name", lineno);
    if (!names.insert(v.name).second) throw DuplicateVariantName("duplicate variant name '" + v.name + "'");
    std::string body = trim(t.substr(colon + 1));
    if (!body.empty()) {
      std::string cur;
      for (char c : body + ",") {
        if (c == ',') {
          std::string a = trim(cur);
          if (a.empty()) throw ParseError("empty activity in variant '" + v.name + "'", lineno);
          v.activities.push_back(a);
          cur.clear();
        } else {
          cur.push_back(c);
        }
      }
    }
    out.push_back(std::move(v));
  }
  if (out.empty()) throw ParseError("variant spec lists no variants");
  return out;
}

std::vector<Variant> load_variant_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open variant spec '" + path + "'");
  return parse_variant_spec(in);
}

ProcessTree build_tree_from_variants(const std::vector<Variant>& variants) {
  std::set<std::string> names;
  TrieNode root;
  for (const auto& v : variants) {
    if (!names.insert(v.name).second) throw DuplicateVariantName("duplicate variant name '" + v.name + "'");
    TrieNode* node = &root;
    for (const auto& a : v.activities) {
      auto& child = node->children[a];
      if (!child) child = std::make_unique<TrieNode>();
      node = child.get();
    }
    node->terminal = true;
  }
  return trie_to_tree(root);
}

PetriNet build_model_from_variants(const std::vector<Variant>& variants) {
  return tree_to_net(build_tree_from_variants(variants));
}

}  // namespace vpm
