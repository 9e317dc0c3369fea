#include "vpm/discovery.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>

#include "vpm/error.hpp"

namespace vpm {

VariantLog to_variant_log(const std::vector<LabelSequence>& traces) {
  VariantLog out;
  for (const auto& t : traces) ++out[t];
  return out;
}

bool DirectlyFollowsGraph::has_edge(const std::string& a, const std::string& b) const { return edges.count({a, b}) > 0; }

std::int64_t DirectlyFollowsGraph::edge(const std::string& a, const std::string& b) const {
  auto it = edges.find({a, b});
  return it == edges.end() ? 0 : it->second;
}

DirectlyFollowsGraph build_dfg(const VariantLog& log) {
  DirectlyFollowsGraph g;
  for (const auto& [trace, n] : log) {
    if (n <= 0) continue;
    g.traces += n;
    if (trace.empty()) {
      g.empty_traces += n;
      continue;
    }
    g.start[trace.front()] += n;
    g.end[trace.back()] += n;
    for (std::size_t i = 0; i < trace.size(); ++i) {
      g.activities.insert(trace[i]);
      g.counts[trace[i]] += n;
      if (i + 1 < trace.size()) g.edges[{trace[i], trace[i + 1]}] += n;
    }
  }
  return g;
}

namespace {

void check_threshold(double f) {
  if (!(f >= 0.0 && f <= 1.0)) throw Error("noise threshold must lie in [0,1]");
}

std::map<std::string, std::int64_t> thin(const std::map<std::string, std::int64_t>& m, double f) {
  std::int64_t best = 0;
  for (const auto& [a, n] : m) best = std::max(best, n);
  std::map<std::string, std::int64_t> out;
  for (const auto& [a, n] : m) {
    if (static_cast<double>(n) >= f * static_cast<double>(best)) out[a] = n;
  }
  return out;
}

}  // namespace

DirectlyFollowsGraph filter_dfg(const DirectlyFollowsGraph& dfg, double f) {
  check_threshold(f);
  DirectlyFollowsGraph out = dfg;
  std::map<std::string, std::int64_t> strongest;
  for (const auto& [e, n] : dfg.edges) strongest[e.first] = std::max(strongest[e.first], n);
  out.edges.clear();
  for (const auto& [e, n] : dfg.edges) {
    if (static_cast<double>(n) >= f * static_cast<double>(strongest[e.first])) out.edges[e] = n;
  }
  out.start = thin(dfg.start, f);
  out.end = thin(dfg.end, f);
  return out;
}

namespace {

using Group = std::set<std::string>;

enum class CutKind { exclusive, sequence, parallel, loop };

struct Cut {
  CutKind kind;
  std::vector<Group> groups;  // loop: body first
};

bool by_min_label(const Group& a, const Group& b) { return *a.begin() < *b.begin(); }

// Connected components of the undirected graph given by `linked`.
std::vector<Group> components(const std::set<std::string>& nodes,
                              const std::function<bool(const std::string&, const std::string&)>& linked) {
  std::vector<Group> out;
  std::set<std::string> seen;
  for (const auto& root : nodes) {
    if (seen.count(root)) continue;
    Group g;
    std::vector<std::string> stack{root};
    seen.insert(root);
    while (!stack.empty()) {
      std::string a = stack.back();
      stack.pop_back();
      g.insert(a);
      for (const auto& b : nodes) {
        if (!seen.count(b) && linked(a, b)) {
          seen.insert(b);
          stack.push_back(b);
        }
      }
    }
    out.push_back(std::move(g));
  }
  std::sort(out.begin(), out.end(), by_min_label);
  return out;
}

std::optional<Cut> exclusive_cut(const DirectlyFollowsGraph& g) {
  auto groups = components(g.activities, [&](const std::string& a, const std::string& b) {
    return g.has_edge(a, b) || g.has_edge(b, a);
  });
  if (groups.size() < 2) return std::nullopt;
  return Cut{CutKind::exclusive, std::move(groups)};
}

std::map<std::string, std::set<std::string>> reachability(const DirectlyFollowsGraph& g) {
  std::map<std::string, std::set<std::string>> reach;
  for (const auto& a : g.activities) {
    std::vector<std::string> stack{a};
    auto& r = reach[a];
    while (!stack.empty()) {
      std::string x = stack.back();
      stack.pop_back();
      for (const auto& b : g.activities) {
        if (g.has_edge(x, b) && r.insert(b).second) stack.push_back(b);
      }
    }
  }
  return reach;
}

std::optional<Cut> sequence_cut(const DirectlyFollowsGraph& g) {
  const auto reach = reachability(g);
  auto reaches = [&](const std::string& a, const std::string& b) { return reach.at(a).count(b) > 0; };
  auto before = [&](const Group& x, const Group& y) {
    for (const auto& a : x)
      for (const auto& b : y)
        if (!reaches(a, b) || reaches(b, a)) return false;
    return true;
  };
  // Strongly connected components first.
  std::vector<Group> groups = components(g.activities, [&](const std::string& a, const std::string& b) {
    return reaches(a, b) && reaches(b, a);
  });
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < groups.size() && !changed; ++i) {
      for (std::size_t j = i + 1; j < groups.size() && !changed; ++j) {
        if (!before(groups[i], groups[j]) && !before(groups[j], groups[i])) {
          groups[i].insert(groups[j].begin(), groups[j].end());
          groups.erase(groups.begin() + static_cast<std::ptrdiff_t>(j));
          changed = true;
        }
      }
    }
  }
  if (groups.size() < 2) return std::nullopt;
  std::sort(groups.begin(), groups.end(), [&](const Group& x, const Group& y) { return before(x, y); });
  return Cut{CutKind::sequence, std::move(groups)};
}

bool touches(const Group& group, const std::map<std::string, std::int64_t>& m) {
  return std::any_of(group.begin(), group.end(), [&](const std::string& a) { return m.count(a) > 0; });
}

std::optional<Cut> parallel_cut(const DirectlyFollowsGraph& g) {
  auto groups = components(g.activities, [&](const std::string& a, const std::string& b) {
    return !(g.has_edge(a, b) && g.has_edge(b, a));
  });
  if (groups.size() < 2) return std::nullopt;
  std::vector<Group> valid, lacking;
  for (auto& grp : groups) {
    (touches(grp, g.start) && touches(grp, g.end) ? valid : lacking).push_back(std::move(grp));
  }
  if (valid.empty()) return std::nullopt;
  for (auto& grp : lacking) valid.front().insert(grp.begin(), grp.end());
  if (valid.size() < 2) return std::nullopt;
  std::sort(valid.begin(), valid.end(), by_min_label);
  return Cut{CutKind::parallel, std::move(valid)};
}

std::optional<Cut> loop_cut(const DirectlyFollowsGraph& g) {
  if (g.start.empty() || g.end.empty()) return std::nullopt;
  Group body;
  for (const auto& [a, n] : g.start) body.insert(a);
  for (const auto& [a, n] : g.end) body.insert(a);
  std::set<std::string> rest;
  for (const auto& a : g.activities)
    if (!body.count(a)) rest.insert(a);
  std::vector<Group> redos = components(rest, [&](const std::string& a, const std::string& b) {
    return g.has_edge(a, b) || g.has_edge(b, a);
  });
  auto is_start = [&](const std::string& a) { return g.start.count(a) > 0; };
  auto is_end = [&](const std::string& a) { return g.end.count(a) > 0; };
  auto belongs_to_body = [&](const Group& redo) {
    for (const auto& r : redo) {
      bool to_start = false, from_end = false;
      for (const auto& b : body) {
        if (g.has_edge(b, r)) {
          if (!is_end(b)) return true;
          from_end = true;
        }
        if (g.has_edge(r, b)) {
          if (!is_start(b)) return true;
          to_start = true;
        }
      }
      if (to_start) {
        for (const auto& [s, n] : g.start)
          if (!g.has_edge(r, s)) return true;
      }
      if (from_end) {
        for (const auto& [e, n] : g.end)
          if (!g.has_edge(e, r)) return true;
      }
    }
    return false;
  };
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < redos.size(); ++i) {
      if (belongs_to_body(redos[i])) {
        body.insert(redos[i].begin(), redos[i].end());
        redos.erase(redos.begin() + static_cast<std::ptrdiff_t>(i));
        changed = true;
        break;
      }
    }
  }
  if (redos.empty()) return std::nullopt;
  std::vector<Group> groups{body};
  groups.insert(groups.end(), redos.begin(), redos.end());
  return Cut{CutKind::loop, std::move(groups)};
}

std::optional<Cut> find_cut(const DirectlyFollowsGraph& g) {
  if (auto c = exclusive_cut(g)) return c;
  if (auto c = sequence_cut(g)) return c;
  if (auto c = parallel_cut(g)) return c;
  return loop_cut(g);
}

std::size_t group_of(const std::vector<Group>& groups, const std::string& a) {
  for (std::size_t i = 0; i < groups.size(); ++i)
    if (groups[i].count(a)) return i;
  return groups.size();
}

LabelSequence project(const LabelSequence& trace, const Group& group) {
  LabelSequence out;
  for (const auto& a : trace)
    if (group.count(a)) out.push_back(a);
  return out;
}

std::vector<VariantLog> split_log(const VariantLog& log, const Cut& cut) {
  std::vector<VariantLog> subs(cut.groups.size());
  for (const auto& [trace, n] : log) {
    switch (cut.kind) {
      case CutKind::exclusive: {
        std::size_t best = 0, best_overlap = 0;
        for (std::size_t i = 0; i < cut.groups.size(); ++i) {
          std::size_t overlap = project(trace, cut.groups[i]).size();
          if (overlap > best_overlap) {
            best = i;
            best_overlap = overlap;
          }
        }
        subs[best][project(trace, cut.groups[best])] += n;
        break;
      }
      case CutKind::sequence:
      case CutKind::parallel:
        for (std::size_t i = 0; i < cut.groups.size(); ++i) subs[i][project(trace, cut.groups[i])] += n;
        break;
      case CutKind::loop: {
        // Runs of one group each; body and redo runs must alternate, so an
        // empty body run is implied around redo runs that lack a neighbour.
        std::vector<std::pair<std::size_t, LabelSequence>> runs;
        for (const auto& a : trace) {
          std::size_t gi = group_of(cut.groups, a);
          if (gi >= cut.groups.size()) continue;
          if (runs.empty() || runs.back().first != gi) runs.push_back({gi, {}});
          runs.back().second.push_back(a);
        }
        bool expect_body = true;
        for (const auto& [gi, seq] : runs) {
          if (gi != 0 && expect_body) subs[0][{}] += n;
          subs[gi][seq] += n;
          expect_body = gi != 0;
        }
        if (expect_body) subs[0][{}] += n;
        break;
      }
    }
  }
  return subs;
}

ProcessTree make_node(CutKind kind, std::vector<ProcessTree> children) {
  switch (kind) {
    case CutKind::exclusive: return ProcessTree::exclusive(std::move(children));
    case CutKind::sequence: return ProcessTree::sequence(std::move(children));
    case CutKind::parallel: return ProcessTree::parallel(std::move(children));
    default: return ProcessTree::loop(std::move(children));
  }
}

class Miner {
 public:
  explicit Miner(double f) : f_(f) {}

  ProcessTree mine(VariantLog log) const {
    std::int64_t total = 0, empty = 0;
    for (const auto& [t, n] : log) {
      total += n;
      if (t.empty()) empty += n;
    }
    if (total == 0) return ProcessTree::silent();
    if (empty > 0) {
      log.erase(LabelSequence{});
      if (empty == total) return ProcessTree::silent();
      if (static_cast<double>(empty) > f_ * static_cast<double>(total)) {
        return ProcessTree::exclusive({ProcessTree::silent(), mine(std::move(log))});
      }
    }
    const DirectlyFollowsGraph dfg = build_dfg(log);
    if (dfg.activities.size() == 1) {
      std::int64_t traces = dfg.traces, events = dfg.counts.begin()->second;
      double p = static_cast<double>(traces) / static_cast<double>(events + traces);
      if (events == traces || std::abs(p - 0.5) <= f_) return ProcessTree::activity(*dfg.activities.begin());
    }
    if (auto cut = find_cut(dfg)) return apply(log, *cut);
    if (f_ > 0.0) {
      if (auto cut = find_cut(filter_dfg(dfg, f_))) return apply(log, *cut);
    }
    if (dfg.activities.size() == 1) {
      return ProcessTree::loop({ProcessTree::activity(*dfg.activities.begin()), ProcessTree::silent()});
    }
    std::vector<ProcessTree> flower{ProcessTree::silent()};
    for (const auto& a : dfg.activities) flower.push_back(ProcessTree::activity(a));
    return ProcessTree::loop(std::move(flower));
  }

 private:
  ProcessTree apply(const VariantLog& log, const Cut& cut) const {
    auto subs = split_log(log, cut);
    std::vector<ProcessTree> children;
    for (auto& s : subs) {
      ProcessTree child = mine(std::move(s));
      // Flatten nested operators of the same kind, loops excepted.
      if (cut.kind != CutKind::loop && child.op == make_node(cut.kind, {}).op) {
        for (auto& c : child.children) children.push_back(std::move(c));
      } else {
        children.push_back(std::move(child));
      }
    }
    return make_node(cut.kind, std::move(children));
  }

  double f_;
};

}  // namespace

ProcessTree discover_imf(const VariantLog& log, double f) {
  check_threshold(f);
  return Miner(f).mine(log);
}

ProcessTree discover_imf(const std::vector<LabelSequence>& traces, double f) {
  return discover_imf(to_variant_log(traces), f);
}

}  // namespace vpm
