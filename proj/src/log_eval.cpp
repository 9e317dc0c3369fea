#include "vpm/log_eval.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "vpm/error.hpp"

namespace vpm {

std::string_view to_string(MatchOutcome outcome) {
  switch (outcome) {
    case MatchOutcome::correct: return "correct";
    case MatchOutcome::misclassified: return "misclassified";
    case MatchOutcome::not_observed: return "not_observed";
    case MatchOutcome::not_existing: return "not_existing";
  }
  return "unknown";
}

std::vector<MatchRecord> match_instances(const std::vector<ActivityInstance>& truth,
                                         const std::vector<ActivityInstance>& extracted) {
  std::map<std::string, std::vector<std::size_t>> truth_by_resource;
  for (std::size_t i = 0; i < truth.size(); ++i) truth_by_resource[truth[i].resource].push_back(i);
  for (auto& [res, idx] : truth_by_resource) {
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return std::tie(truth[a].start_ms, truth[a].complete_ms) < std::tie(truth[b].start_ms, truth[b].complete_ms);
    });
    for (std::size_t k = 1; k < idx.size(); ++k) {
      const auto& p = truth[idx[k - 1]];
      const auto& c = truth[idx[k]];
      if (c.start_ms < p.complete_ms) {
        throw OverlappingTruth("true instances of '" + res + "' overlap: [" + std::to_string(p.start_ms) + ", " +
                               std::to_string(p.complete_ms) + ") and [" + std::to_string(c.start_ms) + ", " +
                               std::to_string(c.complete_ms) + ")");
      }
    }
  }

  std::vector<MatchRecord> records;
  std::vector<bool> matched(truth.size(), false);
  for (const auto& ex : extracted) {
    std::optional<std::size_t> hit;
    if (auto it = truth_by_resource.find(ex.resource); it != truth_by_resource.end()) {
      for (std::size_t i : it->second) {
        const auto& tr = truth[i];
        if (ex.start_ms >= tr.start_ms && ex.complete_ms <= tr.complete_ms) {
          if (hit) {
            throw AmbiguousMatch("extracted instance of '" + ex.cls.label() + "' at " + std::to_string(ex.start_ms) +
                                 " ms lies within several true instances");
          }
          hit = i;
        }
      }
    }
    MatchRecord rec;
    rec.extracted_instance = ex;
    if (hit) {
      matched[*hit] = true;
      rec.true_instance = truth[*hit];
      rec.outcome = truth[*hit].cls == ex.cls ? MatchOutcome::correct : MatchOutcome::misclassified;
    } else {
      rec.outcome = MatchOutcome::not_existing;
    }
    records.push_back(std::move(rec));
  }
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (!matched[i]) records.push_back({truth[i], std::nullopt, MatchOutcome::not_observed});
  }
  return records;
}

std::vector<MatchRecord> match_instances(const EventLog& true_log, const EventLog& extracted_log) {
  auto truth = log_instances(true_log);
  auto extracted = log_instances(extracted_log);
  sort_instances(truth);
  sort_instances(extracted);
  return match_instances(truth, extracted);
}

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> labels) : labels_(std::move(labels)) {
  std::sort(labels_.begin(), labels_.end());
  labels_.erase(std::unique(labels_.begin(), labels_.end()), labels_.end());
  counts_.assign(size() * size(), 0);
}

std::size_t ConfusionMatrix::index_of(std::string_view label) const {
  if (label == kNotExisting || label == kNotObserved) return labels_.size();
  auto it = std::lower_bound(labels_.begin(), labels_.end(), label);
  if (it == labels_.end() || *it != label) throw Error("label '" + std::string(label) + "' not in confusion matrix");
  return static_cast<std::size_t>(it - labels_.begin());
}

std::int64_t ConfusionMatrix::row_sum(std::size_t row) const {
  std::int64_t s = 0;
  for (std::size_t c = 0; c < size(); ++c) s += at(row, c);
  return s;
}

std::int64_t ConfusionMatrix::col_sum(std::size_t col) const {
  std::int64_t s = 0;
  for (std::size_t r = 0; r < size(); ++r) s += at(r, col);
  return s;
}

std::int64_t ConfusionMatrix::total() const { return std::accumulate(counts_.begin(), counts_.end(), std::int64_t{0}); }

std::string ConfusionMatrix::to_csv() const {
  std::ostringstream os;
  os << "true\\detected";
  for (const auto& l : labels_) os << ',' << l;
  os << ',' << kNotObserved << '\n';
  for (std::size_t r = 0; r < size(); ++r) {
    os << (r < labels_.size() ? labels_[r] : std::string(kNotExisting));
    for (std::size_t c = 0; c < size(); ++c) os << ',' << at(r, c);
    os << '\n';
  }
  return os.str();
}

std::string ConfusionMatrix::to_json() const {
  nlohmann::ordered_json j;
  auto rows = labels_;
  rows.emplace_back(kNotExisting);
  auto cols = labels_;
  cols.emplace_back(kNotObserved);
  j["rows"] = rows;
  j["columns"] = cols;
  nlohmann::ordered_json counts = nlohmann::ordered_json::array();
  for (std::size_t r = 0; r < size(); ++r) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (std::size_t c = 0; c < size(); ++c) row.push_back(at(r, c));
    counts.push_back(row);
  }
  j["counts"] = counts;
  return j.dump(2) + "\n";
}

ConfusionMatrix build_confusion_matrix(const std::vector<MatchRecord>& records, const std::vector<std::string>& labels) {
  std::vector<std::string> all = labels;
  for (const auto& r : records) {
    if (r.true_instance) all.push_back(r.true_instance->cls.label());
    if (r.extracted_instance) all.push_back(r.extracted_instance->cls.label());
  }
  ConfusionMatrix m(std::move(all));
  for (const auto& r : records) {
    std::size_t row = r.true_instance ? m.index_of(r.true_instance->cls.label()) : m.labels().size();
    std::size_t col = r.extracted_instance ? m.index_of(r.extracted_instance->cls.label()) : m.labels().size();
    m.at(row, col) += 1;
  }
  return m;
}

Metrics compute_metrics(const ConfusionMatrix& m) {
  const std::int64_t total = m.total();
  if (total == 0) throw EmptyMatrix("confusion matrix has no entries");
  const std::size_t n = m.labels().size();
  Metrics out;

  std::int64_t diag = 0;
  for (std::size_t i = 0; i < n; ++i) diag += m.at(i, i);
  out.accuracy = static_cast<double>(diag) / static_cast<double>(total);

  double recall_num = 0.0, recall_den = 0.0;
  double prec_num = 0.0, prec_den = 0.0;
  for (std::size_t r = 0; r <= n; ++r) {
    const double w = static_cast<double>(m.row_sum(r));
    if (w == 0.0) continue;
    const double recall = r < n ? static_cast<double>(m.at(r, r)) / w : 0.0;
    recall_num += w * recall;
    recall_den += w;
    if (r == n) continue;
    const std::int64_t col = m.col_sum(r);
    const double precision = col > 0 ? static_cast<double>(m.at(r, r)) / static_cast<double>(col) : 0.0;
    prec_num += w * precision;
    prec_den += w;
  }
  out.weighted_recall = recall_den > 0 ? recall_num / recall_den : 0.0;
  out.weighted_precision = prec_den > 0 ? prec_num / prec_den : 0.0;

  for (std::size_t i = 0; i < n; ++i) {
    ClassMetrics cm;
    cm.support = m.row_sum(i);
    const std::int64_t col = m.col_sum(i);
    cm.recall = cm.support > 0 ? static_cast<double>(m.at(i, i)) / static_cast<double>(cm.support) : 0.0;
    cm.precision = col > 0 ? static_cast<double>(m.at(i, i)) / static_cast<double>(col) : 0.0;
    out.per_class[m.labels()[i]] = cm;
  }
  return out;
}

std::string Metrics::to_json() const {
  nlohmann::ordered_json j;
  j["accuracy"] = accuracy;
  j["weighted_precision"] = weighted_precision;
  j["weighted_recall"] = weighted_recall;
  nlohmann::ordered_json pc = nlohmann::ordered_json::object();
  for (const auto& [label, cm] : per_class) {
    pc[label] = {{"precision", cm.precision}, {"recall", cm.recall}, {"support", cm.support}};
  }
  j["per_class"] = pc;
  return j.dump(2) + "\n";
}

EventLog filter_by_resources(const EventLog& log, const std::set<std::string>& resources) {
  EventLog out;
  out.log_attributes = log.log_attributes;
  out.class_registry = log.class_registry;
  for (const auto& t : log.traces) {
    Trace kept;
    kept.case_id = t.case_id;
    kept.attributes = t.attributes;
    for (const auto& e : t.events) {
      if (resources.count(e.resource)) kept.events.push_back(e);
    }
    if (!kept.events.empty()) out.traces.push_back(std::move(kept));
  }
  return out;
}

std::pair<EventLog, EventLog> filter_by_resources(const EventLog& true_log, const EventLog& extracted_log,
                                                  const std::set<std::string>& resources) {
  return {filter_by_resources(true_log, resources), filter_by_resources(extracted_log, resources)};
}

OutcomeCounts count_outcomes(const std::vector<MatchRecord>& records) {
  OutcomeCounts c;
  for (const auto& r : records) {
    switch (r.outcome) {
      case MatchOutcome::correct: ++c.correct; break;
      case MatchOutcome::misclassified: ++c.misclassified; break;
      case MatchOutcome::not_observed: ++c.not_observed; break;
      case MatchOutcome::not_existing: ++c.not_existing; break;
    }
  }
  return c;
}

}  // namespace vpm
