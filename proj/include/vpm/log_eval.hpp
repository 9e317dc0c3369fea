#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vpm/event_model.hpp"

namespace vpm {

inline constexpr std::string_view kNotObserved = "NOT_OBSERVED";
inline constexpr std::string_view kNotExisting = "NOT_EXISTING";

enum class MatchOutcome { correct, misclassified, not_observed, not_existing };

std::string_view to_string(MatchOutcome outcome);

struct MatchRecord {
  std::optional<ActivityInstance> true_instance;
  std::optional<ActivityInstance> extracted_instance;
  MatchOutcome outcome = MatchOutcome::not_existing;
};

// An extracted instance matches a true one of the same resource when it lies
// within the true instance's closed time bounds. Every extracted instance
// yields one record; unmatched true instances yield a not_observed record.
// Throws OverlappingTruth if true instances of a resource overlap.
std::vector<MatchRecord> match_instances(const std::vector<ActivityInstance>& truth,
                                         const std::vector<ActivityInstance>& extracted);
std::vector<MatchRecord> match_instances(const EventLog& true_log, const EventLog& extracted_log);

// Rows: true classes then NOT_EXISTING. Columns: detected classes then
// NOT_OBSERVED.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::vector<std::string> labels);

  const std::vector<std::string>& labels() const { return labels_; }
  std::size_t size() const { return labels_.size() + 1; }

  // Index of a class label, or labels().size() for the NOT_* sentinels.
  std::size_t index_of(std::string_view label) const;

  std::int64_t at(std::size_t row, std::size_t col) const { return counts_[row * size() + col]; }
  std::int64_t& at(std::size_t row, std::size_t col) { return counts_[row * size() + col]; }
  std::int64_t at(std::string_view row_label, std::string_view col_label) const {
    return at(index_of(row_label), index_of(col_label));
  }

  std::int64_t row_sum(std::size_t row) const;
  std::int64_t col_sum(std::size_t col) const;
  std::int64_t total() const;

  std::string to_csv() const;
  std::string to_json() const;

 private:
  std::vector<std::string> labels_;
  std::vector<std::int64_t> counts_;
};

// `labels` seeds the class axis; classes seen in records are added.
ConfusionMatrix build_confusion_matrix(const std::vector<MatchRecord>& records,
                                       const std::vector<std::string>& labels = {});

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  std::int64_t support = 0;
};

struct Metrics {
  double accuracy = 0.0;
  double weighted_precision = 0.0;
  double weighted_recall = 0.0;
  std::map<std::string, ClassMetrics> per_class;

  std::string to_json() const;
};

// Class weights are true-instance counts (row sums). Recall averages over
// all rows including NOT_EXISTING (recall 0 there); precision averages over
// true-class rows with support. Throws EmptyMatrix on a zero matrix.
Metrics compute_metrics(const ConfusionMatrix& matrix);

// Keeps only events of the given resources; drops traces left empty.
EventLog filter_by_resources(const EventLog& log, const std::set<std::string>& resources);
std::pair<EventLog, EventLog> filter_by_resources(const EventLog& true_log, const EventLog& extracted_log,
                                                  const std::set<std::string>& resources);

// Tallies by outcome.
struct OutcomeCounts {
  std::int64_t correct = 0, misclassified = 0, not_observed = 0, not_existing = 0;
};
OutcomeCounts count_outcomes(const std::vector<MatchRecord>& records);

}  // namespace vpm
