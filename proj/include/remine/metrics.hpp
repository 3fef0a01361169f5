// Copyright (c) 2026 remine contributors
//
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "remine/core.hpp"
#include "remine/rules.hpp"

namespace remine::metrics {

/// Integer count matrix, rows = true class, columns = predicted class, both
/// indexed by canonical class index (healthy last).
struct ConfusionMatrix {
  std::vector<std::string> labels;    // canonical order
  std::vector<std::uint64_t> counts;  // row-major (N+1)^2
  std::uint64_t total = 0;

  std::size_t classes() const { return labels.size(); }
  std::uint64_t at(std::size_t truth, std::size_t predicted) const {
    return counts[truth * labels.size() + predicted];
  }
  std::uint64_t& at(std::size_t truth, std::size_t predicted) {
    return counts[truth * labels.size() + predicted];
  }

  std::vector<std::uint64_t> row_sums() const;  // per-class support
  std::vector<std::uint64_t> col_sums() const;
  std::uint64_t trace() const;

  /// Element-wise addition of two matrices over the same label set, e.g. to
  /// merge partial tallies of disjoint dataset shards.
  ConfusionMatrix& operator+=(const ConfusionMatrix& other);

  bool operator==(const ConfusionMatrix&) const = default;
};

/// counts[i][j] = number of images with true index i predicted as j.
/// Requires exactly one prediction per image, dataset order.
ConfusionMatrix confusion(const Dataset& dataset, const std::vector<rules::Prediction>& predictions);

/// Serial reference for the OpenMP kernel above.
ConfusionMatrix confusion_serial(const Dataset& dataset,
                                 const std::vector<rules::Prediction>& predictions);

/// Each nonzero-support row sums to 1; zero-support rows stay all-zero.
std::vector<std::vector<double>> normalize_rows(const ConfusionMatrix& matrix);
std::vector<std::vector<double>> normalize_rows(const std::vector<std::vector<double>>& rows);

struct ClassMetrics {
  std::string label;
  double precision = 0.0;  // percent
  double recall = 0.0;     // percent
  double f1 = 0.0;         // percent
  std::uint64_t support = 0;
  bool zero_support = false;  // the 0/0 -> 0 convention was applied
};

/// All values are percentages at full precision; rounding happens only at
/// presentation (text table / round_percent).
struct MetricReport {
  std::string model_tag;
  std::vector<ClassMetrics> per_class;
  double micro_f1 = 0.0;
  double macro_f1 = 0.0;           // unweighted mean of per-class F1 over all classes
  double accuracy = 0.0;           // trace / total
  double balanced_accuracy = 0.0;  // unweighted mean of per-class recall
  std::uint64_t total = 0;
};

MetricReport report(const ConfusionMatrix& matrix, const std::string& model_tag = "model");

/// Disease-class recalls in percent; healthy excluded (the selection step
/// iterates disease keys only). Zero-support classes record 0.0, flagged.
RecallTable recall_table(const ConfusionMatrix& matrix, const ClassCatalog& catalog,
                         const std::string& model_tag);

/// Recall table reconstructed from a serialized report, e.g. for selection
/// runs driven from two evaluation outputs.
RecallTable recall_table_from_report(const MetricReport& report, const ClassCatalog& catalog);

/// Half-up rounding to 2 decimals, presentation only.
double round_percent(double value);

void write_report_json(const MetricReport& report, std::ostream& out);
MetricReport read_report_json(std::istream& in);

void write_text_table(const MetricReport& report, std::ostream& out);

/// Row-normalized matrix with labels and per-row support, recomputable back
/// to every aggregate metric.
void write_confusion_csv(const ConfusionMatrix& matrix, std::ostream& out);

}  // namespace remine::metrics
