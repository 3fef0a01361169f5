// Copyright (c) 2026 remine contributors
//
// SPDX-License-Identifier: Apache-2.0
//

#include "remine/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>

#include "json.hpp"
#include "remine/parallel.hpp"

namespace remine::metrics {

namespace {

using nlohmann::json;

// Resolves (true index, predicted index) pairs up front so the tally loop is
// pure integer work and cannot throw.
std::vector<std::pair<std::size_t, std::size_t>> index_pairs(
    const Dataset& dataset, const std::vector<rules::Prediction>& predictions) {
  if (predictions.size() != dataset.records.size()) {
    throw Error(Errc::CoverageMismatch,
                "expected exactly one prediction per image: " + std::to_string(dataset.size()) +
                    " images vs " + std::to_string(predictions.size()) + " predictions");
  }
  std::vector<std::pair<std::size_t, std::size_t>> pairs(predictions.size());
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const ImageRecord& record = dataset.records[i];
    const rules::Prediction& prediction = predictions[i];
    if (prediction.image_id != record.image_id) {
      throw Error(Errc::CoverageMismatch, "prediction " + std::to_string(i) + " is for image '" +
                                              prediction.image_id + "', expected '" +
                                              record.image_id + "'");
    }
    pairs[i] = {dataset.catalog.require_index(record.true_label),
                dataset.catalog.require_index(prediction.label)};
  }
  return pairs;
}

ConfusionMatrix empty_matrix(const ClassCatalog& catalog) {
  ConfusionMatrix matrix;
  matrix.labels = catalog.all_labels();
  matrix.counts.assign(matrix.labels.size() * matrix.labels.size(), 0);
  return matrix;
}

}  // namespace

std::vector<std::uint64_t> ConfusionMatrix::row_sums() const {
  std::vector<std::uint64_t> sums(classes(), 0);
  for (std::size_t t = 0; t < classes(); ++t)
    for (std::size_t p = 0; p < classes(); ++p) sums[t] += at(t, p);
  return sums;
}

std::vector<std::uint64_t> ConfusionMatrix::col_sums() const {
  std::vector<std::uint64_t> sums(classes(), 0);
  for (std::size_t t = 0; t < classes(); ++t)
    for (std::size_t p = 0; p < classes(); ++p) sums[p] += at(t, p);
  return sums;
}

std::uint64_t ConfusionMatrix::trace() const {
  std::uint64_t sum = 0;
  for (std::size_t i = 0; i < classes(); ++i) sum += at(i, i);
  return sum;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  if (labels != other.labels) {
    throw Error(Errc::CoverageMismatch, "cannot merge confusion matrices over different catalogs");
  }
  for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
  total += other.total;
  return *this;
}

ConfusionMatrix confusion_serial(const Dataset& dataset,
                                 const std::vector<rules::Prediction>& predictions) {
  const auto pairs = index_pairs(dataset, predictions);
  ConfusionMatrix matrix = empty_matrix(dataset.catalog);
  for (const auto& [truth, predicted] : pairs) ++matrix.at(truth, predicted);
  matrix.total = pairs.size();
  return matrix;
}

ConfusionMatrix confusion(const Dataset& dataset,
                          const std::vector<rules::Prediction>& predictions) {
  const auto pairs = index_pairs(dataset, predictions);
  ConfusionMatrix matrix = empty_matrix(dataset.catalog);
  const std::size_t stride = matrix.classes();
  const std::int64_t count = static_cast<std::int64_t>(pairs.size());

#ifdef _OPENMP
#pragma omp parallel num_threads(worker_threads())
  {
    std::vector<std::uint64_t> local(stride * stride, 0);
#pragma omp for schedule(static)
    for (std::int64_t i = 0; i < count; ++i) {
      const auto& [truth, predicted] = pairs[static_cast<std::size_t>(i)];
      ++local[truth * stride + predicted];
    }
#pragma omp critical
    for (std::size_t k = 0; k < local.size(); ++k) matrix.counts[k] += local[k];
  }
#else
  for (std::int64_t i = 0; i < count; ++i) {
    const auto& [truth, predicted] = pairs[static_cast<std::size_t>(i)];
    ++matrix.counts[truth * stride + predicted];
  }
#endif

  matrix.total = pairs.size();
  return matrix;
}

std::vector<std::vector<double>> normalize_rows(const ConfusionMatrix& matrix) {
  std::vector<std::vector<double>> rows(matrix.classes(),
                                        std::vector<double>(matrix.classes(), 0.0));
  for (std::size_t t = 0; t < matrix.classes(); ++t) {
    std::uint64_t support = 0;
    for (std::size_t p = 0; p < matrix.classes(); ++p) support += matrix.at(t, p);
    if (support == 0) continue;
    for (std::size_t p = 0; p < matrix.classes(); ++p) {
      rows[t][p] = static_cast<double>(matrix.at(t, p)) / static_cast<double>(support);
    }
  }
  return rows;
}

std::vector<std::vector<double>> normalize_rows(const std::vector<std::vector<double>>& rows) {
  std::vector<std::vector<double>> normalized(rows.size());
  for (std::size_t t = 0; t < rows.size(); ++t) {
    normalized[t].assign(rows[t].size(), 0.0);
    double sum = 0.0;
    for (double v : rows[t]) sum += v;
    if (sum == 0.0) continue;
    for (std::size_t p = 0; p < rows[t].size(); ++p) normalized[t][p] = rows[t][p] / sum;
  }
  return normalized;
}

MetricReport report(const ConfusionMatrix& matrix, const std::string& model_tag) {
  if (matrix.total == 0 || matrix.classes() == 0) {
    throw Error(Errc::EmptyMatrix, "cannot report metrics on an empty confusion matrix");
  }

  const auto rows = matrix.row_sums();
  const auto cols = matrix.col_sums();

  MetricReport result;
  result.model_tag = model_tag;
  result.total = matrix.total;

  double f1_sum = 0.0;
  double recall_sum = 0.0;
  for (std::size_t c = 0; c < matrix.classes(); ++c) {
    const double tp = static_cast<double>(matrix.at(c, c));
    ClassMetrics entry;
    entry.label = matrix.labels[c];
    entry.support = rows[c];
    entry.zero_support = rows[c] == 0;
    entry.precision = cols[c] == 0 ? 0.0 : 100.0 * tp / static_cast<double>(cols[c]);
    entry.recall = rows[c] == 0 ? 0.0 : 100.0 * tp / static_cast<double>(rows[c]);
    const double denom = entry.precision + entry.recall;
    entry.f1 = denom == 0.0 ? 0.0 : 2.0 * entry.precision * entry.recall / denom;
    f1_sum += entry.f1;
    recall_sum += entry.recall;
    result.per_class.push_back(std::move(entry));
  }

  // Pooled counts over all classes. With one prediction per image the pooled
  // false positives equal the pooled false negatives.
  const double pooled_tp = static_cast<double>(matrix.trace());
  const double pooled_fp = static_cast<double>(matrix.total) - pooled_tp;
  const double pooled_fn = static_cast<double>(matrix.total) - pooled_tp;
  result.micro_f1 = 100.0 * 2.0 * pooled_tp / (2.0 * pooled_tp + pooled_fp + pooled_fn);
  result.macro_f1 = f1_sum / static_cast<double>(matrix.classes());
  result.accuracy = 100.0 * pooled_tp / static_cast<double>(matrix.total);
  result.balanced_accuracy = recall_sum / static_cast<double>(matrix.classes());
  return result;
}

RecallTable recall_table(const ConfusionMatrix& matrix, const ClassCatalog& catalog,
                         const std::string& model_tag) {
  RecallTable table;
  table.model_tag = model_tag;
  const auto rows = matrix.row_sums();
  for (std::size_t c = 0; c < catalog.num_diseases(); ++c) {
    RecallEntry entry;
    entry.zero_support = rows[c] == 0;
    entry.percent = entry.zero_support
                        ? 0.0
                        : 100.0 * static_cast<double>(matrix.at(c, c)) / static_cast<double>(rows[c]);
    table.by_class.emplace(catalog.diseases()[c], entry);
  }
  return table;
}

RecallTable recall_table_from_report(const MetricReport& report, const ClassCatalog& catalog) {
  RecallTable table;
  table.model_tag = report.model_tag;
  for (const ClassMetrics& entry : report.per_class) {
    if (catalog.is_healthy(entry.label)) continue;
    table.by_class.emplace(entry.label, RecallEntry{entry.recall, entry.zero_support});
  }
  for (const std::string& disease : catalog.diseases()) {
    if (table.by_class.find(disease) == table.by_class.end()) {
      throw Error(Errc::MissingRecallEntry,
                  "report '" + report.model_tag + "' has no entry for class '" + disease + "'");
    }
  }
  return table;
}

double round_percent(double value) { return std::floor(value * 100.0 + 0.5) / 100.0; }

void write_report_json(const MetricReport& report, std::ostream& out) {
  json doc;
  doc["model_tag"] = report.model_tag;
  doc["total"] = report.total;
  doc["micro_f1"] = report.micro_f1;
  doc["macro_f1"] = report.macro_f1;
  doc["accuracy"] = report.accuracy;
  doc["balanced_accuracy"] = report.balanced_accuracy;
  json per_class = json::array();
  for (const ClassMetrics& entry : report.per_class) {
    per_class.push_back({{"label", entry.label},
                         {"precision", entry.precision},
                         {"recall", entry.recall},
                         {"f1", entry.f1},
                         {"support", entry.support},
                         {"zero_support", entry.zero_support}});
  }
  doc["per_class"] = std::move(per_class);
  out << doc.dump(2) << "\n";
}

MetricReport read_report_json(std::istream& in) {
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw Error(Errc::SyntaxError, "metric report is not a JSON object");
  }
  MetricReport report;
  try {
    report.model_tag = doc.at("model_tag").get<std::string>();
    report.total = doc.at("total").get<std::uint64_t>();
    report.micro_f1 = doc.at("micro_f1").get<double>();
    report.macro_f1 = doc.at("macro_f1").get<double>();
    report.accuracy = doc.at("accuracy").get<double>();
    report.balanced_accuracy = doc.at("balanced_accuracy").get<double>();
    for (const json& entry : doc.at("per_class")) {
      ClassMetrics metrics;
      metrics.label = entry.at("label").get<std::string>();
      metrics.precision = entry.at("precision").get<double>();
      metrics.recall = entry.at("recall").get<double>();
      metrics.f1 = entry.at("f1").get<double>();
      metrics.support = entry.at("support").get<std::uint64_t>();
      metrics.zero_support = entry.at("zero_support").get<bool>();
      report.per_class.push_back(std::move(metrics));
    }
  } catch (const json::exception& e) {
    throw Error(Errc::SchemaError, std::string("metric report: ") + e.what());
  }
  return report;
}

void write_text_table(const MetricReport& report, std::ostream& out) {
  char line[160];
  std::snprintf(line, sizeof(line), "%-12s %10s %10s %10s %10s\n", "class", "precision", "recall",
                "f1", "support");
  out << line;
  for (const ClassMetrics& entry : report.per_class) {
    std::snprintf(line, sizeof(line), "%-12s %10.2f %10.2f %10.2f %10llu%s\n", entry.label.c_str(),
                  round_percent(entry.precision), round_percent(entry.recall),
                  round_percent(entry.f1), static_cast<unsigned long long>(entry.support),
                  entry.zero_support ? "  (no support)" : "");
    out << line;
  }
  std::snprintf(line, sizeof(line),
                "micro-F1 %.2f | macro-F1 %.2f | accuracy %.2f | balanced accuracy %.2f\n",
                round_percent(report.micro_f1), round_percent(report.macro_f1),
                round_percent(report.accuracy), round_percent(report.balanced_accuracy));
  out << line;
}

void write_confusion_csv(const ConfusionMatrix& matrix, std::ostream& out) {
  const auto normalized = normalize_rows(matrix);
  const auto supports = matrix.row_sums();
  out << "label";
  for (const std::string& label : matrix.labels) out << "," << label;
  out << ",support\n";
  char cell[64];
  for (std::size_t t = 0; t < matrix.classes(); ++t) {
    out << matrix.labels[t];
    for (std::size_t p = 0; p < matrix.classes(); ++p) {
      std::snprintf(cell, sizeof(cell), ",%.17g", normalized[t][p]);
      out << cell;
    }
    out << "," << supports[t] << "\n";
  }
}

}  // namespace remine::metrics
