// Copyright (c) 2026 remine contributors
//
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <unistd.h>

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "remine/core.hpp"
#include "remine/mining.hpp"
#include "remine/rng.hpp"
#include "remine/rules.hpp"

namespace remine::test {

inline ClassCatalog cucumber_catalog() {
  return build_catalog({"CCYV", "CLS", "DM", "GM", "MYSV", "MD", "PM"}, "HE");
}

inline ClassCatalog tomato_catalog() {
  return build_catalog({"BC", "BW", "CLM", "CTS", "GM", "LB", "LM", "PM", "YLC"}, "HE");
}

// Per-class hard-sample image counts after mining, cucumber / tomato.
inline std::vector<std::pair<std::string, std::size_t>> cucumber_hsm_counts() {
  return {{"CCYV", 1003}, {"CLS", 194}, {"DM", 307}, {"GM", 24},
          {"MYSV", 438}, {"MD", 2519}, {"PM", 435}};
}

inline std::vector<std::pair<std::string, std::size_t>> tomato_hsm_counts() {
  return {{"BC", 595}, {"BW", 931}, {"CLM", 64},  {"CTS", 50}, {"GM", 18},
          {"LB", 34},  {"LM", 349}, {"PM", 220},  {"YLC", 1092}};
}

// Recall pairs whose drops exceed 6 exactly for {CLS, GM, MYSV, MD, PM};
// DM sits exactly on the boundary and must be retained.
inline std::pair<RecallTable, RecallTable> cucumber_drop_fixture() {
  RecallTable r_org{"org", {}};
  RecallTable r_hsm{"hsm", {}};
  const std::vector<std::pair<std::string, double>> drops = {
      {"CCYV", 2.0}, {"CLS", 8.5}, {"DM", 6.0}, {"GM", 11.2},
      {"MYSV", 9.0}, {"MD", 14.75}, {"PM", 6.01}};
  for (const auto& [label, drop] : drops) {
    r_org.by_class.emplace(label, RecallEntry{90.0, false});
    r_hsm.by_class.emplace(label, RecallEntry{90.0 - drop, false});
  }
  return {r_org, r_hsm};
}

// Only BW's drop exceeds 6; LM sits exactly on the boundary.
inline std::pair<RecallTable, RecallTable> tomato_drop_fixture() {
  RecallTable r_org{"org", {}};
  RecallTable r_hsm{"hsm", {}};
  const std::vector<std::pair<std::string, double>> drops = {
      {"BC", -3.0}, {"BW", 13.4}, {"CLM", 1.0}, {"CTS", 0.5}, {"GM", 2.2},
      {"LB", 4.0},  {"LM", 6.0},  {"PM", 3.3},  {"YLC", 5.9}};
  for (const auto& [label, drop] : drops) {
    r_org.by_class.emplace(label, RecallEntry{85.0, false});
    r_hsm.by_class.emplace(label, RecallEntry{85.0 - drop, false});
  }
  return {r_org, r_hsm};
}

inline BoundingBox make_box(double x, double y, double w, double h, std::uint32_t image_w = 1000,
                            std::uint32_t image_h = 800) {
  return BoundingBox{x, y, w, h, image_w, image_h};
}

inline Detection make_detection(std::string label, double confidence,
                                BoundingBox box = make_box(10, 10, 50, 40)) {
  return Detection{std::move(label), confidence, box};
}

inline ImageRecord make_record(std::string image_id, std::string true_label,
                               std::vector<Annotation> annotations = {},
                               std::uint32_t image_w = 1000, std::uint32_t image_h = 800) {
  ImageRecord record;
  record.image_id = std::move(image_id);
  record.true_label = std::move(true_label);
  record.image_w = image_w;
  record.image_h = image_h;
  record.annotations = std::move(annotations);
  return record;
}

/// Synthesizes a hard-sample index with the requested per-class image counts
/// (one box per image, fabricated ids).
inline mining::HardSampleIndex index_with_counts(
    const ClassCatalog& catalog, const std::vector<std::pair<std::string, std::size_t>>& counts) {
  mining::HardSampleIndex index = mining::empty_index(catalog);
  for (const auto& [label, count] : counts) {
    const std::size_t class_index = catalog.require_index(label);
    for (std::size_t i = 0; i < count; ++i) {
      mining::HardSampleImage sample;
      sample.image_id = label + "_hs_" + std::to_string(i);
      sample.key_confidence = 0.5;
      sample.boxes.push_back(make_box(5, 5, 60, 60));
      index.per_class[class_index].push_back(std::move(sample));
    }
  }
  return index;
}

/// Expects `fn` to throw Error with the given code; returns the error.
template <typename Fn>
Error capture_error(Errc expected, Fn&& fn) {
  try {
    fn();
  } catch (const Error& error) {
    if (error.code() != expected) {
      throw std::runtime_error(std::string("expected ") + errc_name(expected) + ", got " +
                               errc_name(error.code()) + ": " + error.what());
    }
    return error;
  }
  throw std::runtime_error(std::string("expected ") + errc_name(expected) +
                           ", but no error was thrown");
}

/// Brute-force classification metrics in percent, tallied by direct label
/// comparison. Deliberately independent of ConfusionMatrix.
struct OracleMetrics {
  std::map<std::string, double> precision;
  std::map<std::string, double> recall;
  std::map<std::string, double> f1;
  std::map<std::string, std::size_t> support;
  double accuracy = 0.0;
  double micro_f1 = 0.0;
  double macro_f1 = 0.0;
  double balanced_accuracy = 0.0;
};

inline OracleMetrics brute_force_metrics(const std::vector<std::string>& truth,
                                         const std::vector<std::string>& predicted,
                                         const std::vector<std::string>& labels) {
  OracleMetrics oracle;
  std::size_t correct = 0;
  double pooled_tp = 0, pooled_fp = 0, pooled_fn = 0;
  double f1_sum = 0, recall_sum = 0;
  for (const std::string& label : labels) {
    std::size_t tp = 0, fp = 0, fn = 0, sup = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      const bool is_true = truth[i] == label;
      const bool is_pred = predicted[i] == label;
      if (is_true) ++sup;
      if (is_true && is_pred) ++tp;
      if (!is_true && is_pred) ++fp;
      if (is_true && !is_pred) ++fn;
    }
    const double precision = (tp + fp) == 0 ? 0.0 : 100.0 * tp / static_cast<double>(tp + fp);
    const double recall = (tp + fn) == 0 ? 0.0 : 100.0 * tp / static_cast<double>(tp + fn);
    const double f1 =
        (precision + recall) == 0.0 ? 0.0 : 2.0 * precision * recall / (precision + recall);
    oracle.precision[label] = precision;
    oracle.recall[label] = recall;
    oracle.f1[label] = f1;
    oracle.support[label] = sup;
    pooled_tp += tp;
    pooled_fp += fp;
    pooled_fn += fn;
    f1_sum += f1;
    recall_sum += recall;
  }
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] == predicted[i]) ++correct;
  }
  oracle.accuracy = truth.empty() ? 0.0 : 100.0 * correct / static_cast<double>(truth.size());
  oracle.micro_f1 = 100.0 * 2.0 * pooled_tp / (2.0 * pooled_tp + pooled_fp + pooled_fn);
  oracle.macro_f1 = f1_sum / static_cast<double>(labels.size());
  oracle.balanced_accuracy = recall_sum / static_cast<double>(labels.size());
  return oracle;
}

/// Scratch directory under the system temp root, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& stem) {
    static Rng name_rng(0x7e57d17ull ^ static_cast<std::uint64_t>(::getpid()));
    path_ = std::filesystem::temp_directory_path() /
            (stem + "_" + std::to_string(name_rng.next()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace remine::test
