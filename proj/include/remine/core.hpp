// Copyright (c) 2026 remine contributors
//
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "remine/error.hpp"

namespace remine {

/// Ordered disease labels plus the distinguished healthy label. Index i in
/// [0, N) is the i-th disease in caller order, index N is healthy. The
/// ordering is stable and defines the canonical class indices used by every
/// matrix, label file and report in the toolkit.
class ClassCatalog {
 public:
  ClassCatalog() = default;

  const std::vector<std::string>& diseases() const { return diseases_; }
  const std::string& healthy() const { return healthy_; }

  std::size_t num_diseases() const { return diseases_.size(); }
  std::size_t num_classes() const { return diseases_.size() + 1; }
  std::size_t healthy_index() const { return diseases_.size(); }

  std::optional<std::size_t> index_of(const std::string& label) const;
  std::size_t require_index(const std::string& label) const;  // throws UnknownLabel
  const std::string& label_at(std::size_t index) const;
  bool contains(const std::string& label) const { return index_of(label).has_value(); }
  bool is_healthy(const std::string& label) const { return label == healthy_; }

  /// diseases then healthy, canonical order
  std::vector<std::string> all_labels() const;

  bool operator==(const ClassCatalog& other) const {
    return diseases_ == other.diseases_ && healthy_ == other.healthy_;
  }

  friend ClassCatalog build_catalog(std::vector<std::string> disease_labels,
                                    std::string healthy_label);

 private:
  std::vector<std::string> diseases_;
  std::string healthy_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Errors: DuplicateLabel, HealthyCollision; empty labels are a SchemaError.
ClassCatalog build_catalog(std::vector<std::string> disease_labels, std::string healthy_label);

/// Top-left + width/height pixel convention, the single internal convention.
/// Conversions (e.g. normalized centers for label export) happen only in io.
struct BoundingBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;
  std::uint32_t image_w = 0;
  std::uint32_t image_h = 0;

  bool operator==(const BoundingBox&) const = default;
};

/// Empty string when the box satisfies every geometry invariant, otherwise a
/// description of the first violation.
std::string box_violation(const BoundingBox& box);

struct Detection {
  std::string label;
  double confidence = 0.0;  // [0, 1]
  BoundingBox box;

  bool operator==(const Detection&) const = default;
};

struct Annotation {
  std::string label;
  BoundingBox box;

  bool operator==(const Annotation&) const = default;
};

struct ImageRecord {
  std::string image_id;
  std::string true_label;
  std::uint32_t image_w = 0;
  std::uint32_t image_h = 0;
  std::vector<Annotation> annotations;

  // Mining provenance, carried as inert metadata on hard-sample records so a
  // later re-selection can be replayed without re-mining.
  std::optional<std::string> mined_class;
  std::optional<double> key_confidence;

  bool operator==(const ImageRecord&) const = default;
};

/// A record list that passed validate_dataset. Immutable by convention; safe
/// to share across concurrent readers.
struct Dataset {
  ClassCatalog catalog;
  std::vector<ImageRecord> records;
  std::unordered_map<std::string, std::size_t> by_id;

  std::size_t size() const { return records.size(); }
  const ImageRecord* find(const std::string& image_id) const;
};

/// Checks every record invariant and reports all violations at once:
/// DuplicateImageId, UnknownLabel, BoxOutOfBounds, HealthyWithAnnotations,
/// LabelMismatch (annotated boxes must carry the image's true label).
Dataset validate_dataset(std::vector<ImageRecord> records, const ClassCatalog& catalog);

/// image_id -> detections. An image with no detections maps to the empty
/// list, never to absence, for every image of the companion dataset.
struct DetectionSet {
  std::unordered_map<std::string, std::vector<Detection>> by_image;

  std::vector<std::string> missing_from(const Dataset& dataset) const;
  void require_covers(const Dataset& dataset) const;  // throws CoverageMismatch

  const std::vector<Detection>& of(const std::string& image_id) const;
};

struct RecallEntry {
  double percent = 0.0;  // [0, 100]
  bool zero_support = false;
};

/// Per-disease-class recall for one model generation.
struct RecallTable {
  std::string model_tag;
  std::unordered_map<std::string, RecallEntry> by_class;

  const RecallEntry* find(const std::string& label) const;
  double percent_of(const std::string& label) const;  // throws MissingRecallEntry
};

}  // namespace remine
