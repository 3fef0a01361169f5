// Copyright (c) 2026 remine contributors
//
// SPDX-License-Identifier: Apache-2.0
//

#include "remine/core.hpp"

#include <cmath>
#include <sstream>
#include <unordered_set>

namespace remine {

std::optional<std::size_t> ClassCatalog::index_of(const std::string& label) const {
  auto it = index_.find(label);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t ClassCatalog::require_index(const std::string& label) const {
  auto idx = index_of(label);
  if (!idx) throw Error(Errc::UnknownLabel, "label '" + label + "' is not in the catalog");
  return *idx;
}

const std::string& ClassCatalog::label_at(std::size_t index) const {
  if (index < diseases_.size()) return diseases_[index];
  return healthy_;
}

std::vector<std::string> ClassCatalog::all_labels() const {
  std::vector<std::string> labels = diseases_;
  labels.push_back(healthy_);
  return labels;
}

ClassCatalog build_catalog(std::vector<std::string> disease_labels, std::string healthy_label) {
  if (healthy_label.empty()) {
    throw Error(Errc::SchemaError, "healthy label must be a non-empty string");
  }
  ClassCatalog catalog;
  catalog.diseases_ = std::move(disease_labels);
  catalog.healthy_ = std::move(healthy_label);

  std::vector<Issue> issues;
  for (std::size_t i = 0; i < catalog.diseases_.size(); ++i) {
    const std::string& label = catalog.diseases_[i];
    if (label.empty()) {
      issues.push_back({Errc::SchemaError, "disease label at index " + std::to_string(i) + " is empty", {}});
      continue;
    }
    if (label == catalog.healthy_) {
      issues.push_back({Errc::HealthyCollision,
                        "healthy label '" + label + "' collides with a disease label", {}});
      continue;
    }
    auto [it, inserted] = catalog.index_.emplace(label, i);
    (void)it;
    if (!inserted) {
      issues.push_back({Errc::DuplicateLabel, "duplicate disease label '" + label + "'", {}});
    }
  }
  if (!issues.empty()) throw Error(std::move(issues));

  catalog.index_.emplace(catalog.healthy_, catalog.diseases_.size());
  return catalog;
}

std::string box_violation(const BoundingBox& box) {
  std::ostringstream what;
  if (box.image_w == 0 || box.image_h == 0) {
    what << "image dimensions must be positive, got " << box.image_w << "x" << box.image_h;
  } else if (!(std::isfinite(box.x) && std::isfinite(box.y) && std::isfinite(box.w) &&
               std::isfinite(box.h))) {
    what << "box coordinates must be finite";
  } else if (box.w <= 0.0 || box.h <= 0.0) {
    what << "box extent must be positive, got w=" << box.w << " h=" << box.h;
  } else if (box.x < 0.0 || box.y < 0.0) {
    what << "box origin must be non-negative, got x=" << box.x << " y=" << box.y;
  } else if (box.x + box.w > static_cast<double>(box.image_w)) {
    what << "box right edge " << box.x + box.w << " exceeds image width " << box.image_w;
  } else if (box.y + box.h > static_cast<double>(box.image_h)) {
    what << "box bottom edge " << box.y + box.h << " exceeds image height " << box.image_h;
  }
  return what.str();
}

const ImageRecord* Dataset::find(const std::string& image_id) const {
  auto it = by_id.find(image_id);
  if (it == by_id.end()) return nullptr;
  return &records[it->second];
}

Dataset validate_dataset(std::vector<ImageRecord> records, const ClassCatalog& catalog) {
  std::vector<Issue> issues;
  std::unordered_map<std::string, std::size_t> by_id;
  by_id.reserve(records.size());

  for (std::size_t i = 0; i < records.size(); ++i) {
    const ImageRecord& record = records[i];
    const std::string where = "record " + std::to_string(i) + " ('" + record.image_id + "')";

    if (record.image_id.empty()) {
      issues.push_back({Errc::SchemaError, where + ": empty image_id", {}});
    }
    auto [it, inserted] = by_id.emplace(record.image_id, i);
    (void)it;
    if (!inserted) {
      issues.push_back({Errc::DuplicateImageId, where + ": image_id already seen", {}});
    }
    if (!catalog.contains(record.true_label)) {
      issues.push_back({Errc::UnknownLabel, where + ": true_label '" + record.true_label + "'", {}});
      continue;
    }
    if (record.image_w == 0 || record.image_h == 0) {
      issues.push_back({Errc::SchemaError, where + ": image dimensions must be positive", {}});
    }
    if (catalog.is_healthy(record.true_label) && !record.annotations.empty()) {
      issues.push_back({Errc::HealthyWithAnnotations,
                        where + ": healthy record carries " +
                            std::to_string(record.annotations.size()) + " annotation(s)", {}});
      continue;
    }
    for (const Annotation& annotation : record.annotations) {
      if (!catalog.contains(annotation.label)) {
        issues.push_back({Errc::UnknownLabel, where + ": annotation label '" + annotation.label + "'", {}});
        continue;
      }
      if (annotation.label != record.true_label) {
        issues.push_back({Errc::LabelMismatch,
                          where + ": annotation label '" + annotation.label +
                              "' differs from true_label '" + record.true_label + "'", {}});
      }
      if (annotation.box.image_w != record.image_w || annotation.box.image_h != record.image_h) {
        issues.push_back({Errc::BoxOutOfBounds,
                          where + ": box image dimensions disagree with the record", {}});
        continue;
      }
      if (std::string violation = box_violation(annotation.box); !violation.empty()) {
        issues.push_back({Errc::BoxOutOfBounds, where + ": " + violation, {}});
      }
    }
  }

  if (!issues.empty()) throw Error(std::move(issues));

  Dataset dataset;
  dataset.catalog = catalog;
  dataset.records = std::move(records);
  dataset.by_id = std::move(by_id);
  return dataset;
}

std::vector<std::string> DetectionSet::missing_from(const Dataset& dataset) const {
  std::vector<std::string> missing;
  for (const ImageRecord& record : dataset.records) {
    if (by_image.find(record.image_id) == by_image.end()) missing.push_back(record.image_id);
  }
  return missing;
}

void DetectionSet::require_covers(const Dataset& dataset) const {
  std::vector<std::string> missing = missing_from(dataset);
  if (missing.empty()) return;
  std::string preview;
  for (std::size_t i = 0; i < missing.size() && i < 5; ++i) {
    if (i > 0) preview += ", ";
    preview += missing[i];
  }
  throw Error(Errc::CoverageMismatch,
              std::to_string(missing.size()) + " dataset image(s) have no detection entry: " +
                  preview + (missing.size() > 5 ? ", ..." : ""));
}

const std::vector<Detection>& DetectionSet::of(const std::string& image_id) const {
  static const std::vector<Detection> kEmpty;
  auto it = by_image.find(image_id);
  if (it == by_image.end()) return kEmpty;
  return it->second;
}

const RecallEntry* RecallTable::find(const std::string& label) const {
  auto it = by_class.find(label);
  if (it == by_class.end()) return nullptr;
  return &it->second;
}

double RecallTable::percent_of(const std::string& label) const {
  const RecallEntry* entry = find(label);
  if (!entry) {
    throw Error(Errc::MissingRecallEntry,
                "recall table '" + model_tag + "' has no entry for class '" + label + "'");
  }
  return entry->percent;
}

}  // namespace remine
