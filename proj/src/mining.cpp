// Copyright (c) 2026 remine contributors
//
// SPDX-License-Identifier: Apache-2.0
//

#include "remine/mining.hpp"

#include <unordered_set>

#include "remine/parallel.hpp"
#include "remine/rules.hpp"

namespace remine::mining {

namespace {

struct MinedImage {
  bool mined = false;
  std::size_t class_index = 0;
  HardSampleImage sample;
};

void require_healthy_subset(const Dataset& subset, const ClassCatalog& catalog) {
  for (const ImageRecord& record : subset.records) {
    if (!catalog.is_healthy(record.true_label)) {
      throw Error(Errc::NonHealthyInput, "image '" + record.image_id + "' has true label '" +
                                             record.true_label + "', mining expects healthy only");
    }
  }
}

void require_known_labels(const Dataset& subset, const DetectionSet& detections,
                          const ClassCatalog& catalog) {
  for (const ImageRecord& record : subset.records) {
    for (const Detection& detection : detections.of(record.image_id)) {
      if (!catalog.contains(detection.label)) {
        throw Error(Errc::UnknownLabel, "detection on image '" + record.image_id +
                                            "' carries unknown label '" + detection.label + "'");
      }
    }
  }
}

// Floor + healthy filter, then the classification-rule winner keys the class.
MinedImage mine_one(const ImageRecord& record, const std::vector<Detection>& detections,
                    const MiningConfig& config, const ClassCatalog& catalog) {
  std::vector<Detection> survivors;
  survivors.reserve(detections.size());
  for (const Detection& detection : detections) {
    if (detection.confidence < config.confidence_floor) continue;
    if (catalog.is_healthy(detection.label)) continue;
    survivors.push_back(detection);
  }

  MinedImage result;
  const Detection* winner = rules::winning_detection(survivors, catalog);
  if (winner == nullptr) return result;

  result.mined = true;
  result.class_index = catalog.require_index(winner->label);
  result.sample.image_id = record.image_id;
  result.sample.key_confidence = winner->confidence;
  result.sample.boxes.reserve(survivors.size());
  for (const Detection& detection : survivors) result.sample.boxes.push_back(detection.box);
  return result;
}

// Deterministic ordered merge: catalog order across classes, dataset order
// within a class.
HardSampleIndex assemble(std::vector<MinedImage>& mined, const ClassCatalog& catalog) {
  HardSampleIndex index = empty_index(catalog);
  for (MinedImage& image : mined) {
    if (!image.mined) continue;
    index.per_class[image.class_index].push_back(std::move(image.sample));
  }
  return index;
}

}  // namespace

HardSampleIndex empty_index(const ClassCatalog& catalog) {
  HardSampleIndex index;
  index.catalog = catalog;
  index.per_class.assign(catalog.num_diseases(), {});
  return index;
}

std::size_t HardSampleIndex::class_count(const std::string& label) const {
  auto idx = catalog.index_of(label);
  if (!idx || *idx >= per_class.size()) return 0;
  return per_class[*idx].size();
}

std::size_t HardSampleIndex::total_images() const {
  std::size_t total = 0;
  for (const auto& bucket : per_class) total += bucket.size();
  return total;
}

void check_index(const HardSampleIndex& index) {
  std::vector<Issue> issues;
  if (index.per_class.size() != index.catalog.num_diseases()) {
    throw Error(Errc::SchemaError, "hard-sample index bucket count disagrees with the catalog");
  }
  std::unordered_set<std::string> seen;
  for (std::size_t c = 0; c < index.per_class.size(); ++c) {
    for (const HardSampleImage& sample : index.per_class[c]) {
      if (!seen.insert(sample.image_id).second) {
        issues.push_back({Errc::DuplicateImageId,
                          "image '" + sample.image_id + "' appears under more than one class", {}});
      }
      if (sample.boxes.empty()) {
        issues.push_back({Errc::EmptyIndex, "image '" + sample.image_id + "' has no boxes", {}});
      }
      for (const BoundingBox& box : sample.boxes) {
        if (std::string violation = box_violation(box); !violation.empty()) {
          issues.push_back({Errc::BoxOutOfBounds, "image '" + sample.image_id + "': " + violation, {}});
        }
      }
    }
  }
  if (!issues.empty()) throw Error(std::move(issues));
}

HardSampleIndex mine_hard_samples_serial(const Dataset& healthy_subset,
                                         const DetectionSet& detections,
                                         const MiningConfig& config, const ClassCatalog& catalog) {
  require_healthy_subset(healthy_subset, catalog);
  detections.require_covers(healthy_subset);
  require_known_labels(healthy_subset, detections, catalog);

  std::vector<MinedImage> mined(healthy_subset.records.size());
  for (std::size_t i = 0; i < healthy_subset.records.size(); ++i) {
    const ImageRecord& record = healthy_subset.records[i];
    mined[i] = mine_one(record, detections.of(record.image_id), config, catalog);
  }
  return assemble(mined, catalog);
}

HardSampleIndex mine_hard_samples(const Dataset& healthy_subset, const DetectionSet& detections,
                                  const MiningConfig& config, const ClassCatalog& catalog) {
  require_healthy_subset(healthy_subset, catalog);
  detections.require_covers(healthy_subset);
  require_known_labels(healthy_subset, detections, catalog);

  std::vector<MinedImage> mined(healthy_subset.records.size());
  const std::int64_t count = static_cast<std::int64_t>(healthy_subset.records.size());
#ifdef _OPENMP
#pragma omp parallel for num_threads(worker_threads()) schedule(static)
#endif
  for (std::int64_t i = 0; i < count; ++i) {
    const ImageRecord& record = healthy_subset.records[static_cast<std::size_t>(i)];
    mined[static_cast<std::size_t>(i)] =
        mine_one(record, detections.of(record.image_id), config, catalog);
  }
  return assemble(mined, catalog);
}

IndexStats index_stats(const HardSampleIndex& index) {
  IndexStats stats;
  for (std::size_t c = 0; c < index.catalog.num_diseases(); ++c) {
    stats.per_class.emplace_back(index.catalog.diseases()[c], index.per_class[c].size());
    stats.total += index.per_class[c].size();
  }
  return stats;
}

std::vector<ImageRecord> as_annotations(const HardSampleIndex& index, const ClassCatalog& catalog) {
  std::vector<ImageRecord> records;
  records.reserve(index.total_images());
  for (std::size_t c = 0; c < index.per_class.size(); ++c) {
    for (const HardSampleImage& sample : index.per_class[c]) {
      ImageRecord record;
      record.image_id = sample.image_id;
      record.true_label = catalog.healthy();
      record.image_w = sample.boxes.front().image_w;
      record.image_h = sample.boxes.front().image_h;
      record.mined_class = catalog.diseases()[c];
      record.key_confidence = sample.key_confidence;
      for (const BoundingBox& box : sample.boxes) {
        record.annotations.push_back({catalog.healthy(), box});
      }
      records.push_back(std::move(record));
    }
  }
  return records;
}

}  // namespace remine::mining
