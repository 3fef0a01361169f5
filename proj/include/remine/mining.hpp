// Copyright (c) 2026 remine contributors
//
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "remine/core.hpp"

namespace remine::mining {

struct MiningConfig {
  /// Detections below this confidence do not participate in mining.
  /// Survivors have confidence >= confidence_floor.
  double confidence_floor = 0.25;
};

struct HardSampleImage {
  std::string image_id;
  std::vector<BoundingBox> boxes;  // never empty
  double key_confidence = 0.0;     // confidence of the box that keyed the class

  bool operator==(const HardSampleImage&) const = default;
};

/// Healthy images carrying mis-detected boxes, keyed by the disease class of
/// their winning false-positive box. Each image appears under exactly one
/// class; buckets follow catalog order.
struct HardSampleIndex {
  ClassCatalog catalog;
  std::vector<std::vector<HardSampleImage>> per_class;  // size = num_diseases

  std::size_t class_count(const std::string& label) const;
  std::size_t total_images() const;

  bool operator==(const HardSampleIndex&) const = default;
};

HardSampleIndex empty_index(const ClassCatalog& catalog);

/// Throws Error(EmptyIndex / DuplicateImageId / ...) when the index breaks a
/// structural invariant; used after deserialization and in tests.
void check_index(const HardSampleIndex& index);

/// Harvests false positives on a healthy-only dataset slice. An image whose
/// post-floor detection list is non-empty lands under the class of its
/// winning surviving box (same tie-break as the classification rule); all its
/// surviving boxes become pseudo-annotations. Healthy-labeled detections are
/// correct, not false positives, and never mine.
HardSampleIndex mine_hard_samples(const Dataset& healthy_subset, const DetectionSet& detections,
                                  const MiningConfig& config, const ClassCatalog& catalog);

/// Serial reference for the OpenMP kernel above.
HardSampleIndex mine_hard_samples_serial(const Dataset& healthy_subset,
                                         const DetectionSet& detections,
                                         const MiningConfig& config, const ClassCatalog& catalog);

struct IndexStats {
  std::vector<std::pair<std::string, std::size_t>> per_class;  // catalog order, zeros included
  std::size_t total = 0;
};

IndexStats index_stats(const HardSampleIndex& index);

/// One record per hard-sample image with every mined box relabeled to the
/// healthy class; the mined class key survives as inert metadata.
std::vector<ImageRecord> as_annotations(const HardSampleIndex& index, const ClassCatalog& catalog);

}  // namespace remine::mining
