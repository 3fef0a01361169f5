// Copyright (c) 2026 remine contributors
//
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "remine/core.hpp"

namespace remine::simulation {

/// Confusion-kernel model of a detector. Entry (i, j) is the probability
/// that a class-i image emits boxes of class j; per image one emitted class
/// is drawn from row i, and the residual row mass emits nothing (the
/// healthy-predicted path). Box geometry is uniform-random inside the image
/// bounds; nothing downstream consumes geometry semantically.
struct DetectorProfile {
  ClassCatalog catalog;
  std::vector<double> kernel;  // (N+1)^2 row-major, row sums <= 1
  std::pair<int, int> boxes_per_hit{1, 3};
  std::vector<std::pair<double, double>> confidence;  // per (i, j) interval in [0, 1]
  std::pair<double, double> box_fraction{0.08, 0.45};
  std::uint64_t seed = 0;

  std::size_t classes() const { return catalog.num_classes(); }
  double kernel_at(std::size_t truth, std::size_t emitted) const {
    return kernel[truth * classes() + emitted];
  }
  double& kernel_at(std::size_t truth, std::size_t emitted) {
    return kernel[truth * classes() + emitted];
  }
  double row_residual(std::size_t truth) const;

  bool operator==(const DetectorProfile&) const = default;
};

/// Uniform confidence interval applied to every (truth, emitted) pair.
DetectorProfile make_profile(const ClassCatalog& catalog, std::uint64_t seed,
                             std::pair<double, double> confidence_range = {0.3, 0.95});

void validate_profile(const DetectorProfile& profile);  // throws InvalidProfile

DetectorProfile load_profile(const std::filesystem::path& file, const ClassCatalog& catalog);
void save_profile(const DetectorProfile& profile, const std::filesystem::path& file);

/// Deterministic for fixed (dataset, profile): per-image sampling runs on an
/// independent substream derived from (seed, image_id), so parallel
/// generation is order-independent and reproducible.
DetectionSet simulate_detections(const Dataset& dataset, const DetectorProfile& profile);

/// Serial reference for the OpenMP kernel above.
DetectionSet simulate_detections_serial(const Dataset& dataset, const DetectorProfile& profile);

/// Per-class recall deltas (percentage points, healthy included) that model
/// the retraining effect of adding healthy hard-samples: improved healthy
/// recall, degraded look-alike disease recall.
struct DegradationModel {
  std::unordered_map<std::string, double> recall_deltas;
  /// Response sharpness of the healthy row to the retained hard-sample
  /// fraction when blending (see blend_retained); a small retained set
  /// already recovers most of the healthy-row improvement.
  double healthy_saturation = 40.0;
};

DegradationModel load_degradation(const std::filesystem::path& file);

/// New profile with shifted kernel mass; the original is untouched. Disease
/// diagonal losses flow to the no-emission residual, gains come from the
/// residual first; healthy-row gains shrink its false-positive mass
/// proportionally. Throws InvalidDegradation when a delta cannot be realized.
DetectorProfile apply_degradation(const DetectorProfile& profile, const DegradationModel& model);

/// Expected detector behavior after retraining on a subset of the mined
/// hard-samples: retained disease classes take the degraded rows, removed
/// classes keep the base rows, and the healthy row moves toward the degraded
/// one with a saturating function of the retained fraction.
DetectorProfile blend_retained(const DetectorProfile& base, const DetectorProfile& degraded,
                               const std::vector<std::string>& retained_classes,
                               double retained_fraction, double saturation);

}  // namespace remine::simulation
