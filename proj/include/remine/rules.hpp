// Copyright (c) 2026 remine contributors
//
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "remine/core.hpp"

namespace remine::rules {

enum class RuleKind { DetectionOnly, TwoStage };

struct Prediction {
  std::string image_id;
  std::string label;
  std::optional<double> confidence;  // absent <=> no detection voted (healthy by default)
  RuleKind rule = RuleKind::DetectionOnly;

  bool operator==(const Prediction&) const = default;
};

enum class GateVerdict { Healthy, Diseased };

/// First-stage healthy/diseased verdicts from an external binary classifier.
struct BinaryGate {
  std::unordered_map<std::string, GateVerdict> by_image;
};

/// The winning detection under the deterministic total order: higher
/// confidence first, then lower canonical class index, then lexicographic box
/// order (x, y, w, h). Null for an empty list.
const Detection* winning_detection(const std::vector<Detection>& detections,
                                   const ClassCatalog& catalog);

/// No boxes -> healthy; otherwise the class of the winning detection.
Prediction classify_by_detection(const std::string& image_id,
                                 const std::vector<Detection>& detections,
                                 const ClassCatalog& catalog);

/// Gate says healthy -> healthy; gate says diseased -> second-stage detection
/// rule (which may itself fall back to healthy when no boxes fire).
Prediction classify_two_stage(const std::string& image_id, const BinaryGate& gate,
                              const std::vector<Detection>& detections,
                              const ClassCatalog& catalog);

/// One prediction per image, dataset order preserved. Coverage (and, for the
/// two-stage rule, gate completeness) is checked before any prediction.
std::vector<Prediction> classify_dataset(const Dataset& dataset, const DetectionSet& detections,
                                         RuleKind rule, const BinaryGate* gate = nullptr);

/// Serial reference for the OpenMP kernel above.
std::vector<Prediction> classify_dataset_serial(const Dataset& dataset,
                                                const DetectionSet& detections, RuleKind rule,
                                                const BinaryGate* gate = nullptr);

}  // namespace remine::rules
