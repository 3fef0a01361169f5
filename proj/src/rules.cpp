// Copyright (c) 2026 remine contributors
//
// SPDX-License-Identifier: Apache-2.0
//

#include "remine/rules.hpp"

#include <tuple>

#include "remine/parallel.hpp"

namespace remine::rules {

namespace {

// Smaller key wins. Class index resolves before the call (detections are
// validated against the catalog upstream).
std::tuple<double, std::size_t, double, double, double, double> order_key(
    const Detection& detection, const ClassCatalog& catalog) {
  return {-detection.confidence, catalog.require_index(detection.label), detection.box.x,
          detection.box.y, detection.box.w, detection.box.h};
}

// Errors must surface before any prediction; the parallel loop never throws.
void require_known_labels(const DetectionSet& detections, const Dataset& dataset) {
  for (const ImageRecord& record : dataset.records) {
    for (const Detection& detection : detections.of(record.image_id)) {
      if (!dataset.catalog.contains(detection.label)) {
        throw Error(Errc::UnknownLabel, "detection on image '" + record.image_id +
                                            "' carries unknown label '" + detection.label + "'");
      }
    }
  }
}

void require_gate_covers(const BinaryGate* gate, const Dataset& dataset) {
  if (gate == nullptr) {
    throw Error(Errc::MissingGateVerdict, "two-stage rule requested without a gate");
  }
  std::vector<std::string> missing;
  for (const ImageRecord& record : dataset.records) {
    if (gate->by_image.find(record.image_id) == gate->by_image.end()) {
      missing.push_back(record.image_id);
    }
  }
  if (!missing.empty()) {
    throw Error(Errc::MissingGateVerdict,
                "gate has no verdict for " + std::to_string(missing.size()) +
                    " image(s), first: '" + missing.front() + "'");
  }
}

}  // namespace

const Detection* winning_detection(const std::vector<Detection>& detections,
                                   const ClassCatalog& catalog) {
  const Detection* best = nullptr;
  for (const Detection& candidate : detections) {
    if (best == nullptr || order_key(candidate, catalog) < order_key(*best, catalog)) {
      best = &candidate;
    }
  }
  return best;
}

Prediction classify_by_detection(const std::string& image_id,
                                 const std::vector<Detection>& detections,
                                 const ClassCatalog& catalog) {
  const Detection* winner = winning_detection(detections, catalog);
  if (winner == nullptr) {
    return {image_id, catalog.healthy(), std::nullopt, RuleKind::DetectionOnly};
  }
  return {image_id, winner->label, winner->confidence, RuleKind::DetectionOnly};
}

Prediction classify_two_stage(const std::string& image_id, const BinaryGate& gate,
                              const std::vector<Detection>& detections,
                              const ClassCatalog& catalog) {
  auto it = gate.by_image.find(image_id);
  if (it == gate.by_image.end()) {
    throw Error(Errc::MissingGateVerdict, "no gate verdict for image '" + image_id + "'");
  }
  if (it->second == GateVerdict::Healthy) {
    return {image_id, catalog.healthy(), std::nullopt, RuleKind::TwoStage};
  }
  Prediction prediction = classify_by_detection(image_id, detections, catalog);
  prediction.rule = RuleKind::TwoStage;
  return prediction;
}

std::vector<Prediction> classify_dataset_serial(const Dataset& dataset,
                                                const DetectionSet& detections, RuleKind rule,
                                                const BinaryGate* gate) {
  detections.require_covers(dataset);
  require_known_labels(detections, dataset);
  if (rule == RuleKind::TwoStage) require_gate_covers(gate, dataset);

  std::vector<Prediction> predictions(dataset.size());
  for (std::size_t i = 0; i < dataset.records.size(); ++i) {
    const ImageRecord& record = dataset.records[i];
    predictions[i] = rule == RuleKind::TwoStage
                         ? classify_two_stage(record.image_id, *gate,
                                              detections.of(record.image_id), dataset.catalog)
                         : classify_by_detection(record.image_id, detections.of(record.image_id),
                                                 dataset.catalog);
  }
  return predictions;
}

std::vector<Prediction> classify_dataset(const Dataset& dataset, const DetectionSet& detections,
                                         RuleKind rule, const BinaryGate* gate) {
  detections.require_covers(dataset);
  require_known_labels(detections, dataset);
  if (rule == RuleKind::TwoStage) require_gate_covers(gate, dataset);

  std::vector<Prediction> predictions(dataset.size());
  const std::int64_t count = static_cast<std::int64_t>(dataset.records.size());
#ifdef _OPENMP
#pragma omp parallel for num_threads(worker_threads()) schedule(static)
#endif
  for (std::int64_t i = 0; i < count; ++i) {
    const ImageRecord& record = dataset.records[static_cast<std::size_t>(i)];
    predictions[static_cast<std::size_t>(i)] =
        rule == RuleKind::TwoStage
            ? classify_two_stage(record.image_id, *gate, detections.of(record.image_id),
                                 dataset.catalog)
            : classify_by_detection(record.image_id, detections.of(record.image_id),
                                    dataset.catalog);
  }
  return predictions;
}

}  // namespace remine::rules
