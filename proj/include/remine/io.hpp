// Copyright (c) 2026 remine contributors
//
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "remine/core.hpp"
#include "remine/mining.hpp"
#include "remine/rules.hpp"

namespace remine::io {

/// Line-delimited JSON, one image record per line. Every parse failure is a
/// structured error carrying the 1-based line number.
std::vector<ImageRecord> parse_manifest(std::istream& in, const ClassCatalog& catalog);
std::vector<ImageRecord> load_manifest(const std::filesystem::path& file,
                                       const ClassCatalog& catalog);
void serialize_manifest(const std::vector<ImageRecord>& records, std::ostream& out);
void save_manifest(const std::vector<ImageRecord>& records, const std::filesystem::path& file);

/// Line-delimited JSON detection dump. Every referenced image must exist in
/// the companion dataset; images absent from the dump get the empty list.
/// Repeated image lines are an error. Zero-confidence detections are legal
/// but reported through `warnings` when given.
DetectionSet parse_detections(std::istream& in, const ClassCatalog& catalog,
                              const Dataset& dataset, std::vector<Issue>* warnings = nullptr);
DetectionSet load_detections(const std::filesystem::path& file, const ClassCatalog& catalog,
                             const Dataset& dataset, std::vector<Issue>* warnings = nullptr);
void serialize_detections(const DetectionSet& detections, const Dataset& dataset,
                          std::ostream& out);
void save_detections(const DetectionSet& detections, const Dataset& dataset,
                     const std::filesystem::path& file);

/// Single JSON document mapping disease class -> hard-sample images.
void serialize_hard_samples(const mining::HardSampleIndex& index, std::ostream& out);
void save_hard_samples(const mining::HardSampleIndex& index, const std::filesystem::path& file);
mining::HardSampleIndex parse_hard_samples(std::istream& in, const ClassCatalog& catalog);
mining::HardSampleIndex load_hard_samples(const std::filesystem::path& file,
                                          const ClassCatalog& catalog);

/// Catalog document: {"diseases": [...], "healthy": "..."}.
ClassCatalog load_catalog(const std::filesystem::path& file);
void save_catalog(const ClassCatalog& catalog, const std::filesystem::path& file);

/// First-stage gate verdicts, one {"image_id","verdict"} JSON object per line
/// with verdict "healthy" or "diseased".
rules::BinaryGate load_gate(const std::filesystem::path& file, const Dataset& dataset);

/// One `<image_id>.txt` per record. Each line is
/// `<class_index> <cx> <cy> <w> <h>`: the annotation's canonical class index
/// followed by center coordinates and sizes normalized to [0,1] by the image
/// dimensions, 6 decimal places, space-separated, newline-terminated.
void export_labels(const std::vector<ImageRecord>& records, const ClassCatalog& catalog,
                   const std::filesystem::path& out_dir);

}  // namespace remine::io
