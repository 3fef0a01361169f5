// Copyright (c) 2026 remine contributors
//
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "remine/core.hpp"
#include "remine/mining.hpp"

namespace remine::manifest {

enum class Generation { Org, Hsm, Hsrem };

const char* tag_name(Generation tag);
std::optional<Generation> parse_tag(std::string_view name);

/// Retraining dataset description: original disease images plus the retained
/// healthy hard-samples, with verifiable counts. Append-only; a new
/// generation gets a new manifest, never an in-place edit.
struct TrainingManifest {
  ClassCatalog catalog;
  Generation tag = Generation::Org;
  std::vector<ImageRecord> disease_records;
  std::vector<ImageRecord> hard_sample_records;

  std::size_t total_images() const {
    return disease_records.size() + hard_sample_records.size();
  }
};

/// Combines a disease dataset with the (selected) hard-sample index. Rejects
/// image-id overlap between the two sides, hard samples on an org manifest,
/// and healthy records inside the disease dataset.
TrainingManifest build_manifest(const Dataset& disease_dataset,
                                const mining::HardSampleIndex* selected,
                                const ClassCatalog& catalog, Generation tag);

struct ClassRow {
  std::string label;
  std::size_t images = 0;
  std::size_t boxes = 0;
};

struct ManifestSummary {
  std::string tag;
  std::vector<ClassRow> per_class;  // catalog order; hard samples land on the healthy row
  std::size_t total_images = 0;
  std::size_t total_boxes = 0;
  std::size_t disease_images = 0;
  std::size_t hard_sample_images = 0;
};

ManifestSummary manifest_summary(const TrainingManifest& manifest);

/// Writes `train.<tag>.manifest.jsonl` and `summary.<tag>.json` under
/// `out_dir` and returns the manifest path.
std::filesystem::path save(const TrainingManifest& manifest,
                           const std::filesystem::path& out_dir);

void write_summary_json(const ManifestSummary& summary, std::ostream& out);

/// Per-image detector label files for the external trainer; hard-sample boxes
/// come out with the healthy class index.
void export_labels(const TrainingManifest& manifest, const std::filesystem::path& out_dir);

}  // namespace remine::manifest
