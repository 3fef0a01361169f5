// Copyright (c) 2026 remine contributors
//
// SPDX-License-Identifier: Apache-2.0
//

#include "remine/manifest.hpp"

#include <fstream>
#include <unordered_set>

#include "json.hpp"
#include "remine/io.hpp"

namespace remine::manifest {

namespace {
using nlohmann::json;
}

const char* tag_name(Generation tag) {
  switch (tag) {
    case Generation::Org: return "org";
    case Generation::Hsm: return "hsm";
    case Generation::Hsrem: return "hsrem";
  }
  return "org";
}

std::optional<Generation> parse_tag(std::string_view name) {
  if (name == "org") return Generation::Org;
  if (name == "hsm") return Generation::Hsm;
  if (name == "hsrem") return Generation::Hsrem;
  return std::nullopt;
}

TrainingManifest build_manifest(const Dataset& disease_dataset,
                                const mining::HardSampleIndex* selected,
                                const ClassCatalog& catalog, Generation tag) {
  if (tag == Generation::Org && selected != nullptr && selected->total_images() > 0) {
    throw Error(Errc::TagMismatch, "an org manifest cannot carry hard-sample records");
  }

  TrainingManifest manifest;
  manifest.catalog = catalog;
  manifest.tag = tag;
  manifest.disease_records = disease_dataset.records;

  std::unordered_set<std::string> ids;
  ids.reserve(disease_dataset.records.size());
  for (const ImageRecord& record : manifest.disease_records) {
    if (catalog.is_healthy(record.true_label)) {
      throw Error(Errc::LabelMismatch,
                  "disease dataset contains healthy-labeled record '" + record.image_id + "'");
    }
    ids.insert(record.image_id);
  }

  if (selected != nullptr) {
    manifest.hard_sample_records = mining::as_annotations(*selected, catalog);
    for (const ImageRecord& record : manifest.hard_sample_records) {
      if (!ids.insert(record.image_id).second) {
        throw Error(Errc::IdCollision,
                    "hard-sample image '" + record.image_id + "' collides with a disease image");
      }
    }
  }
  return manifest;
}

ManifestSummary manifest_summary(const TrainingManifest& manifest) {
  ManifestSummary summary;
  summary.tag = tag_name(manifest.tag);

  const auto labels = manifest.catalog.all_labels();
  std::vector<std::size_t> images(labels.size(), 0);
  std::vector<std::size_t> boxes(labels.size(), 0);

  auto tally = [&](const std::vector<ImageRecord>& records) {
    for (const ImageRecord& record : records) {
      const std::size_t index = manifest.catalog.require_index(record.true_label);
      ++images[index];
      boxes[index] += record.annotations.size();
    }
  };
  tally(manifest.disease_records);
  tally(manifest.hard_sample_records);

  for (std::size_t c = 0; c < labels.size(); ++c) {
    summary.per_class.push_back({labels[c], images[c], boxes[c]});
    summary.total_images += images[c];
    summary.total_boxes += boxes[c];
  }
  summary.disease_images = manifest.disease_records.size();
  summary.hard_sample_images = manifest.hard_sample_records.size();
  return summary;
}

std::filesystem::path save(const TrainingManifest& manifest,
                           const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    throw Error(Errc::IoError, "cannot create '" + out_dir.string() + "': " + ec.message());
  }

  const std::string tag = tag_name(manifest.tag);
  const std::filesystem::path manifest_path = out_dir / ("train." + tag + ".manifest.jsonl");
  {
    std::ofstream out(manifest_path);
    if (!out) throw Error(Errc::IoError, "cannot open '" + manifest_path.string() + "'");
    io::serialize_manifest(manifest.disease_records, out);
    io::serialize_manifest(manifest.hard_sample_records, out);
  }
  {
    const std::filesystem::path summary_path = out_dir / ("summary." + tag + ".json");
    std::ofstream out(summary_path);
    if (!out) throw Error(Errc::IoError, "cannot open '" + summary_path.string() + "'");
    write_summary_json(manifest_summary(manifest), out);
  }
  return manifest_path;
}

void write_summary_json(const ManifestSummary& summary, std::ostream& out) {
  json doc;
  doc["tag"] = summary.tag;
  json per_class = json::array();
  for (const ClassRow& row : summary.per_class) {
    per_class.push_back({{"label", row.label}, {"images", row.images}, {"boxes", row.boxes}});
  }
  doc["per_class"] = std::move(per_class);
  doc["total_images"] = summary.total_images;
  doc["total_boxes"] = summary.total_boxes;
  doc["disease_images"] = summary.disease_images;
  doc["hard_sample_images"] = summary.hard_sample_images;
  out << doc.dump(2) << "\n";
}

void export_labels(const TrainingManifest& manifest, const std::filesystem::path& out_dir) {
  io::export_labels(manifest.disease_records, manifest.catalog, out_dir);
  io::export_labels(manifest.hard_sample_records, manifest.catalog, out_dir);
}

}  // namespace remine::manifest
