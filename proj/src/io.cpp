// Copyright (c) 2026 remine contributors
//
// SPDX-License-Identifier: Apache-2.0
//

#include "remine/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "json.hpp"

namespace remine::io {

namespace {

using nlohmann::json;

std::ifstream open_input(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(Errc::IoError, "cannot open '" + file.string() + "' for reading");
  return in;
}

std::ofstream open_output(const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw Error(Errc::IoError, "cannot open '" + file.string() + "' for writing");
  return out;
}

json parse_line_object(const std::string& text, std::size_t line) {
  json value = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (value.is_discarded()) throw Error(Errc::SyntaxError, "malformed JSON", line);
  if (!value.is_object()) throw Error(Errc::SyntaxError, "expected a JSON object", line);
  return value;
}

json parse_document(std::istream& in, const char* what) {
  json value = json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (value.is_discarded()) throw Error(Errc::SyntaxError, std::string(what) + ": malformed JSON");
  return value;
}

using LineNo = std::optional<std::size_t>;

const json& require_field(const json& object, const char* key, LineNo line) {
  auto it = object.find(key);
  if (it == object.end()) {
    throw Error(Errc::SchemaError, std::string("missing field '") + key + "'", line);
  }
  return *it;
}

std::string require_string(const json& object, const char* key, LineNo line) {
  const json& value = require_field(object, key, line);
  if (!value.is_string() || value.get<std::string>().empty()) {
    throw Error(Errc::SchemaError, std::string("field '") + key + "' must be a non-empty string",
                line);
  }
  return value.get<std::string>();
}

std::uint32_t require_dimension(const json& object, const char* key, LineNo line) {
  const json& value = require_field(object, key, line);
  if (!value.is_number_integer() && !value.is_number_unsigned()) {
    throw Error(Errc::SchemaError, std::string("field '") + key + "' must be a positive integer",
                line);
  }
  const std::int64_t raw = value.get<std::int64_t>();
  if (raw <= 0 || raw > 0xffffffffll) {
    throw Error(Errc::SchemaError,
                std::string("field '") + key + "' out of range: " + std::to_string(raw), line);
  }
  return static_cast<std::uint32_t>(raw);
}

double require_finite(const json& object, const char* key, LineNo line) {
  const json& value = require_field(object, key, line);
  if (!value.is_number()) {
    throw Error(Errc::SchemaError, std::string("field '") + key + "' must be a number", line);
  }
  const double parsed = value.get<double>();
  if (!std::isfinite(parsed)) {
    throw Error(Errc::SchemaError, std::string("field '") + key + "' is not finite", line);
  }
  return parsed;
}

// Intrinsic field validity only; relational geometry (x+w vs image width) is
// checked wherever image dimensions are known.
BoundingBox parse_box_fields(const json& object, std::uint32_t image_w, std::uint32_t image_h,
                             LineNo line) {
  BoundingBox box;
  box.x = require_finite(object, "x", line);
  box.y = require_finite(object, "y", line);
  box.w = require_finite(object, "w", line);
  box.h = require_finite(object, "h", line);
  box.image_w = image_w;
  box.image_h = image_h;
  if (box.x < 0.0 || box.y < 0.0) {
    throw Error(Errc::SchemaError, "box origin must be non-negative", line);
  }
  if (box.w <= 0.0 || box.h <= 0.0) {
    throw Error(Errc::SchemaError, "box extent must be positive", line);
  }
  return box;
}

std::string resolve_label(const json& object, const char* key, const ClassCatalog& catalog,
                          LineNo line, Errc code) {
  std::string label = require_string(object, key, line);
  if (!catalog.contains(label)) {
    throw Error(code, "unknown class label '" + label + "'", line);
  }
  return label;
}

json box_to_json(const BoundingBox& box) {
  return json{{"x", box.x}, {"y", box.y}, {"w", box.w}, {"h", box.h}};
}

template <typename PerLine>
void for_each_line(std::istream& in, PerLine&& per_line) {
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.empty()) continue;
    per_line(text, line);
  }
}

}  // namespace

std::vector<ImageRecord> parse_manifest(std::istream& in, const ClassCatalog& catalog) {
  std::vector<ImageRecord> records;
  for_each_line(in, [&](const std::string& text, std::size_t line) {
    const json object = parse_line_object(text, line);

    ImageRecord record;
    record.image_id = require_string(object, "image_id", line);
    record.true_label = resolve_label(object, "true_label", catalog, line, Errc::UnknownLabel);
    record.image_w = require_dimension(object, "image_w", line);
    record.image_h = require_dimension(object, "image_h", line);

    const json& annotations = require_field(object, "annotations", line);
    if (!annotations.is_array()) {
      throw Error(Errc::SchemaError, "field 'annotations' must be an array", line);
    }
    for (const json& entry : annotations) {
      if (!entry.is_object()) {
        throw Error(Errc::SchemaError, "annotation entries must be objects", line);
      }
      Annotation annotation;
      annotation.label = resolve_label(entry, "label", catalog, line, Errc::UnknownLabel);
      annotation.box = parse_box_fields(entry, record.image_w, record.image_h, line);
      record.annotations.push_back(std::move(annotation));
    }

    if (auto it = object.find("mined_class"); it != object.end() && !it->is_null()) {
      record.mined_class = resolve_label(object, "mined_class", catalog, line, Errc::UnknownLabel);
    }
    if (auto it = object.find("key_confidence"); it != object.end() && !it->is_null()) {
      const double confidence = require_finite(object, "key_confidence", line);
      if (confidence < 0.0 || confidence > 1.0) {
        throw Error(Errc::SchemaError, "field 'key_confidence' must lie in [0, 1]", line);
      }
      record.key_confidence = confidence;
    }
    records.push_back(std::move(record));
  });
  return records;
}

std::vector<ImageRecord> load_manifest(const std::filesystem::path& file,
                                       const ClassCatalog& catalog) {
  std::ifstream in = open_input(file);
  return parse_manifest(in, catalog);
}

void serialize_manifest(const std::vector<ImageRecord>& records, std::ostream& out) {
  for (const ImageRecord& record : records) {
    json object;
    object["image_id"] = record.image_id;
    object["true_label"] = record.true_label;
    object["image_w"] = record.image_w;
    object["image_h"] = record.image_h;
    json annotations = json::array();
    for (const Annotation& annotation : record.annotations) {
      json entry = box_to_json(annotation.box);
      entry["label"] = annotation.label;
      annotations.push_back(std::move(entry));
    }
    object["annotations"] = std::move(annotations);
    if (record.mined_class) object["mined_class"] = *record.mined_class;
    if (record.key_confidence) object["key_confidence"] = *record.key_confidence;
    out << object.dump() << "\n";
  }
}

void save_manifest(const std::vector<ImageRecord>& records, const std::filesystem::path& file) {
  std::ofstream out = open_output(file);
  serialize_manifest(records, out);
}

DetectionSet parse_detections(std::istream& in, const ClassCatalog& catalog,
                              const Dataset& dataset, std::vector<Issue>* warnings) {
  DetectionSet set;
  for_each_line(in, [&](const std::string& text, std::size_t line) {
    const json object = parse_line_object(text, line);

    const std::string image_id = require_string(object, "image_id", line);
    const ImageRecord* record = dataset.find(image_id);
    if (record == nullptr) {
      throw Error(Errc::UnknownImageId, "image '" + image_id + "' is not in the dataset", line);
    }
    if (set.by_image.find(image_id) != set.by_image.end()) {
      throw Error(Errc::DuplicateImageLine, "image '" + image_id + "' already has a dump line",
                  line);
    }

    const json& entries = require_field(object, "detections", line);
    if (!entries.is_array()) {
      throw Error(Errc::SchemaError, "field 'detections' must be an array", line);
    }
    std::vector<Detection> detections;
    for (const json& entry : entries) {
      if (!entry.is_object()) {
        throw Error(Errc::SchemaError, "detection entries must be objects", line);
      }
      Detection detection;
      detection.label = resolve_label(entry, "label", catalog, line, Errc::SchemaError);
      detection.confidence = require_finite(entry, "confidence", line);
      if (detection.confidence < 0.0 || detection.confidence > 1.0) {
        throw Error(Errc::SchemaError,
                    "confidence " + std::to_string(detection.confidence) + " outside [0, 1]",
                    line);
      }
      if (detection.confidence == 0.0 && warnings != nullptr) {
        warnings->push_back(
            {Errc::SchemaError, "zero-confidence detection on image '" + image_id + "'", line});
      }
      detection.box = parse_box_fields(entry, record->image_w, record->image_h, line);
      if (std::string violation = box_violation(detection.box); !violation.empty()) {
        throw Error(Errc::SchemaError, violation, line);
      }
      detections.push_back(std::move(detection));
    }
    set.by_image.emplace(image_id, std::move(detections));
  });

  // Images absent from the dump carry the empty list, never absence.
  for (const ImageRecord& record : dataset.records) {
    set.by_image.try_emplace(record.image_id);
  }
  return set;
}

DetectionSet load_detections(const std::filesystem::path& file, const ClassCatalog& catalog,
                             const Dataset& dataset, std::vector<Issue>* warnings) {
  std::ifstream in = open_input(file);
  return parse_detections(in, catalog, dataset, warnings);
}

void serialize_detections(const DetectionSet& detections, const Dataset& dataset,
                          std::ostream& out) {
  for (const ImageRecord& record : dataset.records) {
    json object;
    object["image_id"] = record.image_id;
    json entries = json::array();
    for (const Detection& detection : detections.of(record.image_id)) {
      json entry = box_to_json(detection.box);
      entry["label"] = detection.label;
      entry["confidence"] = detection.confidence;
      entries.push_back(std::move(entry));
    }
    object["detections"] = std::move(entries);
    out << object.dump() << "\n";
  }
}

void save_detections(const DetectionSet& detections, const Dataset& dataset,
                     const std::filesystem::path& file) {
  std::ofstream out = open_output(file);
  serialize_detections(detections, dataset, out);
}

void serialize_hard_samples(const mining::HardSampleIndex& index, std::ostream& out) {
  json doc = json::object();
  for (std::size_t c = 0; c < index.per_class.size(); ++c) {
    if (index.per_class[c].empty()) continue;
    json images = json::array();
    for (const mining::HardSampleImage& sample : index.per_class[c]) {
      json entry;
      entry["image_id"] = sample.image_id;
      entry["image_w"] = sample.boxes.front().image_w;
      entry["image_h"] = sample.boxes.front().image_h;
      entry["key_confidence"] = sample.key_confidence;
      json boxes = json::array();
      for (const BoundingBox& box : sample.boxes) boxes.push_back(box_to_json(box));
      entry["boxes"] = std::move(boxes);
      images.push_back(std::move(entry));
    }
    doc[index.catalog.diseases()[c]] = std::move(images);
  }
  out << doc.dump(2) << "\n";
}

void save_hard_samples(const mining::HardSampleIndex& index, const std::filesystem::path& file) {
  std::ofstream out = open_output(file);
  serialize_hard_samples(index, out);
}

mining::HardSampleIndex parse_hard_samples(std::istream& in, const ClassCatalog& catalog) {
  const json doc = parse_document(in, "hard-sample index");
  if (!doc.is_object()) {
    throw Error(Errc::SchemaError, "hard-sample index must be a JSON object");
  }

  mining::HardSampleIndex index = mining::empty_index(catalog);
  for (const auto& [label, images] : doc.items()) {
    auto class_index = catalog.index_of(label);
    if (!class_index || catalog.is_healthy(label)) {
      throw Error(Errc::UnknownLabel, "hard-sample key '" + label + "' is not a disease class");
    }
    if (!images.is_array()) {
      throw Error(Errc::SchemaError, "hard-sample entry for '" + label + "' must be an array");
    }
    for (const json& entry : images) {
      if (!entry.is_object()) {
        throw Error(Errc::SchemaError, "hard-sample images must be objects");
      }
      mining::HardSampleImage sample;
      sample.image_id = require_string(entry, "image_id", {});
      const std::uint32_t image_w = require_dimension(entry, "image_w", {});
      const std::uint32_t image_h = require_dimension(entry, "image_h", {});
      sample.key_confidence = require_finite(entry, "key_confidence", {});
      if (sample.key_confidence < 0.0 || sample.key_confidence > 1.0) {
        throw Error(Errc::SchemaError, "key_confidence outside [0, 1] for image '" +
                                           sample.image_id + "'");
      }
      const json& boxes = require_field(entry, "boxes", {});
      if (!boxes.is_array() || boxes.empty()) {
        throw Error(Errc::SchemaError,
                    "image '" + sample.image_id + "' must carry a non-empty box list");
      }
      for (const json& box : boxes) {
        sample.boxes.push_back(parse_box_fields(box, image_w, image_h, {}));
      }
      index.per_class[*class_index].push_back(std::move(sample));
    }
  }
  mining::check_index(index);
  return index;
}

mining::HardSampleIndex load_hard_samples(const std::filesystem::path& file,
                                          const ClassCatalog& catalog) {
  std::ifstream in = open_input(file);
  return parse_hard_samples(in, catalog);
}

ClassCatalog load_catalog(const std::filesystem::path& file) {
  std::ifstream in = open_input(file);
  const json doc = parse_document(in, "catalog");
  if (!doc.is_object() || !doc.contains("diseases") || !doc.contains("healthy") ||
      !doc["diseases"].is_array() || !doc["healthy"].is_string()) {
    throw Error(Errc::SchemaError,
                "catalog must be an object with a 'diseases' array and a 'healthy' string");
  }
  std::vector<std::string> diseases;
  for (const json& label : doc["diseases"]) {
    if (!label.is_string()) {
      throw Error(Errc::SchemaError, "catalog disease labels must be strings");
    }
    diseases.push_back(label.get<std::string>());
  }
  return build_catalog(std::move(diseases), doc["healthy"].get<std::string>());
}

void save_catalog(const ClassCatalog& catalog, const std::filesystem::path& file) {
  std::ofstream out = open_output(file);
  json doc;
  doc["diseases"] = catalog.diseases();
  doc["healthy"] = catalog.healthy();
  out << doc.dump(2) << "\n";
}

rules::BinaryGate load_gate(const std::filesystem::path& file, const Dataset& dataset) {
  std::ifstream in = open_input(file);
  rules::BinaryGate gate;
  for_each_line(in, [&](const std::string& text, std::size_t line) {
    const json object = parse_line_object(text, line);
    const std::string image_id = require_string(object, "image_id", line);
    if (dataset.find(image_id) == nullptr) {
      throw Error(Errc::UnknownImageId, "image '" + image_id + "' is not in the dataset", line);
    }
    const std::string verdict = require_string(object, "verdict", line);
    if (verdict != "healthy" && verdict != "diseased") {
      throw Error(Errc::SchemaError, "verdict must be 'healthy' or 'diseased', got '" + verdict +
                                         "'", line);
    }
    const bool inserted =
        gate.by_image
            .emplace(image_id, verdict == "healthy" ? rules::GateVerdict::Healthy
                                                    : rules::GateVerdict::Diseased)
            .second;
    if (!inserted) {
      throw Error(Errc::DuplicateImageLine, "image '" + image_id + "' already has a verdict",
                  line);
    }
  });
  return gate;
}

void export_labels(const std::vector<ImageRecord>& records, const ClassCatalog& catalog,
                   const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    throw Error(Errc::IoError, "cannot create '" + out_dir.string() + "': " + ec.message());
  }

  char line[160];
  for (const ImageRecord& record : records) {
    std::ofstream out = open_output(out_dir / (record.image_id + ".txt"));
    for (const Annotation& annotation : record.annotations) {
      const BoundingBox& box = annotation.box;
      if (box.image_w == 0 || box.image_h == 0) {
        throw Error(Errc::NonNormalizableBox,
                    "image '" + record.image_id + "' has a zero image dimension");
      }
      const double width = static_cast<double>(box.image_w);
      const double height = static_cast<double>(box.image_h);
      std::snprintf(line, sizeof(line), "%zu %.6f %.6f %.6f %.6f\n",
                    catalog.require_index(annotation.label), (box.x + box.w / 2.0) / width,
                    (box.y + box.h / 2.0) / height, box.w / width, box.h / height);
      out << line;
    }
  }
}

}  // namespace remine::io
