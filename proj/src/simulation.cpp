// Copyright (c) 2026 remine contributors
//
// SPDX-License-Identifier: Apache-2.0
//

#include "remine/simulation.hpp"

#include <cmath>
#include <fstream>
#include <unordered_set>

#include "json.hpp"
#include "remine/parallel.hpp"
#include "remine/rng.hpp"

namespace remine::simulation {

namespace {

using nlohmann::json;

constexpr double kRowSumSlack = 1e-9;

// Fixed draw order: class pick, then per box (confidence, w, h, x, y). The
// order is part of the reproducibility contract; changing it changes dumps.
std::vector<Detection> sample_image(const ImageRecord& record, const DetectorProfile& profile,
                                    std::size_t true_index) {
  Rng rng(substream_seed(profile.seed, record.image_id));

  const std::size_t classes = profile.classes();
  const double pick = rng.next_double();
  double cumulative = 0.0;
  std::size_t emitted = classes;  // sentinel: emit nothing
  for (std::size_t j = 0; j < classes; ++j) {
    cumulative += profile.kernel_at(true_index, j);
    if (pick < cumulative) {
      emitted = j;
      break;
    }
  }
  if (emitted == classes) return {};

  const auto [conf_lo, conf_hi] = profile.confidence[true_index * classes + emitted];
  const auto [frac_lo, frac_hi] = profile.box_fraction;
  const int box_count = rng.uniform_int(profile.boxes_per_hit.first, profile.boxes_per_hit.second);

  std::vector<Detection> detections;
  detections.reserve(static_cast<std::size_t>(box_count));
  for (int b = 0; b < box_count; ++b) {
    Detection detection;
    detection.label = profile.catalog.label_at(emitted);
    detection.confidence = rng.uniform(conf_lo, conf_hi);
    BoundingBox& box = detection.box;
    box.image_w = record.image_w;
    box.image_h = record.image_h;
    box.w = rng.uniform(frac_lo, frac_hi) * static_cast<double>(record.image_w);
    box.h = rng.uniform(frac_lo, frac_hi) * static_cast<double>(record.image_h);
    box.x = rng.uniform(0.0, static_cast<double>(record.image_w) - box.w);
    box.y = rng.uniform(0.0, static_cast<double>(record.image_h) - box.h);
    detections.push_back(std::move(detection));
  }
  return detections;
}

std::vector<std::size_t> true_indices(const Dataset& dataset, const DetectorProfile& profile) {
  if (!(dataset.catalog == profile.catalog)) {
    throw Error(Errc::InvalidProfile, "profile catalog disagrees with the dataset catalog");
  }
  std::vector<std::size_t> indices(dataset.records.size());
  for (std::size_t i = 0; i < dataset.records.size(); ++i) {
    indices[i] = dataset.catalog.require_index(dataset.records[i].true_label);
  }
  return indices;
}

DetectionSet collect(const Dataset& dataset, std::vector<std::vector<Detection>>& per_image) {
  DetectionSet set;
  set.by_image.reserve(dataset.records.size());
  for (std::size_t i = 0; i < dataset.records.size(); ++i) {
    set.by_image.emplace(dataset.records[i].image_id, std::move(per_image[i]));
  }
  return set;
}

double checked_delta_fraction(double delta_pp) {
  if (!std::isfinite(delta_pp) || delta_pp < -100.0 || delta_pp > 100.0) {
    throw Error(Errc::InvalidDegradation,
                "recall delta " + std::to_string(delta_pp) + " outside [-100, 100]");
  }
  return delta_pp / 100.0;
}

}  // namespace

double DetectorProfile::row_residual(std::size_t truth) const {
  double sum = 0.0;
  for (std::size_t j = 0; j < classes(); ++j) sum += kernel_at(truth, j);
  return 1.0 - sum;
}

DetectorProfile make_profile(const ClassCatalog& catalog, std::uint64_t seed,
                             std::pair<double, double> confidence_range) {
  DetectorProfile profile;
  profile.catalog = catalog;
  profile.seed = seed;
  const std::size_t classes = catalog.num_classes();
  profile.kernel.assign(classes * classes, 0.0);
  profile.confidence.assign(classes * classes, confidence_range);
  return profile;
}

void validate_profile(const DetectorProfile& profile) {
  const std::size_t classes = profile.classes();
  if (classes < 2 || profile.kernel.size() != classes * classes ||
      profile.confidence.size() != classes * classes) {
    throw Error(Errc::InvalidProfile, "profile shape disagrees with its catalog");
  }
  for (std::size_t i = 0; i < classes; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < classes; ++j) {
      const double mass = profile.kernel_at(i, j);
      if (!std::isfinite(mass) || mass < 0.0 || mass > 1.0) {
        throw Error(Errc::InvalidProfile, "kernel entry (" + profile.catalog.label_at(i) + " -> " +
                                              profile.catalog.label_at(j) + ") outside [0, 1]");
      }
      sum += mass;
    }
    if (sum > 1.0 + kRowSumSlack) {
      throw Error(Errc::InvalidProfile,
                  "kernel row '" + profile.catalog.label_at(i) + "' sums to " +
                      std::to_string(sum) + " > 1");
    }
  }
  for (const auto& [lo, hi] : profile.confidence) {
    if (!(std::isfinite(lo) && std::isfinite(hi)) || lo < 0.0 || hi > 1.0 || lo > hi) {
      throw Error(Errc::InvalidProfile, "confidence interval outside [0, 1]");
    }
  }
  if (profile.boxes_per_hit.first < 1 || profile.boxes_per_hit.second < profile.boxes_per_hit.first) {
    throw Error(Errc::InvalidProfile, "boxes_per_hit must satisfy 1 <= min <= max");
  }
  const auto [frac_lo, frac_hi] = profile.box_fraction;
  if (!(frac_lo > 0.0 && frac_hi <= 1.0 && frac_lo <= frac_hi)) {
    throw Error(Errc::InvalidProfile, "box_fraction must lie in (0, 1] with lo <= hi");
  }
}

DetectionSet simulate_detections_serial(const Dataset& dataset, const DetectorProfile& profile) {
  validate_profile(profile);
  const auto indices = true_indices(dataset, profile);

  std::vector<std::vector<Detection>> per_image(dataset.records.size());
  for (std::size_t i = 0; i < dataset.records.size(); ++i) {
    per_image[i] = sample_image(dataset.records[i], profile, indices[i]);
  }
  return collect(dataset, per_image);
}

DetectionSet simulate_detections(const Dataset& dataset, const DetectorProfile& profile) {
  validate_profile(profile);
  const auto indices = true_indices(dataset, profile);

  std::vector<std::vector<Detection>> per_image(dataset.records.size());
  const std::int64_t count = static_cast<std::int64_t>(dataset.records.size());
#ifdef _OPENMP
#pragma omp parallel for num_threads(worker_threads()) schedule(static)
#endif
  for (std::int64_t i = 0; i < count; ++i) {
    per_image[static_cast<std::size_t>(i)] = sample_image(
        dataset.records[static_cast<std::size_t>(i)], profile, indices[static_cast<std::size_t>(i)]);
  }
  return collect(dataset, per_image);
}

DetectorProfile apply_degradation(const DetectorProfile& profile, const DegradationModel& model) {
  validate_profile(profile);
  DetectorProfile degraded = profile;
  const std::size_t classes = profile.classes();
  const std::size_t healthy = profile.catalog.healthy_index();

  for (const auto& [label, delta_pp] : model.recall_deltas) {
    const auto index = profile.catalog.index_of(label);
    if (!index) {
      throw Error(Errc::InvalidDegradation, "recall delta for unknown class '" + label + "'");
    }
    const double shift = checked_delta_fraction(delta_pp);
    const std::size_t row = *index;

    if (row != healthy) {
      // Disease recall lives on the diagonal. Losses drain to the no-emission
      // residual; gains are funded by the residual.
      const double diagonal = degraded.kernel_at(row, row) + shift;
      if (diagonal < 0.0 || diagonal > 1.0) {
        throw Error(Errc::InvalidDegradation,
                    "delta " + std::to_string(delta_pp) + "pp drives class '" + label +
                        "' diagonal outside [0, 1]");
      }
      if (shift > degraded.row_residual(row) + kRowSumSlack) {
        throw Error(Errc::InvalidDegradation,
                    "class '" + label + "' has insufficient residual mass for +" +
                        std::to_string(delta_pp) + "pp");
      }
      degraded.kernel_at(row, row) = diagonal;
    } else {
      // Healthy recall is the predicted-healthy mass: residual plus the
      // healthy-emitting diagonal. Gains shrink the false-positive entries
      // proportionally; losses grow them proportionally.
      double fp_mass = 0.0;
      for (std::size_t j = 0; j < classes; ++j) {
        if (j != healthy) fp_mass += degraded.kernel_at(row, j);
      }
      if (shift > 0.0) {
        if (shift > fp_mass + kRowSumSlack) {
          throw Error(Errc::InvalidDegradation,
                      "healthy row has only " + std::to_string(100.0 * fp_mass) +
                          "pp of false-positive mass to remove");
        }
        const double scale = fp_mass <= 0.0 ? 0.0 : (fp_mass - shift) / fp_mass;
        for (std::size_t j = 0; j < classes; ++j) {
          if (j != healthy) degraded.kernel_at(row, j) *= scale;
        }
      } else if (shift < 0.0) {
        if (fp_mass <= 0.0) {
          throw Error(Errc::InvalidDegradation,
                      "healthy row has no false-positive mass to grow");
        }
        const double grown = fp_mass - shift;  // shift is negative
        if (grown > fp_mass + degraded.row_residual(row) + degraded.kernel_at(row, healthy) +
                        kRowSumSlack) {
          throw Error(Errc::InvalidDegradation, "healthy-row delta exceeds available mass");
        }
        const double scale = grown / fp_mass;
        for (std::size_t j = 0; j < classes; ++j) {
          if (j != healthy) degraded.kernel_at(row, j) *= scale;
        }
        // Fund the growth from the healthy-emitting diagonal once the
        // residual is exhausted.
        const double over = -degraded.row_residual(row);
        if (over > 0.0) degraded.kernel_at(row, healthy) -= over;
      }
    }
  }

  validate_profile(degraded);
  return degraded;
}

DetectorProfile blend_retained(const DetectorProfile& base, const DetectorProfile& degraded,
                               const std::vector<std::string>& retained_classes,
                               double retained_fraction, double saturation) {
  validate_profile(base);
  validate_profile(degraded);
  if (!(base.catalog == degraded.catalog)) {
    throw Error(Errc::InvalidProfile, "cannot blend profiles over different catalogs");
  }
  if (!std::isfinite(retained_fraction) || retained_fraction < 0.0 || retained_fraction > 1.0) {
    throw Error(Errc::InvalidProfile, "retained fraction must lie in [0, 1]");
  }
  if (!std::isfinite(saturation) || saturation < 0.0) {
    throw Error(Errc::InvalidProfile, "saturation must be non-negative");
  }

  std::unordered_set<std::size_t> retained;
  for (const std::string& label : retained_classes) {
    const auto index = base.catalog.index_of(label);
    if (!index || base.catalog.is_healthy(label)) {
      throw Error(Errc::InvalidProfile, "retained class '" + label + "' is not a disease class");
    }
    retained.insert(*index);
  }

  DetectorProfile blended = base;
  blended.seed = degraded.seed;
  const std::size_t classes = base.classes();
  const std::size_t healthy = base.catalog.healthy_index();

  // Only classes whose hard-samples stay in training inherit the degraded
  // detector behavior for their own row.
  for (std::size_t row : retained) {
    for (std::size_t j = 0; j < classes; ++j) {
      blended.kernel_at(row, j) = degraded.kernel_at(row, j);
      blended.confidence[row * classes + j] = degraded.confidence[row * classes + j];
    }
  }

  // The healthy row saturates quickly in the retained fraction: a modest set
  // of healthy hard-samples already teaches healthy appearance.
  const double response =
      retained_fraction <= 0.0 ? 0.0 : 1.0 - std::pow(1.0 - retained_fraction, saturation);
  for (std::size_t j = 0; j < classes; ++j) {
    const double from = base.kernel_at(healthy, j);
    const double to = degraded.kernel_at(healthy, j);
    blended.kernel_at(healthy, j) = from + response * (to - from);
  }

  validate_profile(blended);
  return blended;
}

DegradationModel load_degradation(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(Errc::IoError, "cannot open '" + file.string() + "' for reading");
  const json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw Error(Errc::SyntaxError, "degradation model: malformed JSON");
  }
  DegradationModel model;
  const auto deltas = doc.find("recall_deltas");
  if (deltas == doc.end() || !deltas->is_object()) {
    throw Error(Errc::SchemaError, "degradation model needs a 'recall_deltas' object");
  }
  for (const auto& [label, delta] : deltas->items()) {
    if (!delta.is_number()) {
      throw Error(Errc::SchemaError, "recall delta for '" + label + "' must be a number");
    }
    model.recall_deltas.emplace(label, delta.get<double>());
  }
  if (const auto it = doc.find("healthy_saturation"); it != doc.end()) {
    if (!it->is_number()) throw Error(Errc::SchemaError, "'healthy_saturation' must be a number");
    model.healthy_saturation = it->get<double>();
  }
  return model;
}

DetectorProfile load_profile(const std::filesystem::path& file, const ClassCatalog& catalog) {
  std::ifstream in(file);
  if (!in) throw Error(Errc::IoError, "cannot open '" + file.string() + "' for reading");
  const json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw Error(Errc::SyntaxError, "detector profile: malformed JSON");
  }

  auto number = [&](const char* key, double fallback) -> double {
    const auto it = doc.find(key);
    if (it == doc.end()) return fallback;
    if (!it->is_number()) throw Error(Errc::SchemaError, std::string("'") + key + "' must be a number");
    return it->get<double>();
  };
  auto pair_of = [&](const char* key, std::pair<double, double> fallback) {
    const auto it = doc.find(key);
    if (it == doc.end()) return fallback;
    if (!it->is_array() || it->size() != 2 || !(*it)[0].is_number() || !(*it)[1].is_number()) {
      throw Error(Errc::SchemaError, std::string("'") + key + "' must be a [lo, hi] pair");
    }
    return std::pair<double, double>{(*it)[0].get<double>(), (*it)[1].get<double>()};
  };

  const auto confidence_range = pair_of("confidence_range", {0.3, 0.95});
  DetectorProfile profile = make_profile(catalog, 0, confidence_range);
  profile.seed = static_cast<std::uint64_t>(number("seed", 0.0));
  profile.box_fraction = pair_of("box_fraction", profile.box_fraction);
  const auto boxes = pair_of("boxes_per_hit", {1.0, 3.0});
  profile.boxes_per_hit = {static_cast<int>(boxes.first), static_cast<int>(boxes.second)};

  const auto kernel = doc.find("kernel");
  if (kernel == doc.end() || !kernel->is_object()) {
    throw Error(Errc::SchemaError, "detector profile needs a 'kernel' object");
  }
  const std::size_t classes = catalog.num_classes();
  for (const auto& [row_label, row] : kernel->items()) {
    const auto row_index = catalog.index_of(row_label);
    if (!row_index) throw Error(Errc::SchemaError, "kernel row for unknown class '" + row_label + "'");
    if (!row.is_object()) {
      throw Error(Errc::SchemaError, "kernel row '" + row_label + "' must be an object");
    }
    for (const auto& [col_label, mass] : row.items()) {
      const auto col_index = catalog.index_of(col_label);
      if (!col_index) {
        throw Error(Errc::SchemaError, "kernel entry for unknown class '" + col_label + "'");
      }
      if (!mass.is_number()) {
        throw Error(Errc::SchemaError,
                    "kernel entry " + row_label + " -> " + col_label + " must be a number");
      }
      profile.kernel[*row_index * classes + *col_index] = mass.get<double>();
    }
  }

  if (const auto overrides = doc.find("confidence_overrides"); overrides != doc.end()) {
    if (!overrides->is_array()) {
      throw Error(Errc::SchemaError, "'confidence_overrides' must be an array");
    }
    for (const json& entry : *overrides) {
      if (!entry.is_object() || !entry.contains("true_label") || !entry.contains("emit") ||
          !entry.contains("range")) {
        throw Error(Errc::SchemaError,
                    "confidence overrides need 'true_label', 'emit' and 'range'");
      }
      const auto row_index = catalog.index_of(entry["true_label"].get<std::string>());
      const auto col_index = catalog.index_of(entry["emit"].get<std::string>());
      if (!row_index || !col_index) {
        throw Error(Errc::SchemaError, "confidence override names an unknown class");
      }
      const json& range = entry["range"];
      if (!range.is_array() || range.size() != 2) {
        throw Error(Errc::SchemaError, "confidence override range must be a [lo, hi] pair");
      }
      profile.confidence[*row_index * classes + *col_index] = {range[0].get<double>(),
                                                               range[1].get<double>()};
    }
  }

  validate_profile(profile);
  return profile;
}

void save_profile(const DetectorProfile& profile, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw Error(Errc::IoError, "cannot open '" + file.string() + "' for writing");

  json doc;
  doc["seed"] = profile.seed;
  doc["boxes_per_hit"] = {profile.boxes_per_hit.first, profile.boxes_per_hit.second};
  doc["box_fraction"] = {profile.box_fraction.first, profile.box_fraction.second};

  const std::size_t classes = profile.classes();
  // The most common interval doubles as the default; the rest are overrides.
  std::pair<double, double> default_range = profile.confidence.front();
  doc["confidence_range"] = {default_range.first, default_range.second};
  json overrides = json::array();
  json kernel = json::object();
  for (std::size_t i = 0; i < classes; ++i) {
    json row = json::object();
    for (std::size_t j = 0; j < classes; ++j) {
      if (profile.kernel_at(i, j) != 0.0) {
        row[profile.catalog.label_at(j)] = profile.kernel_at(i, j);
      }
      const auto& range = profile.confidence[i * classes + j];
      if (range != default_range) {
        overrides.push_back({{"true_label", profile.catalog.label_at(i)},
                             {"emit", profile.catalog.label_at(j)},
                             {"range", {range.first, range.second}}});
      }
    }
    if (!row.empty()) kernel[profile.catalog.label_at(i)] = std::move(row);
  }
  doc["kernel"] = std::move(kernel);
  if (!overrides.empty()) doc["confidence_overrides"] = std::move(overrides);
  out << doc.dump(2) << "\n";
}

}  // namespace remine::simulation
