// Copyright (c) 2026 remine contributors
//
// SPDX-License-Identifier: Apache-2.0
//

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <unordered_set>

#include "remine/mining.hpp"
#include "remine/rules.hpp"
#include "support.hpp"

using namespace remine;
using namespace remine::mining;
using namespace remine::test;

namespace {

Dataset healthy_pool(const ClassCatalog& catalog, std::size_t count) {
  std::vector<ImageRecord> records;
  for (std::size_t i = 0; i < count; ++i) {
    records.push_back(make_record("he_" + std::to_string(i), catalog.healthy()));
  }
  return validate_dataset(std::move(records), catalog);
}

DetectionSet empty_cover(const Dataset& dataset) {
  DetectionSet set;
  for (const auto& record : dataset.records) set.by_image[record.image_id] = {};
  return set;
}

// Healthy pool + dump sized so the per-class mined counts land exactly on
// `counts`: one image per count, one above-floor box each.
std::pair<Dataset, DetectionSet> pool_with_counts(
    const ClassCatalog& catalog, const std::vector<std::pair<std::string, std::size_t>>& counts,
    std::size_t clean_extra) {
  std::vector<ImageRecord> records;
  DetectionSet set;
  for (const auto& [label, count] : counts) {
    for (std::size_t i = 0; i < count; ++i) {
      const std::string id = label + "_fp_" + std::to_string(i);
      records.push_back(make_record(id, catalog.healthy()));
      set.by_image[id] = {make_detection(label, 0.6)};
    }
  }
  for (std::size_t i = 0; i < clean_extra; ++i) {
    const std::string id = "clean_" + std::to_string(i);
    records.push_back(make_record(id, catalog.healthy()));
    set.by_image[id] = {};
  }
  return {validate_dataset(std::move(records), catalog), std::move(set)};
}

}  // namespace

TEST_CASE("a clean healthy pool mines nothing") {
  const ClassCatalog catalog = cucumber_catalog();
  const Dataset pool = healthy_pool(catalog, 5);
  const HardSampleIndex index =
      mine_hard_samples(pool, empty_cover(pool), MiningConfig{}, catalog);
  CHECK(index.total_images() == 0);
  CHECK(index_stats(index).total == 0);
  for (const auto& [label, count] : index_stats(index).per_class) CHECK(count == 0);
}

TEST_CASE("a mis-detected healthy image is keyed by its winning box and keeps all boxes") {
  const ClassCatalog catalog = cucumber_catalog();
  const Dataset pool = healthy_pool(catalog, 1);
  DetectionSet set;
  set.by_image["he_0"] = {make_detection("MD", 0.9, make_box(10, 10, 50, 50)),
                          make_detection("PM", 0.4, make_box(200, 10, 80, 50))};

  const HardSampleIndex index = mine_hard_samples(pool, set, MiningConfig{}, catalog);
  CHECK(index.total_images() == 1);
  CHECK(index.class_count("MD") == 1);
  const HardSampleImage& sample = index.per_class[catalog.require_index("MD")][0];
  CHECK(sample.boxes.size() == 2);
  CHECK(sample.key_confidence == doctest::Approx(0.9));

  // keyed class agrees with the classification rule on the same list
  CHECK(rules::classify_by_detection("he_0", set.of("he_0"), catalog).label == "MD");
}

TEST_CASE("the confidence floor filters boxes and can exclude the image") {
  const ClassCatalog catalog = cucumber_catalog();
  const Dataset pool = healthy_pool(catalog, 1);
  DetectionSet set;
  set.by_image["he_0"] = {make_detection("MD", 0.9), make_detection("PM", 0.2)};

  MiningConfig config;
  config.confidence_floor = 0.25;
  HardSampleIndex index = mine_hard_samples(pool, set, config, catalog);
  CHECK(index.per_class[catalog.require_index("MD")][0].boxes.size() == 1);  // PM box filtered

  config.confidence_floor = 0.95;
  index = mine_hard_samples(pool, set, config, catalog);
  CHECK(index.total_images() == 0);

  // floor is inclusive: a box exactly at the floor survives
  config.confidence_floor = 0.9;
  index = mine_hard_samples(pool, set, config, catalog);
  CHECK(index.total_images() == 1);
}

TEST_CASE("healthy-labeled detections never mine") {
  const ClassCatalog catalog = cucumber_catalog();
  const Dataset pool = healthy_pool(catalog, 2);
  DetectionSet set;
  set.by_image["he_0"] = {make_detection("HE", 0.99)};
  set.by_image["he_1"] = {make_detection("HE", 0.99), make_detection("MD", 0.5)};

  const HardSampleIndex index = mine_hard_samples(pool, set, MiningConfig{}, catalog);
  CHECK(index.total_images() == 1);
  CHECK(index.class_count("MD") == 1);
  CHECK(index.per_class[catalog.require_index("MD")][0].boxes.size() == 1);
}

TEST_CASE("mining rejects non-healthy input and bad coverage") {
  const ClassCatalog catalog = cucumber_catalog();
  const Dataset mixed = validate_dataset(
      {make_record("he", "HE"), make_record("sick", "MD")}, catalog);
  capture_error(Errc::NonHealthyInput,
                [&] { mine_hard_samples(mixed, empty_cover(mixed), MiningConfig{}, catalog); });

  const Dataset pool = healthy_pool(catalog, 3);
  DetectionSet partial;
  partial.by_image["he_0"] = {};
  capture_error(Errc::CoverageMismatch,
                [&] { mine_hard_samples(pool, partial, MiningConfig{}, catalog); });
}

TEST_CASE("cucumber hard-sample statistics") {
  const ClassCatalog catalog = cucumber_catalog();
  auto [pool, set] = pool_with_counts(catalog, cucumber_hsm_counts(), 80);
  const HardSampleIndex index = mine_hard_samples(pool, set, MiningConfig{}, catalog);

  const IndexStats stats = index_stats(index);
  CHECK(stats.total == 4920);
  std::size_t sum = 0;
  for (const auto& [label, count] : stats.per_class) sum += count;
  CHECK(sum == stats.total);
  CHECK(index.class_count("CCYV") == 1003);
  CHECK(index.class_count("CLS") == 194);
  CHECK(index.class_count("DM") == 307);
  CHECK(index.class_count("GM") == 24);
  CHECK(index.class_count("MYSV") == 438);
  CHECK(index.class_count("MD") == 2519);
  CHECK(index.class_count("PM") == 435);
}

TEST_CASE("tomato hard-sample statistics") {
  const ClassCatalog catalog = tomato_catalog();
  auto [pool, set] = pool_with_counts(catalog, tomato_hsm_counts(), 40);
  const HardSampleIndex index = mine_hard_samples(pool, set, MiningConfig{}, catalog);
  CHECK(index_stats(index).total == 3353);
  CHECK(index.class_count("BW") == 931);
  CHECK(index.class_count("YLC") == 1092);
}

TEST_CASE("as_annotations relabels every box healthy and keeps the key as metadata") {
  const ClassCatalog catalog = cucumber_catalog();
  const Dataset pool = healthy_pool(catalog, 1);
  DetectionSet set;
  set.by_image["he_0"] = {make_detection("MD", 0.9, make_box(10, 10, 50, 50)),
                          make_detection("MD", 0.6, make_box(100, 10, 50, 50))};
  const HardSampleIndex index = mine_hard_samples(pool, set, MiningConfig{}, catalog);

  const std::vector<ImageRecord> records = as_annotations(index, catalog);
  REQUIRE(records.size() == index_stats(index).total);
  const ImageRecord& record = records[0];
  CHECK(record.true_label == "HE");
  CHECK(record.annotations.size() == 2);
  for (const auto& annotation : record.annotations) CHECK(annotation.label == "HE");
  CHECK(record.mined_class == "MD");
  CHECK(record.key_confidence == doctest::Approx(0.9));
}

TEST_CASE("property: mining agrees with the classification rule and the floor is antitone") {
  const ClassCatalog catalog = cucumber_catalog();
  Rng rng(608);

  for (int iteration = 0; iteration < 60; ++iteration) {
    const std::size_t pool_size = 1 + rng.below(60);
    const Dataset pool = healthy_pool(catalog, pool_size);
    DetectionSet set;
    for (const auto& record : pool.records) {
      std::vector<Detection> detections;
      const int count = rng.uniform_int(0, 4);
      for (int d = 0; d < count; ++d) {
        detections.push_back(make_detection(
            catalog.diseases()[rng.below(catalog.num_diseases())], rng.uniform(0.0, 1.0)));
      }
      set.by_image[record.image_id] = std::move(detections);
    }

    MiningConfig low;
    low.confidence_floor = rng.uniform(0.0, 0.5);
    MiningConfig high;
    high.confidence_floor = low.confidence_floor + rng.uniform(0.0, 0.5);

    const HardSampleIndex mined_low = mine_hard_samples(pool, set, low, catalog);
    const HardSampleIndex mined_high = mine_hard_samples(pool, set, high, catalog);

    // raising the floor never increases any per-class count
    for (std::size_t c = 0; c < catalog.num_diseases(); ++c) {
      CHECK(mined_high.per_class[c].size() <= mined_low.per_class[c].size());
    }

    // keyed class equals the classification rule on the post-floor list;
    // boxes non-empty; no image under two classes
    std::unordered_set<std::string> seen;
    for (std::size_t c = 0; c < catalog.num_diseases(); ++c) {
      for (const HardSampleImage& sample : mined_low.per_class[c]) {
        CHECK(!sample.boxes.empty());
        CHECK(seen.insert(sample.image_id).second);
        std::vector<Detection> surviving;
        for (const Detection& detection : set.of(sample.image_id)) {
          if (detection.confidence >= low.confidence_floor) surviving.push_back(detection);
        }
        CHECK(rules::classify_by_detection(sample.image_id, surviving, catalog).label ==
              catalog.diseases()[c]);
      }
    }
    check_index(mined_low);
    check_index(mined_high);
  }
}
