// Copyright (c) 2026 remine contributors
//
// SPDX-License-Identifier: Apache-2.0
//

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "remine/metrics.hpp"
#include "remine/mining.hpp"
#include "remine/parallel.hpp"
#include "remine/rules.hpp"
#include "remine/simulation.hpp"
#include "support.hpp"

using namespace remine;
using namespace remine::test;

namespace {

struct Workload {
  Dataset dataset;
  DetectionSet detections;
};

Workload random_workload(Rng& rng, const ClassCatalog& catalog, std::size_t size,
                         bool healthy_only) {
  std::vector<ImageRecord> records;
  DetectionSet set;
  for (std::size_t i = 0; i < size; ++i) {
    const std::string id = "w_" + std::to_string(i);
    const std::string label = healthy_only
                                  ? catalog.healthy()
                                  : catalog.label_at(rng.below(catalog.num_classes()));
    records.push_back(make_record(id, label, {}, 3000, 2000));

    std::vector<Detection> detections;
    const int count = rng.uniform_int(0, 5);
    for (int d = 0; d < count; ++d) {
      const double w = rng.uniform(1.0, 1000.0);
      const double h = rng.uniform(1.0, 800.0);
      detections.push_back(make_detection(
          catalog.label_at(rng.below(catalog.num_classes())), rng.uniform(0.0, 1.0),
          make_box(rng.uniform(0.0, 3000.0 - w), rng.uniform(0.0, 2000.0 - h), w, h, 3000,
                   2000)));
    }
    set.by_image[id] = std::move(detections);
  }
  return {validate_dataset(std::move(records), catalog), std::move(set)};
}

}  // namespace

TEST_CASE("worker thread resolution") {
  set_worker_threads(0);
  CHECK(worker_threads() >= 1);
  set_worker_threads(3);
  CHECK(worker_threads() == 3);
  set_worker_threads(0);
}

TEST_CASE("classification kernel matches its serial reference") {
  const ClassCatalog catalog = cucumber_catalog();
  Rng rng(1001);
  for (int round = 0; round < 10; ++round) {
    const Workload work = random_workload(rng, catalog, 500, false);
    const auto parallel =
        rules::classify_dataset(work.dataset, work.detections, rules::RuleKind::DetectionOnly);
    const auto serial = rules::classify_dataset_serial(work.dataset, work.detections,
                                                       rules::RuleKind::DetectionOnly);
    REQUIRE(parallel == serial);
  }
}

TEST_CASE("confusion kernel matches its serial reference") {
  const ClassCatalog catalog = tomato_catalog();
  Rng rng(1002);
  for (int round = 0; round < 10; ++round) {
    const Workload work = random_workload(rng, catalog, 700, false);
    const auto predictions =
        rules::classify_dataset_serial(work.dataset, work.detections,
                                       rules::RuleKind::DetectionOnly);
    const auto parallel = metrics::confusion(work.dataset, predictions);
    const auto serial = metrics::confusion_serial(work.dataset, predictions);
    REQUIRE(parallel == serial);
  }
}

TEST_CASE("mining kernel matches its serial reference") {
  const ClassCatalog catalog = cucumber_catalog();
  Rng rng(1003);
  for (int round = 0; round < 10; ++round) {
    const Workload work = random_workload(rng, catalog, 600, true);
    mining::MiningConfig config;
    config.confidence_floor = rng.uniform(0.0, 0.6);
    const auto parallel = mining::mine_hard_samples(work.dataset, work.detections, config, catalog);
    const auto serial =
        mining::mine_hard_samples_serial(work.dataset, work.detections, config, catalog);
    REQUIRE(parallel == serial);
  }
}

TEST_CASE("simulation kernel matches its serial reference") {
  const ClassCatalog catalog = cucumber_catalog();
  Rng rng(1004);
  for (int round = 0; round < 5; ++round) {
    const Workload work = random_workload(rng, catalog, 800, false);
    simulation::DetectorProfile profile = simulation::make_profile(catalog, rng.next());
    for (std::size_t c = 0; c < catalog.num_diseases(); ++c) {
      profile.kernel_at(c, c) = rng.uniform(0.3, 0.95);
    }
    profile.kernel_at(catalog.healthy_index(), rng.below(catalog.num_diseases())) =
        rng.uniform(0.1, 0.5);

    const auto parallel = simulation::simulate_detections(work.dataset, profile);
    const auto serial = simulation::simulate_detections_serial(work.dataset, profile);
    REQUIRE(parallel.by_image == serial.by_image);
  }
}

TEST_CASE("kernel results are independent of the worker count") {
  const ClassCatalog catalog = cucumber_catalog();
  Rng rng(1005);
  const Workload work = random_workload(rng, catalog, 400, true);

  simulation::DetectorProfile profile = simulation::make_profile(catalog, 77);
  profile.kernel_at(catalog.healthy_index(), 0) = 0.4;

  set_worker_threads(1);
  const auto mined_single =
      mining::mine_hard_samples(work.dataset, work.detections, mining::MiningConfig{}, catalog);
  const auto simulated_single = simulation::simulate_detections(work.dataset, profile);

  for (int threads : {2, 4, 7}) {
    set_worker_threads(threads);
    CHECK(mining::mine_hard_samples(work.dataset, work.detections, mining::MiningConfig{},
                                    catalog) == mined_single);
    CHECK(simulation::simulate_detections(work.dataset, profile).by_image ==
          simulated_single.by_image);
  }
  set_worker_threads(0);
}
