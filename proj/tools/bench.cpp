// Copyright (c) 2026 remine contributors
//
// SPDX-License-Identifier: Apache-2.0
//

// Compares each OpenMP kernel against its serial reference on a synthetic
// workload and prints the timings side by side.

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "remine/core.hpp"
#include "remine/metrics.hpp"
#include "remine/mining.hpp"
#include "remine/parallel.hpp"
#include "remine/rng.hpp"
#include "remine/rules.hpp"
#include "remine/simulation.hpp"

namespace {

using namespace remine;
using Clock = std::chrono::steady_clock;

template <typename Fn>
double seconds(Fn&& fn) {
  const auto start = Clock::now();
  fn();
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void print_row(const char* kernel, double serial, double parallel, bool equal) {
  std::printf("%-22s %10.3fs %10.3fs %8.2fx   %s\n", kernel, serial, parallel,
              parallel > 0.0 ? serial / parallel : 0.0, equal ? "match" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"remine kernel benchmark: serial reference vs OpenMP"};
  int images = 200000;
  int threads = 0;
  int repeats = 3;
  app.add_option("--images", images, "synthetic dataset size (default 200000)");
  app.add_option("--threads", threads, "worker threads, 0 = one per hardware thread");
  app.add_option("--repeats", repeats, "timing repetitions, best-of (default 3)");
  CLI11_PARSE(app, argc, argv);

  set_worker_threads(threads);
  std::printf("images=%d workers=%d hardware=%d\n\n", images, worker_threads(),
              hardware_threads());

  const ClassCatalog catalog =
      build_catalog({"CCYV", "CLS", "DM", "GM", "MYSV", "MD", "PM"}, "HE");

  // healthy-only dataset so the same workload feeds every kernel, mining included
  std::vector<ImageRecord> records;
  records.reserve(static_cast<std::size_t>(images));
  for (int i = 0; i < images; ++i) {
    ImageRecord record;
    record.image_id = "bench_" + std::to_string(i);
    record.true_label = catalog.healthy();
    record.image_w = 3000;
    record.image_h = 2000;
    records.push_back(std::move(record));
  }
  const Dataset dataset = validate_dataset(std::move(records), catalog);

  simulation::DetectorProfile profile = simulation::make_profile(catalog, 20260808);
  profile.kernel_at(catalog.healthy_index(), catalog.require_index("MD")) = 0.47;
  profile.kernel_at(catalog.healthy_index(), catalog.require_index("MYSV")) = 0.08;
  profile.kernel_at(catalog.healthy_index(), catalog.require_index("PM")) = 0.05;
  profile.boxes_per_hit = {1, 4};

  auto best_of = [&](auto&& fn) {
    double best = 1e300;
    for (int r = 0; r < repeats; ++r) best = std::min(best, seconds(fn));
    return best;
  };

  std::printf("%-22s %11s %11s %9s\n", "kernel", "serial", "openmp", "speedup");

  DetectionSet dump_serial, dump_parallel;
  const double sim_serial =
      best_of([&] { dump_serial = simulation::simulate_detections_serial(dataset, profile); });
  const double sim_parallel =
      best_of([&] { dump_parallel = simulation::simulate_detections(dataset, profile); });
  print_row("simulate_detections", sim_serial, sim_parallel,
            dump_serial.by_image == dump_parallel.by_image);

  std::vector<rules::Prediction> pred_serial, pred_parallel;
  const double cls_serial = best_of([&] {
    pred_serial =
        rules::classify_dataset_serial(dataset, dump_serial, rules::RuleKind::DetectionOnly);
  });
  const double cls_parallel = best_of([&] {
    pred_parallel = rules::classify_dataset(dataset, dump_serial, rules::RuleKind::DetectionOnly);
  });
  print_row("classify_dataset", cls_serial, cls_parallel, pred_serial == pred_parallel);

  metrics::ConfusionMatrix conf_serial, conf_parallel;
  const double conf_serial_time =
      best_of([&] { conf_serial = metrics::confusion_serial(dataset, pred_serial); });
  const double conf_parallel_time =
      best_of([&] { conf_parallel = metrics::confusion(dataset, pred_serial); });
  print_row("confusion", conf_serial_time, conf_parallel_time, conf_serial == conf_parallel);

  mining::MiningConfig mining_config;
  mining::HardSampleIndex index_serial, index_parallel;
  const double mine_serial_time = best_of([&] {
    index_serial = mining::mine_hard_samples_serial(dataset, dump_serial, mining_config, catalog);
  });
  const double mine_parallel_time = best_of([&] {
    index_parallel = mining::mine_hard_samples(dataset, dump_serial, mining_config, catalog);
  });
  print_row("mine_hard_samples", mine_serial_time, mine_parallel_time,
            index_serial == index_parallel);

  const bool all_match = dump_serial.by_image == dump_parallel.by_image &&
                         pred_serial == pred_parallel && conf_serial == conf_parallel &&
                         index_serial == index_parallel;
  return all_match ? 0 : 1;
}
