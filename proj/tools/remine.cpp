// Copyright (c) 2026 remine contributors
//
// SPDX-License-Identifier: Apache-2.0
//

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "remine/config.hpp"
#include "remine/core.hpp"
#include "remine/io.hpp"
#include "remine/manifest.hpp"
#include "remine/metrics.hpp"
#include "remine/mining.hpp"
#include "remine/parallel.hpp"
#include "remine/rules.hpp"
#include "remine/selection.hpp"
#include "remine/simulation.hpp"

namespace {

using namespace remine;
using nlohmann::json;

// ---------------------------------------------------------------------------
// exit codes: 0 ok, 2 input error, 3 contract violation, 4 internal

struct CliFailure {
  int code;
  std::string message;
};

// Errors raised while loading or validating one input file.
template <typename Fn>
auto input_stage(Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& error) {
    throw CliFailure{2, error.what()};
  }
}

// Same, with the offending file named in the message.
template <typename Fn>
auto input_file_stage(const std::string& path, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& error) {
    throw CliFailure{2, path + ": " + error.what()};
  }
}

// Errors raised by cross-input contracts (coverage, collisions, ...).
template <typename Fn>
auto contract_stage(Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& error) {
    throw CliFailure{3, error.what()};
  }
}

// ---------------------------------------------------------------------------
// logging: structured lines to stderr, data only to files

enum class Level { Error = 0, Warn = 1, Info = 2, Debug = 3 };

Level g_level = Level::Warn;

void init_log_level(const RunConfig& config) {
  std::string name = config.log.value_or("warn");
  if (const char* env = std::getenv("REMINE_LOG"); env != nullptr && *env != '\0') name = env;
  if (name == "error") g_level = Level::Error;
  else if (name == "warn") g_level = Level::Warn;
  else if (name == "info") g_level = Level::Info;
  else if (name == "debug") g_level = Level::Debug;
  else throw CliFailure{2, "unknown log level '" + name + "'"};
}

void logmsg(Level level, const std::string& text) {
  if (level > g_level) return;
  static const char* names[] = {"error", "warn", "info", "debug"};
  std::cerr << "remine: " << names[static_cast<int>(level)] << ": " << text << "\n";
}

// ---------------------------------------------------------------------------
// config plumbing

RunConfig resolve(const std::string& config_path, const RunConfig& flags) {
  RunConfig config;
  if (!config_path.empty()) {
    config = input_stage([&] { return load_config(config_path); });
  }
  config.apply_overrides(flags);
  init_log_level(config);
  set_worker_threads(config.threads.value_or(0));
  return config;
}

const std::string& require(const std::optional<std::string>& value, const char* flag) {
  if (!value || value->empty()) {
    throw CliFailure{2, std::string("missing required ") + flag +
                            " (pass the flag or set it in --config)"};
  }
  return *value;
}

std::filesystem::path out_dir(const RunConfig& config) {
  const std::filesystem::path dir = require(config.out, "--out");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw CliFailure{2, "cannot create output directory '" + dir.string() + "'"};
  return dir;
}

void warn_all(const std::vector<Issue>& warnings) {
  for (const Issue& warning : warnings) logmsg(Level::Warn, warning.to_string());
}

// ---------------------------------------------------------------------------
// shared loading steps

ClassCatalog load_catalog_arg(const RunConfig& config) {
  const std::string path = require(config.catalog, "--catalog");
  return input_file_stage(path, [&] { return io::load_catalog(path); });
}

Dataset load_dataset_arg(const std::string& path, const ClassCatalog& catalog) {
  return input_file_stage(path, [&] {
    auto records = io::load_manifest(path, catalog);
    return validate_dataset(std::move(records), catalog);
  });
}

DetectionSet load_dump_arg(const std::string& path, const ClassCatalog& catalog,
                           const Dataset& dataset) {
  std::vector<Issue> warnings;
  DetectionSet set = input_file_stage(
      path, [&] { return io::load_detections(path, catalog, dataset, &warnings); });
  warn_all(warnings);
  return set;
}

Dataset slice_by_health(const Dataset& dataset, bool keep_healthy) {
  std::vector<ImageRecord> kept;
  for (const ImageRecord& record : dataset.records) {
    if (dataset.catalog.is_healthy(record.true_label) == keep_healthy) kept.push_back(record);
  }
  if (kept.size() != dataset.records.size()) {
    logmsg(Level::Info, "using " + std::to_string(kept.size()) + " of " +
                            std::to_string(dataset.records.size()) + " manifest records (" +
                            (keep_healthy ? "healthy" : "disease") + " slice)");
  }
  return validate_dataset(std::move(kept), dataset.catalog);
}

metrics::MetricReport load_report_arg(const std::string& path) {
  return input_file_stage(path, [&] {
    std::ifstream in(path);
    if (!in) throw Error(Errc::IoError, "cannot open '" + path + "' for reading");
    return metrics::read_report_json(in);
  });
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw CliFailure{2, "cannot open '" + path.string() + "' for writing"};
  out << text;
}

json selection_report_doc(const selection::SelectionOutcome& outcome, int theta) {
  json doc;
  doc["theta"] = theta;
  json drops = json::array();
  for (const selection::ClassDrop& drop : outcome.drops) {
    drops.push_back({{"label", drop.label},
                     {"r_org", drop.r_org},
                     {"r_hsm", drop.r_hsm},
                     {"drop", drop.drop},
                     {"images", drop.images},
                     {"removed", drop.removed}});
  }
  doc["drop_table"] = std::move(drops);
  doc["removed_classes"] = outcome.removed_classes;
  doc["retained_total"] = outcome.retained_total;
  doc["removed_total"] = outcome.removed_total;
  return doc;
}

// ---------------------------------------------------------------------------
// subcommands

void run_simulate(const RunConfig& config) {
  const ClassCatalog catalog = load_catalog_arg(config);
  const Dataset dataset = load_dataset_arg(require(config.manifest, "--manifest"), catalog);

  const std::string profile_path = require(config.profile, "--profile");
  simulation::DetectorProfile profile = input_file_stage(
      profile_path, [&] { return simulation::load_profile(profile_path, catalog); });
  if (config.seed) profile.seed = *config.seed;
  if (config.degrade) {
    const auto model = input_file_stage(
        *config.degrade, [&] { return simulation::load_degradation(*config.degrade); });
    profile = contract_stage([&] { return simulation::apply_degradation(profile, model); });
  }

  const DetectionSet detections =
      contract_stage([&] { return simulation::simulate_detections(dataset, profile); });

  const auto dir = out_dir(config);
  input_stage([&] {
    io::save_detections(detections, dataset, dir / "simulated.detections.jsonl");
    return 0;
  });
  logmsg(Level::Info, "simulated detections for " + std::to_string(dataset.size()) + " images");
}

void run_evaluate(const RunConfig& config) {
  const ClassCatalog catalog = load_catalog_arg(config);
  const Dataset dataset = load_dataset_arg(require(config.manifest, "--manifest"), catalog);
  const DetectionSet detections =
      load_dump_arg(require(config.detections, "--detections"), catalog, dataset);

  rules::BinaryGate gate;
  const bool two_stage = config.gate.has_value();
  if (two_stage) {
    gate = input_file_stage(*config.gate, [&] { return io::load_gate(*config.gate, dataset); });
  }

  const auto predictions = contract_stage([&] {
    return rules::classify_dataset(dataset, detections,
                                   two_stage ? rules::RuleKind::TwoStage
                                             : rules::RuleKind::DetectionOnly,
                                   two_stage ? &gate : nullptr);
  });
  const metrics::ConfusionMatrix matrix =
      contract_stage([&] { return metrics::confusion(dataset, predictions); });
  const metrics::MetricReport report =
      contract_stage([&] { return metrics::report(matrix, config.tag.value_or("model")); });

  const auto dir = out_dir(config);
  {
    std::ofstream out(dir / "report.json");
    metrics::write_report_json(report, out);
  }
  {
    std::ofstream out(dir / "report.txt");
    metrics::write_text_table(report, out);
  }
  {
    std::ofstream out(dir / "confusion.csv");
    metrics::write_confusion_csv(matrix, out);
  }
  logmsg(Level::Info,
         "macro-F1 " + std::to_string(report.macro_f1) + " over " +
             std::to_string(report.total) + " images");
}

void run_mine(const RunConfig& config) {
  const ClassCatalog catalog = load_catalog_arg(config);
  const Dataset dataset = load_dataset_arg(require(config.manifest, "--manifest"), catalog);
  const DetectionSet detections =
      load_dump_arg(require(config.detections, "--detections"), catalog, dataset);
  const Dataset healthy = slice_by_health(dataset, /*keep_healthy=*/true);

  mining::MiningConfig mining_config;
  mining_config.confidence_floor = config.conf_floor.value_or(0.25);
  if (mining_config.confidence_floor < 0.0 || mining_config.confidence_floor > 1.0) {
    throw CliFailure{2, "--conf-floor must lie in [0, 1]"};
  }

  const mining::HardSampleIndex index = contract_stage(
      [&] { return mining::mine_hard_samples(healthy, detections, mining_config, catalog); });

  const auto dir = out_dir(config);
  input_stage([&] {
    io::save_hard_samples(index, dir / "hard_samples.json");
    return 0;
  });

  const mining::IndexStats stats = mining::index_stats(index);
  logmsg(Level::Info, "mined " + std::to_string(stats.total) + " hard-sample images from " +
                          std::to_string(healthy.size()) + " healthy images");
  for (const auto& [label, count] : stats.per_class) {
    if (count > 0) logmsg(Level::Debug, "  " + label + ": " + std::to_string(count));
  }
}

void run_select(const RunConfig& config) {
  const ClassCatalog catalog = load_catalog_arg(config);
  const std::string index_path = require(config.index, "--index");
  const mining::HardSampleIndex index = input_file_stage(
      index_path, [&] { return io::load_hard_samples(index_path, catalog); });

  const RecallTable r_org = contract_stage([&] {
    return metrics::recall_table_from_report(load_report_arg(require(config.r_org, "--r-org")),
                                             catalog);
  });
  const RecallTable r_hsm = contract_stage([&] {
    return metrics::recall_table_from_report(load_report_arg(require(config.r_hsm, "--r-hsm")),
                                             catalog);
  });

  const int theta = config.theta.value_or(6);
  if (theta < 0) throw CliFailure{2, "--theta must be a non-negative integer"};
  const selection::SelectionOutcome outcome =
      contract_stage([&] { return selection::hss_select(r_org, r_hsm, index, theta); });

  const auto dir = out_dir(config);
  input_stage([&] {
    io::save_hard_samples(outcome.retained, dir / "hard_samples.selected.json");
    return 0;
  });
  json doc = selection_report_doc(outcome, theta);
  doc["mode"] = nullptr;  // fixed theta, no search
  doc["trace"] = json::array();
  write_text_file(dir / "selection_report.json", doc.dump(2) + "\n");

  logmsg(Level::Info, "retained " + std::to_string(outcome.retained_total) + ", removed " +
                          std::to_string(outcome.removed_total) + " hard-sample images");
}

void run_emit(const RunConfig& config) {
  const ClassCatalog catalog = load_catalog_arg(config);
  const Dataset dataset = load_dataset_arg(require(config.manifest, "--manifest"), catalog);
  const Dataset diseases = slice_by_health(dataset, /*keep_healthy=*/false);

  mining::HardSampleIndex index = mining::empty_index(catalog);
  if (config.index) {
    index = input_file_stage(*config.index,
                             [&] { return io::load_hard_samples(*config.index, catalog); });
  }

  const std::string tag_text = config.tag.value_or(config.index ? "hsrem" : "org");
  const auto tag = manifest::parse_tag(tag_text);
  if (!tag) throw CliFailure{2, "--tag must be one of org, hsm, hsrem"};

  const manifest::TrainingManifest training = contract_stage([&] {
    return manifest::build_manifest(diseases, config.index ? &index : nullptr, catalog, *tag);
  });

  const auto dir = out_dir(config);
  input_stage([&] {
    manifest::save(training, dir);
    manifest::export_labels(training, dir / "labels");
    return 0;
  });

  const manifest::ManifestSummary summary = manifest::manifest_summary(training);
  logmsg(Level::Info, "emitted " + std::to_string(summary.total_images) + " records (" +
                          std::to_string(summary.disease_images) + " disease + " +
                          std::to_string(summary.hard_sample_images) + " hard-sample)");
}

void run_search_theta(const RunConfig& config) {
  const ClassCatalog catalog = load_catalog_arg(config);
  const Dataset test = load_dataset_arg(require(config.test, "--test"), catalog);
  const Dataset pool =
      slice_by_health(load_dataset_arg(require(config.healthy, "--healthy"), catalog), true);

  const std::string profile_path = require(config.profile, "--profile");
  simulation::DetectorProfile base = input_file_stage(
      profile_path, [&] { return simulation::load_profile(profile_path, catalog); });
  if (config.seed) base.seed = *config.seed;
  const std::string degrade_path = require(config.degrade, "--degrade");
  const simulation::DegradationModel model = input_file_stage(
      degrade_path, [&] { return simulation::load_degradation(degrade_path); });
  const simulation::DetectorProfile degraded =
      contract_stage([&] { return simulation::apply_degradation(base, model); });

  // score a profile by its simulated macro-F1 on the test manifest
  const auto macro_f1_of = [&](const simulation::DetectorProfile& profile) {
    const DetectionSet detections = simulation::simulate_detections(test, profile);
    const auto predictions =
        rules::classify_dataset(test, detections, rules::RuleKind::DetectionOnly);
    return metrics::report(metrics::confusion(test, predictions), "candidate");
  };

  const metrics::MetricReport org_report = contract_stage([&] { return macro_f1_of(base); });
  const metrics::MetricReport hsm_report = contract_stage([&] { return macro_f1_of(degraded); });
  RecallTable r_org = contract_stage([&] {
    return metrics::recall_table_from_report(org_report, catalog);
  });
  RecallTable r_hsm = contract_stage([&] {
    return metrics::recall_table_from_report(hsm_report, catalog);
  });
  r_org.model_tag = "org";
  r_hsm.model_tag = "hsm";

  mining::MiningConfig mining_config;
  mining_config.confidence_floor = config.conf_floor.value_or(0.25);
  const DetectionSet pool_detections =
      contract_stage([&] { return simulation::simulate_detections(pool, base); });
  const mining::HardSampleIndex index = contract_stage(
      [&] { return mining::mine_hard_samples(pool, pool_detections, mining_config, catalog); });
  const std::size_t mined_total = index.total_images();
  logmsg(Level::Info, "mined " + std::to_string(mined_total) + " hard-sample images for the search");

  selection::SelectionConfig search_config;
  const std::string mode = config.theta_mode.value_or("exhaustive");
  if (mode == "exhaustive") search_config.search_mode = selection::SearchMode::Exhaustive;
  else if (mode == "binary") search_config.search_mode = selection::SearchMode::Binary;
  else throw CliFailure{2, "--theta-mode must be 'exhaustive' or 'binary'"};

  const selection::ThetaEvaluator evaluator = [&](int theta) {
    const selection::SelectionOutcome outcome = selection::hss_select(r_org, r_hsm, index, theta);
    std::vector<std::string> retained_classes;
    for (const selection::ClassDrop& drop : outcome.drops) {
      if (!drop.removed) retained_classes.push_back(drop.label);
    }
    const double fraction =
        mined_total == 0 ? 0.0
                         : static_cast<double>(outcome.retained_total) /
                               static_cast<double>(mined_total);
    const simulation::DetectorProfile candidate = simulation::blend_retained(
        base, degraded, retained_classes, fraction, model.healthy_saturation);
    const double score = macro_f1_of(candidate).macro_f1;
    logmsg(Level::Debug, "theta " + std::to_string(theta) + " -> macro-F1 " +
                             std::to_string(score));
    return score;
  };

  const selection::SearchResult result = contract_stage(
      [&] { return selection::search_theta(r_org, r_hsm, index, evaluator, search_config); });

  const auto dir = out_dir(config);
  {
    std::ofstream out(dir / "r_org.report.json");
    metrics::write_report_json(org_report, out);
  }
  {
    std::ofstream out(dir / "r_hsm.report.json");
    metrics::write_report_json(hsm_report, out);
  }
  input_stage([&] {
    io::save_hard_samples(index, dir / "hard_samples.json");
    io::save_hard_samples(result.outcome.retained, dir / "hard_samples.selected.json");
    return 0;
  });

  json doc = selection_report_doc(result.outcome, result.best_theta);
  doc["mode"] = selection::search_mode_name(result.mode);
  doc["lower"] = result.lower;
  doc["beta"] = result.beta;
  doc["best_theta"] = result.best_theta;
  doc["best_score"] = result.best_score;
  if (!result.assumption.empty()) doc["assumption"] = result.assumption;
  json trace = json::array();
  for (const selection::ThetaEvaluation& entry : result.trace) {
    trace.push_back({{"theta", entry.theta},
                     {"score", entry.ok ? json(entry.score) : json()},
                     {"ok", entry.ok},
                     {"note", entry.note}});
  }
  doc["trace"] = std::move(trace);
  write_text_file(dir / "selection_report.json", doc.dump(2) + "\n");

  logmsg(Level::Info, "best theta " + std::to_string(result.best_theta) + " (macro-F1 " +
                          std::to_string(result.best_score) + ") over [" +
                          std::to_string(result.lower) + ", " + std::to_string(result.beta) + "]");
}

// ---------------------------------------------------------------------------

void add_common_flags(CLI::App* cmd, RunConfig& flags, std::string& config_path) {
  cmd->add_option("--config", config_path, "JSON config file providing defaults for any flag");
  cmd->add_option("--catalog", flags.catalog, "class catalog JSON (diseases + healthy label)");
  cmd->add_option("--out", flags.out, "output directory");
  cmd->add_option("--threads", flags.threads, "worker threads, 0 = one per hardware thread");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hard-sample mining / re-mining toolkit for detection datasets"};
  app.require_subcommand(1);

  RunConfig flags;
  std::string config_path;

  CLI::App* simulate = app.add_subcommand(
      "simulate", "emit a synthetic detection dump for a manifest from a detector profile");
  add_common_flags(simulate, flags, config_path);
  simulate->add_option("--manifest", flags.manifest, "dataset manifest (jsonl)");
  simulate->add_option("--profile", flags.profile, "detector profile JSON");
  simulate->add_option("--degrade", flags.degrade, "apply this degradation model first");
  simulate->add_option("--seed", flags.seed, "override the profile seed");
  simulate->callback([&] { run_simulate(resolve(config_path, flags)); });

  CLI::App* evaluate = app.add_subcommand(
      "evaluate", "classify a detection dump against ground truth and report metrics");
  add_common_flags(evaluate, flags, config_path);
  evaluate->add_option("--manifest", flags.manifest, "dataset manifest (jsonl)");
  evaluate->add_option("--detections", flags.detections, "detection dump (jsonl)");
  evaluate->add_option("--gate", flags.gate, "first-stage healthy/diseased verdicts (jsonl)");
  evaluate->add_option("--tag", flags.tag, "model tag recorded in the report");
  evaluate->callback([&] { run_evaluate(resolve(config_path, flags)); });

  CLI::App* mine = app.add_subcommand(
      "mine", "harvest false-positive boxes on healthy images into a hard-sample index");
  add_common_flags(mine, flags, config_path);
  mine->add_option("--manifest", flags.manifest, "manifest holding the healthy pool (jsonl)");
  mine->add_option("--detections", flags.detections, "detection dump over that manifest (jsonl)");
  mine->add_option("--conf-floor", flags.conf_floor,
                   "detections below this confidence do not mine (default 0.25)");
  mine->callback([&] { run_mine(resolve(config_path, flags)); });

  CLI::App* select = app.add_subcommand(
      "select", "drop hard-sample classes whose recall fell more than theta between generations");
  add_common_flags(select, flags, config_path);
  select->add_option("--r-org", flags.r_org, "metric report JSON of the original model");
  select->add_option("--r-hsm", flags.r_hsm, "metric report JSON of the re-trained model");
  select->add_option("--index", flags.index, "hard_samples.json to select from");
  select->add_option("--theta", flags.theta, "recall-drop threshold in percentage points (default 6)");
  select->callback([&] { run_select(resolve(config_path, flags)); });

  CLI::App* emit = app.add_subcommand(
      "emit", "assemble a training manifest plus per-image label files");
  add_common_flags(emit, flags, config_path);
  emit->add_option("--manifest", flags.manifest, "disease image manifest (jsonl)");
  emit->add_option("--index", flags.index, "selected hard-sample index to include");
  emit->add_option("--tag", flags.tag, "generation tag: org, hsm or hsrem");
  emit->callback([&] { run_emit(resolve(config_path, flags)); });

  CLI::App* search = app.add_subcommand(
      "search-theta", "search the integer theta window using a simulation-backed evaluator");
  add_common_flags(search, flags, config_path);
  search->add_option("--test", flags.test, "evaluation manifest (jsonl)");
  search->add_option("--healthy", flags.healthy, "healthy pool manifest (jsonl)");
  search->add_option("--profile", flags.profile, "base detector profile JSON");
  search->add_option("--degrade", flags.degrade, "degradation model JSON for the re-trained generation");
  search->add_option("--theta-mode", flags.theta_mode, "exhaustive (default) or binary");
  search->add_option("--conf-floor", flags.conf_floor, "mining confidence floor (default 0.25)");
  search->add_option("--seed", flags.seed, "override the profile seed");
  search->callback([&] { run_search_theta(resolve(config_path, flags)); });

  try {
    app.parse(argc, argv);
    return 0;
  } catch (const CLI::CallForHelp& help) {
    return app.exit(help);
  } catch (const CLI::ParseError& parse_error) {
    app.exit(parse_error);
    return 2;
  } catch (const CliFailure& failure) {
    logmsg(Level::Error, failure.message);
    return failure.code;
  } catch (const std::exception& unexpected) {
    logmsg(Level::Error, std::string("internal: ") + unexpected.what());
    return 4;
  }
}
