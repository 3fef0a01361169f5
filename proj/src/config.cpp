// Copyright (c) 2026 remine contributors
//
// SPDX-License-Identifier: Apache-2.0
//

#include "remine/config.hpp"

#include <fstream>

#include "json.hpp"
#include "remine/error.hpp"

namespace remine {

namespace {

using nlohmann::json;

template <typename T>
void put(json& doc, const char* key, const std::optional<T>& value) {
  if (value) doc[key] = *value;
}

template <typename T>
void take(const json& doc, const char* key, std::optional<T>& value) {
  const auto it = doc.find(key);
  if (it == doc.end() || it->is_null()) return;
  try {
    value = it->get<T>();
  } catch (const json::exception&) {
    throw Error(Errc::InvalidConfig, std::string("config field '") + key + "' has the wrong type");
  }
}

constexpr const char* kKnownKeys[] = {
    "catalog", "manifest", "detections", "out",        "profile", "degrade", "r_org",
    "r_hsm",   "index",    "test",       "healthy",    "gate",    "tag",     "theta_mode",
    "log",     "theta",    "threads",    "conf_floor", "seed"};

}  // namespace

void RunConfig::apply_overrides(const RunConfig& overrides) {
  auto maybe = [](auto& target, const auto& source) {
    if (source) target = source;
  };
  maybe(catalog, overrides.catalog);
  maybe(manifest, overrides.manifest);
  maybe(detections, overrides.detections);
  maybe(out, overrides.out);
  maybe(profile, overrides.profile);
  maybe(degrade, overrides.degrade);
  maybe(r_org, overrides.r_org);
  maybe(r_hsm, overrides.r_hsm);
  maybe(index, overrides.index);
  maybe(test, overrides.test);
  maybe(healthy, overrides.healthy);
  maybe(gate, overrides.gate);
  maybe(tag, overrides.tag);
  maybe(theta_mode, overrides.theta_mode);
  maybe(log, overrides.log);
  maybe(theta, overrides.theta);
  maybe(threads, overrides.threads);
  maybe(conf_floor, overrides.conf_floor);
  maybe(seed, overrides.seed);
}

std::string config_to_json(const RunConfig& config) {
  json doc = json::object();
  put(doc, "catalog", config.catalog);
  put(doc, "manifest", config.manifest);
  put(doc, "detections", config.detections);
  put(doc, "out", config.out);
  put(doc, "profile", config.profile);
  put(doc, "degrade", config.degrade);
  put(doc, "r_org", config.r_org);
  put(doc, "r_hsm", config.r_hsm);
  put(doc, "index", config.index);
  put(doc, "test", config.test);
  put(doc, "healthy", config.healthy);
  put(doc, "gate", config.gate);
  put(doc, "tag", config.tag);
  put(doc, "theta_mode", config.theta_mode);
  put(doc, "log", config.log);
  put(doc, "theta", config.theta);
  put(doc, "threads", config.threads);
  put(doc, "conf_floor", config.conf_floor);
  put(doc, "seed", config.seed);
  return doc.dump(2) + "\n";
}

RunConfig config_from_json(const std::string& text) {
  const json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw Error(Errc::InvalidConfig, "config must be a JSON object");
  }
  for (const auto& [key, value] : doc.items()) {
    (void)value;
    bool known = false;
    for (const char* candidate : kKnownKeys) known = known || key == candidate;
    if (!known) throw Error(Errc::InvalidConfig, "unknown config key '" + key + "'");
  }

  RunConfig config;
  take(doc, "catalog", config.catalog);
  take(doc, "manifest", config.manifest);
  take(doc, "detections", config.detections);
  take(doc, "out", config.out);
  take(doc, "profile", config.profile);
  take(doc, "degrade", config.degrade);
  take(doc, "r_org", config.r_org);
  take(doc, "r_hsm", config.r_hsm);
  take(doc, "index", config.index);
  take(doc, "test", config.test);
  take(doc, "healthy", config.healthy);
  take(doc, "gate", config.gate);
  take(doc, "tag", config.tag);
  take(doc, "theta_mode", config.theta_mode);
  take(doc, "log", config.log);
  take(doc, "theta", config.theta);
  take(doc, "threads", config.threads);
  take(doc, "conf_floor", config.conf_floor);
  take(doc, "seed", config.seed);
  return config;
}

RunConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(Errc::IoError, "cannot open '" + file.string() + "' for reading");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return config_from_json(text);
}

void save_config(const RunConfig& config, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw Error(Errc::IoError, "cannot open '" + file.string() + "' for writing");
  out << config_to_json(config);
}

}  // namespace remine
