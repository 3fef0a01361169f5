// Copyright (c) 2026 remine contributors
//
// SPDX-License-Identifier: Apache-2.0
//

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <map>

#include "remine/selection.hpp"
#include "support.hpp"

using namespace remine;
using namespace remine::selection;
using namespace remine::test;

namespace {

// Random recall tables over every catalog disease, drops in [-20, 30].
std::pair<RecallTable, RecallTable> random_tables(Rng& rng, const ClassCatalog& catalog) {
  RecallTable r_org{"org", {}};
  RecallTable r_hsm{"hsm", {}};
  for (const std::string& label : catalog.diseases()) {
    const double base = rng.uniform(40.0, 100.0);
    const double drop = rng.uniform(-20.0, 30.0);
    r_org.by_class.emplace(label, RecallEntry{base, false});
    r_hsm.by_class.emplace(label, RecallEntry{base - drop, false});
  }
  return {r_org, r_hsm};
}

mining::HardSampleIndex random_index(Rng& rng, const ClassCatalog& catalog) {
  std::vector<std::pair<std::string, std::size_t>> counts;
  for (const std::string& label : catalog.diseases()) {
    if (rng.below(3) == 0) continue;  // some classes stay unkeyed
    counts.emplace_back(label, 1 + rng.below(40));
  }
  return index_with_counts(catalog, counts);
}

std::vector<std::string> retained_ids(const mining::HardSampleIndex& index) {
  std::vector<std::string> ids;
  for (const auto& bucket : index.per_class) {
    for (const auto& sample : bucket) ids.push_back(sample.image_id);
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

}  // namespace

TEST_CASE("cucumber selection reproduces the expected retained set") {
  const ClassCatalog catalog = cucumber_catalog();
  const auto [r_org, r_hsm] = cucumber_drop_fixture();
  const mining::HardSampleIndex index = index_with_counts(catalog, cucumber_hsm_counts());
  REQUIRE(index.total_images() == 4920);

  const SelectionOutcome outcome = hss_select(r_org, r_hsm, index, 6);
  CHECK(outcome.retained_total == 1310);
  CHECK(outcome.removed_total == 3610);
  CHECK(outcome.retained.class_count("CCYV") == 1003);
  CHECK(outcome.retained.class_count("DM") == 307);  // drop exactly 6 retains
  for (const char* removed : {"CLS", "GM", "MYSV", "MD", "PM"}) {
    CHECK(outcome.retained.class_count(removed) == 0);
  }
  CHECK(outcome.removed_classes == std::vector<std::string>{"CLS", "GM", "MYSV", "MD", "PM"});
}

TEST_CASE("tomato selection removes exactly BW") {
  const ClassCatalog catalog = tomato_catalog();
  const auto [r_org, r_hsm] = tomato_drop_fixture();
  const mining::HardSampleIndex index = index_with_counts(catalog, tomato_hsm_counts());
  REQUIRE(index.total_images() == 3353);

  const SelectionOutcome outcome = hss_select(r_org, r_hsm, index, 6);
  CHECK(outcome.retained_total == 2422);
  CHECK(outcome.retained.class_count("BW") == 0);
  CHECK(outcome.removed_classes == std::vector<std::string>{"BW"});
  CHECK(outcome.retained.class_count("LM") == 349);  // boundary drop = 6 retains
}

TEST_CASE("theta larger than every drop keeps the index unchanged") {
  const ClassCatalog catalog = cucumber_catalog();
  const auto [r_org, r_hsm] = cucumber_drop_fixture();
  const mining::HardSampleIndex index = index_with_counts(catalog, cucumber_hsm_counts());
  const SelectionOutcome outcome = hss_select(r_org, r_hsm, index, 15);
  CHECK(outcome.retained == index);
  CHECK(outcome.removed_classes.empty());
}

TEST_CASE("selection requires recall entries for keyed classes") {
  const ClassCatalog catalog = cucumber_catalog();
  auto [r_org, r_hsm] = cucumber_drop_fixture();
  r_hsm.by_class.erase("MD");
  const mining::HardSampleIndex index = index_with_counts(catalog, cucumber_hsm_counts());
  capture_error(Errc::MissingRecallEntry, [&] { hss_select(r_org, r_hsm, index, 6); });

  // a class absent from the index needs no entry
  auto [r_org2, r_hsm2] = cucumber_drop_fixture();
  r_org2.by_class.erase("GM");
  r_hsm2.by_class.erase("GM");
  const mining::HardSampleIndex no_gm = index_with_counts(
      catalog, {{"CCYV", 10}, {"CLS", 5}, {"DM", 3}, {"MYSV", 2}, {"MD", 9}, {"PM", 4}});
  CHECK_NOTHROW(hss_select(r_org2, r_hsm2, no_gm, 6));
}

TEST_CASE("theta bounds") {
  const ClassCatalog catalog = build_catalog({"A", "B"}, "HE");
  const mining::HardSampleIndex index = index_with_counts(catalog, {{"A", 3}, {"B", 4}});

  RecallTable r_org{"org", {{"A", {90.0, false}}, {"B", {90.0, false}}}};
  RecallTable r_hsm{"hsm", {{"A", {88.0, false}}, {"B", {81.6, false}}}};  // drops 2.0, 8.4
  const ThetaBounds bounds = theta_bounds(r_org, r_hsm, index);
  CHECK(bounds.lower == 3);
  CHECK(bounds.beta == 9);

  // every class improved: degenerate range
  RecallTable improved{"hsm", {{"A", {95.0, false}}, {"B", {99.0, false}}}};
  const ThetaBounds degenerate = theta_bounds(r_org, improved, index);
  CHECK(degenerate.lower == 3);
  CHECK(degenerate.beta == 3);

  capture_error(Errc::EmptyIndex,
                [&] { theta_bounds(r_org, r_hsm, mining::empty_index(catalog)); });
}

TEST_CASE("property: beta is never below the largest drop") {
  Rng rng(1912);
  const ClassCatalog catalog = cucumber_catalog();
  for (int iteration = 0; iteration < 300; ++iteration) {
    const auto [r_org, r_hsm] = random_tables(rng, catalog);
    const mining::HardSampleIndex index = random_index(rng, catalog);
    if (index.total_images() == 0) continue;
    const ThetaBounds bounds = theta_bounds(r_org, r_hsm, index);
    CHECK(bounds.lower == 3);
    for (std::size_t c = 0; c < catalog.num_diseases(); ++c) {
      if (index.per_class[c].empty()) continue;
      const std::string& label = catalog.diseases()[c];
      const double drop = r_org.percent_of(label) - r_hsm.percent_of(label);
      CHECK(static_cast<double>(bounds.beta) >= drop);
    }
  }
}

TEST_CASE("property: selection is monotone, all-or-nothing, idempotent, strict at the boundary") {
  Rng rng(260808);
  const ClassCatalog catalog = tomato_catalog();
  int cases = 0;
  while (cases < 1200) {
    const auto [r_org, r_hsm] = random_tables(rng, catalog);
    const mining::HardSampleIndex index = random_index(rng, catalog);
    const int theta1 = rng.uniform_int(0, 15);
    const int theta2 = theta1 + rng.uniform_int(0, 10);

    const SelectionOutcome narrow = hss_select(r_org, r_hsm, index, theta1);
    const SelectionOutcome wide = hss_select(r_org, r_hsm, index, theta2);

    // monotone: retained(theta1) is a subset of retained(theta2)
    const auto ids1 = retained_ids(narrow.retained);
    const auto ids2 = retained_ids(wide.retained);
    CHECK(std::includes(ids2.begin(), ids2.end(), ids1.begin(), ids1.end()));
    CHECK(narrow.retained_total <= wide.retained_total);

    for (std::size_t c = 0; c < catalog.num_diseases(); ++c) {
      const std::size_t original = index.per_class[c].size();
      const std::size_t kept = narrow.retained.per_class[c].size();
      // all-or-nothing
      CHECK((kept == 0 || kept == original));
      // strict inequality: drop == theta retains, drop > theta removes
      if (original > 0) {
        const std::string& label = catalog.diseases()[c];
        const double drop = r_org.percent_of(label) - r_hsm.percent_of(label);
        if (drop > static_cast<double>(theta1)) {
          CHECK(kept == 0);
        } else {
          CHECK(kept == original);
        }
      }
    }

    // boundary case explicitly: force drop == theta
    {
      RecallTable org_b{"org", {}};
      RecallTable hsm_b{"hsm", {}};
      for (const std::string& label : catalog.diseases()) {
        org_b.by_class.emplace(label, RecallEntry{80.0, false});
        hsm_b.by_class.emplace(label, RecallEntry{80.0 - static_cast<double>(theta1), false});
      }
      const SelectionOutcome boundary = hss_select(org_b, hsm_b, index, theta1);
      CHECK(boundary.retained_total == index.total_images());
    }

    // idempotence: selecting the retained index again changes nothing
    const SelectionOutcome again = hss_select(r_org, r_hsm, narrow.retained, theta1);
    CHECK(again.retained == narrow.retained);

    // outcome partition over the keyed classes
    std::size_t keyed = 0;
    for (const auto& bucket : index.per_class) keyed += bucket.empty() ? 0 : 1;
    std::size_t retained_classes = 0;
    for (const ClassDrop& drop : narrow.drops) retained_classes += drop.removed ? 0 : 1;
    CHECK(narrow.drops.size() == keyed);
    CHECK(retained_classes + narrow.removed_classes.size() == keyed);
    ++cases;
  }
}

TEST_CASE("exhaustive search scores every candidate and picks the argmax") {
  const ClassCatalog catalog = build_catalog({"A"}, "HE");
  const mining::HardSampleIndex index = index_with_counts(catalog, {{"A", 5}});
  RecallTable r_org{"org", {{"A", {90.0, false}}}};
  RecallTable r_hsm{"hsm", {{"A", {81.5, false}}}};  // drop 8.5 -> bounds [3, 9]

  const std::map<int, double> scores = {{3, 70}, {4, 72}, {5, 74}, {6, 79},
                                        {7, 78}, {8, 76}, {9, 75}};
  SelectionConfig config;
  config.search_mode = SearchMode::Exhaustive;
  const SearchResult result =
      search_theta(r_org, r_hsm, index, [&](int theta) { return scores.at(theta); }, config);
  CHECK(result.best_theta == 6);
  CHECK(result.best_score == doctest::Approx(79));
  CHECK(result.trace.size() == 7);
  CHECK(result.lower == 3);
  CHECK(result.beta == 9);
  // theta = 6 keeps nothing here (drop 8.5 > 6): outcome reflects best theta
  CHECK(result.outcome.retained_total == 0);
}

TEST_CASE("degenerate range evaluates once") {
  const ClassCatalog catalog = build_catalog({"A"}, "HE");
  const mining::HardSampleIndex index = index_with_counts(catalog, {{"A", 2}});
  RecallTable r_org{"org", {{"A", {90.0, false}}}};
  RecallTable r_hsm{"hsm", {{"A", {89.0, false}}}};  // drop 1 -> [3, 3]

  int calls = 0;
  SelectionConfig config;
  config.search_mode = SearchMode::Binary;
  const SearchResult result = search_theta(
      r_org, r_hsm, index,
      [&](int theta) {
        ++calls;
        return static_cast<double>(theta);
      },
      config);
  CHECK(result.best_theta == 3);
  CHECK(calls == 1);
  CHECK(result.trace.size() == 1);
}

TEST_CASE("failed evaluations are recorded and skipped") {
  const ClassCatalog catalog = build_catalog({"A"}, "HE");
  const mining::HardSampleIndex index = index_with_counts(catalog, {{"A", 2}});
  RecallTable r_org{"org", {{"A", {90.0, false}}}};
  RecallTable r_hsm{"hsm", {{"A", {83.0, false}}}};  // drop 7 -> [3, 7]

  SelectionConfig config;
  config.search_mode = SearchMode::Exhaustive;
  const SearchResult result = search_theta(
      r_org, r_hsm, index,
      [&](int theta) {
        if (theta == 5) throw std::runtime_error("validation run failed");
        return 100.0 - std::abs(theta - 4);
      },
      config);
  CHECK(result.best_theta == 4);
  bool recorded = false;
  for (const auto& entry : result.trace) {
    if (entry.theta == 5) {
      CHECK(!entry.ok);
      CHECK(entry.note == "validation run failed");
      recorded = true;
    }
  }
  CHECK(recorded);

  capture_error(Errc::EmptyCandidateSet, [&] {
    search_theta(
        r_org, r_hsm, index, [](int) -> double { throw std::runtime_error("always fails"); },
        config);
  });
}

TEST_CASE("property: binary equals exhaustive on strictly unimodal scores") {
  Rng rng(90210);
  const ClassCatalog catalog = build_catalog({"A"}, "HE");
  const mining::HardSampleIndex index = index_with_counts(catalog, {{"A", 3}});

  int cases = 0;
  while (cases < 250) {
    const double drop = rng.uniform(3.5, 25.0);
    RecallTable r_org{"org", {{"A", {95.0, false}}}};
    RecallTable r_hsm{"hsm", {{"A", {95.0 - drop, false}}}};
    const ThetaBounds bounds = theta_bounds(r_org, r_hsm, index);

    // strictly increasing to the peak, strictly decreasing after
    const int peak = rng.uniform_int(bounds.lower, bounds.beta);
    std::map<int, double> scores;
    for (int theta = bounds.lower; theta <= bounds.beta; ++theta) {
      scores[theta] = 100.0 - 3.0 * std::abs(theta - peak) - rng.uniform(0.0, 0.5);
    }
    scores[peak] = 101.0;
    const auto evaluator = [&](int theta) { return scores.at(theta); };

    SelectionConfig exhaustive;
    exhaustive.search_mode = SearchMode::Exhaustive;
    SelectionConfig binary;
    binary.search_mode = SearchMode::Binary;

    const SearchResult base = search_theta(r_org, r_hsm, index, evaluator, exhaustive);
    const SearchResult fast = search_theta(r_org, r_hsm, index, evaluator, binary);
    REQUIRE(base.best_theta == peak);
    REQUIRE(fast.best_theta == peak);
    REQUIRE(fast.best_score == base.best_score);
    // binary mode does at most ~2 log2(n) + 1 evaluations
    CHECK(fast.trace.size() <= base.trace.size());
    ++cases;
  }
}
