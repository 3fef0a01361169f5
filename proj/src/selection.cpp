// Copyright (c) 2026 remine contributors
//
// SPDX-License-Identifier: Apache-2.0
//

#include "remine/selection.hpp"

#include <cmath>
#include <limits>
#include <map>

namespace remine::selection {

namespace {

// Drop table over the classes keyed in the index, catalog order. Both recall
// tables must cover every keyed class.
std::vector<ClassDrop> drop_table(const RecallTable& r_org, const RecallTable& r_hsm,
                                  const mining::HardSampleIndex& index) {
  std::vector<ClassDrop> drops;
  for (std::size_t c = 0; c < index.catalog.num_diseases(); ++c) {
    if (index.per_class[c].empty()) continue;
    const std::string& label = index.catalog.diseases()[c];
    ClassDrop drop;
    drop.label = label;
    drop.r_org = r_org.percent_of(label);
    drop.r_hsm = r_hsm.percent_of(label);
    drop.drop = drop.r_org - drop.r_hsm;
    drop.images = index.per_class[c].size();
    drops.push_back(std::move(drop));
  }
  return drops;
}

}  // namespace

const char* search_mode_name(SearchMode mode) {
  return mode == SearchMode::Binary ? "binary" : "exhaustive";
}

SelectionOutcome hss_select(const RecallTable& r_org, const RecallTable& r_hsm,
                            const mining::HardSampleIndex& index, int theta) {
  SelectionOutcome outcome;
  outcome.drops = drop_table(r_org, r_hsm, index);
  outcome.retained = index;

  for (ClassDrop& drop : outcome.drops) {
    if (drop.drop > static_cast<double>(theta)) {
      drop.removed = true;
      outcome.removed_classes.push_back(drop.label);
      outcome.removed_total += drop.images;
      outcome.retained.per_class[index.catalog.require_index(drop.label)].clear();
    } else {
      outcome.retained_total += drop.images;
    }
  }
  return outcome;
}

ThetaBounds theta_bounds(const RecallTable& r_org, const RecallTable& r_hsm,
                         const mining::HardSampleIndex& index, int search_lower) {
  if (index.total_images() == 0) {
    throw Error(Errc::EmptyIndex, "theta bounds need at least one hard-sample class");
  }
  double max_drop = -std::numeric_limits<double>::infinity();
  for (const ClassDrop& drop : drop_table(r_org, r_hsm, index)) {
    max_drop = std::max(max_drop, drop.drop);
  }

  ThetaBounds bounds;
  bounds.lower = search_lower;
  bounds.beta = max_drop <= static_cast<double>(search_lower)
                    ? search_lower
                    : static_cast<int>(std::ceil(max_drop));
  return bounds;
}

SearchResult search_theta(const RecallTable& r_org, const RecallTable& r_hsm,
                          const mining::HardSampleIndex& index, const ThetaEvaluator& evaluator,
                          const SelectionConfig& config) {
  const ThetaBounds bounds = theta_bounds(r_org, r_hsm, index, config.search_lower);

  SearchResult result;
  result.mode = config.search_mode;
  result.lower = bounds.lower;
  result.beta = bounds.beta;

  constexpr double kFailed = -std::numeric_limits<double>::infinity();
  std::map<int, double> memo;  // the evaluator is deterministic within one run
  auto evaluate = [&](int theta) -> double {
    auto it = memo.find(theta);
    if (it != memo.end()) return it->second;
    ThetaEvaluation evaluation;
    evaluation.theta = theta;
    try {
      evaluation.score = evaluator(theta);
      evaluation.ok = true;
    } catch (const std::exception& e) {
      evaluation.score = kFailed;
      evaluation.ok = false;
      evaluation.note = e.what();
    }
    result.trace.push_back(evaluation);
    memo.emplace(theta, evaluation.score);
    return evaluation.score;
  };

  if (config.search_mode == SearchMode::Exhaustive) {
    for (int theta = bounds.lower; theta <= bounds.beta; ++theta) evaluate(theta);
  } else {
    result.assumption = "binary mode assumes the score curve is unimodal over theta";
    // Midpoint vs midpoint+1; ties move left, so equal scores settle on the
    // smaller theta. Exact argmax when the score curve is unimodal.
    int lo = bounds.lower;
    int hi = bounds.beta;
    while (lo < hi) {
      const int mid = lo + (hi - lo) / 2;
      if (evaluate(mid) >= evaluate(mid + 1)) {
        hi = mid;
      } else {
        lo = mid + 1;
      }
    }
    evaluate(lo);
  }

  bool found = false;
  for (const auto& [theta, score] : memo) {
    if (score == kFailed) continue;
    if (!found || score > result.best_score) {
      result.best_theta = theta;
      result.best_score = score;
      found = true;
    }
  }
  if (!found) {
    throw Error(Errc::EmptyCandidateSet,
                "no candidate theta in [" + std::to_string(bounds.lower) + ", " +
                    std::to_string(bounds.beta) + "] evaluated successfully");
  }

  result.outcome = hss_select(r_org, r_hsm, index, result.best_theta);
  return result;
}

}  // namespace remine::selection
