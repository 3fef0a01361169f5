// Copyright (c) 2026 remine contributors
//
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "remine/core.hpp"
#include "remine/mining.hpp"

namespace remine::selection {

enum class SearchMode { Exhaustive, Binary };

const char* search_mode_name(SearchMode mode);

struct SelectionConfig {
  int theta = 6;        // recall-drop threshold, percentage points
  int search_lower = 3;
  SearchMode search_mode = SearchMode::Exhaustive;
};

struct ClassDrop {
  std::string label;
  double r_org = 0.0;
  double r_hsm = 0.0;
  double drop = 0.0;  // r_org - r_hsm, percentage points, full precision
  std::size_t images = 0;
  bool removed = false;
};

struct SelectionOutcome {
  mining::HardSampleIndex retained;
  std::vector<ClassDrop> drops;  // classes keyed in the input index, catalog order
  std::vector<std::string> removed_classes;
  std::size_t retained_total = 0;
  std::size_t removed_total = 0;
};

/// Removes all hard-sample images of every index class whose recall dropped
/// strictly more than theta between the two model generations. All-or-nothing
/// per class; equality retains. Classes absent from the index are untouched.
SelectionOutcome hss_select(const RecallTable& r_org, const RecallTable& r_hsm,
                            const mining::HardSampleIndex& index, int theta);

struct ThetaBounds {
  int lower = 3;
  int beta = 3;
};

/// lower is the configured floor; beta is the maximum recall drop over the
/// classes keyed in the index, ceiling-rounded. When every drop is at or
/// below the floor the range degenerates to [lower, lower].
ThetaBounds theta_bounds(const RecallTable& r_org, const RecallTable& r_hsm,
                         const mining::HardSampleIndex& index, int search_lower = 3);

struct ThetaEvaluation {
  int theta = 0;
  double score = 0.0;
  bool ok = false;
  std::string note;  // failure reason when !ok
};

struct SearchResult {
  int best_theta = 0;
  double best_score = 0.0;
  SelectionOutcome outcome;
  std::vector<ThetaEvaluation> trace;  // every evaluator call, call order
  SearchMode mode = SearchMode::Exhaustive;
  int lower = 0;
  int beta = 0;
  std::string assumption;  // set in binary mode, which presumes unimodal scores
};

/// Validation score for one candidate theta. Must be deterministic for a
/// fixed theta within one search run.
using ThetaEvaluator = std::function<double(int theta)>;

/// Candidates are the integers in [lower, beta]. Exhaustive mode scores all
/// of them and returns the argmax; binary mode compares midpoint against
/// midpoint+1 and recurses toward the larger score, which assumes a unimodal
/// score curve. Ties break toward smaller theta. Failed evaluations are
/// recorded in the trace and skipped.
SearchResult search_theta(const RecallTable& r_org, const RecallTable& r_hsm,
                          const mining::HardSampleIndex& index, const ThetaEvaluator& evaluator,
                          const SelectionConfig& config);

}  // namespace remine::selection
