// Copyright (c) 2026 remine contributors
//
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace remine {

enum class Errc {
  // file / input parsing
  IoError,
  SyntaxError,
  SchemaError,
  UnknownLabel,
  UnknownImageId,
  DuplicateImageLine,
  InvalidConfig,
  // domain contracts
  DuplicateLabel,
  HealthyCollision,
  DuplicateImageId,
  BoxOutOfBounds,
  HealthyWithAnnotations,
  LabelMismatch,
  CoverageMismatch,
  MissingGateVerdict,
  NonHealthyInput,
  MissingRecallEntry,
  EmptyIndex,
  EmptyCandidateSet,
  EvaluatorFailure,
  EmptyMatrix,
  IdCollision,
  TagMismatch,
  InvalidProfile,
  InvalidDegradation,
  NonNormalizableBox,
};

const char* errc_name(Errc code);

struct Issue {
  Errc code;
  std::string message;
  std::optional<std::size_t> line;  // 1-based line in the offending file, when known

  std::string to_string() const;
};

/// Carries every issue found in one validation pass, not just the first.
class Error : public std::runtime_error {
 public:
  Error(Errc code, std::string message, std::optional<std::size_t> line = std::nullopt);
  explicit Error(std::vector<Issue> issues);

  Errc code() const { return issues_.front().code; }
  const std::vector<Issue>& issues() const { return issues_; }

 private:
  static std::string join(const std::vector<Issue>& issues);
  std::vector<Issue> issues_;
};

}  // namespace remine
