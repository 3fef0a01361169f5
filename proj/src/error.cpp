// Copyright (c) 2026 remine contributors
//
// SPDX-License-Identifier: Apache-2.0
//

#include "remine/error.hpp"

namespace remine {

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::IoError: return "IoError";
    case Errc::SyntaxError: return "SyntaxError";
    case Errc::SchemaError: return "SchemaError";
    case Errc::UnknownLabel: return "UnknownLabel";
    case Errc::UnknownImageId: return "UnknownImageId";
    case Errc::DuplicateImageLine: return "DuplicateImageLine";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::DuplicateLabel: return "DuplicateLabel";
    case Errc::HealthyCollision: return "HealthyCollision";
    case Errc::DuplicateImageId: return "DuplicateImageId";
    case Errc::BoxOutOfBounds: return "BoxOutOfBounds";
    case Errc::HealthyWithAnnotations: return "HealthyWithAnnotations";
    case Errc::LabelMismatch: return "LabelMismatch";
    case Errc::CoverageMismatch: return "CoverageMismatch";
    case Errc::MissingGateVerdict: return "MissingGateVerdict";
    case Errc::NonHealthyInput: return "NonHealthyInput";
    case Errc::MissingRecallEntry: return "MissingRecallEntry";
    case Errc::EmptyIndex: return "EmptyIndex";
    case Errc::EmptyCandidateSet: return "EmptyCandidateSet";
    case Errc::EvaluatorFailure: return "EvaluatorFailure";
    case Errc::EmptyMatrix: return "EmptyMatrix";
    case Errc::IdCollision: return "IdCollision";
    case Errc::TagMismatch: return "TagMismatch";
    case Errc::InvalidProfile: return "InvalidProfile";
    case Errc::InvalidDegradation: return "InvalidDegradation";
    case Errc::NonNormalizableBox: return "NonNormalizableBox";
  }
  return "UnknownError";
}

std::string Issue::to_string() const {
  std::string text = errc_name(code);
  if (line) {
    text += " (line ";
    text += std::to_string(*line);
    text += ")";
  }
  text += ": ";
  text += message;
  return text;
}

Error::Error(Errc code, std::string message, std::optional<std::size_t> line)
    : Error(std::vector<Issue>{Issue{code, std::move(message), line}}) {}

Error::Error(std::vector<Issue> issues)
    : std::runtime_error(join(issues)), issues_(std::move(issues)) {}

std::string Error::join(const std::vector<Issue>& issues) {
  std::string text;
  for (std::size_t i = 0; i < issues.size(); ++i) {
    if (i > 0) text += "\n";
    text += issues[i].to_string();
  }
  if (issues.empty()) text = "unknown error";
  return text;
}

}  // namespace remine
