//
// MolChord desk pipeline - Copyright 2026 The MolChord Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molchord/error.h"

namespace molchord {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
  case Errc::kEmptyInput:
    return "EmptyInput";
  case Errc::kInputTooLong:
    return "InputTooLong";
  case Errc::kSyntaxError:
    return "SyntaxError";
  case Errc::kUnclosedBranch:
    return "UnclosedBranch";
  case Errc::kUnmatchedRingBond:
    return "UnmatchedRingBond";
  case Errc::kUnknownElement:
    return "UnknownElement";
  case Errc::kValenceViolation:
    return "ValenceViolation";
  case Errc::kWidthMismatch:
    return "WidthMismatch";
  case Errc::kTooFewItems:
    return "TooFewItems";
  case Errc::kOutOfRange:
    return "OutOfRange";
  case Errc::kMissingReference:
    return "MissingReference";
  case Errc::kScoreCoverageGap:
    return "ScoreCoverageGap";
  case Errc::kTooFewGenerations:
    return "TooFewGenerations";
  case Errc::kUnlabeledPocket:
    return "UnlabeledPocket";
  case Errc::kEmptyGroup:
    return "EmptyGroup";
  case Errc::kDuplicatePocketId:
    return "DuplicatePocketId";
  case Errc::kTooFewCandidates:
    return "TooFewCandidates";
  case Errc::kDegeneratePool:
    return "DegeneratePool";
  case Errc::kShapeMismatch:
    return "ShapeMismatch";
  case Errc::kUnknownTemplate:
    return "UnknownTemplate";
  case Errc::kTokenOutOfVocab:
    return "TokenOutOfVocab";
  case Errc::kCorruptCheckpoint:
    return "CorruptCheckpoint";
  case Errc::kEmptyBatch:
    return "EmptyBatch";
  case Errc::kMalformedSequence:
    return "MalformedSequence";
  case Errc::kNonDeterministicLoss:
    return "NonDeterministicLoss";
  case Errc::kMalformedLine:
    return "MalformedLine";
  case Errc::kSchemaViolation:
    return "SchemaViolation";
  case Errc::kDuplicateKey:
    return "DuplicateKey";
  case Errc::kTimeout:
    return "Timeout";
  case Errc::kNonZeroExit:
    return "NonZeroExit";
  case Errc::kUnparseableOutput:
    return "UnparseableOutput";
  case Errc::kConflictingScore:
    return "ConflictingScore";
  case Errc::kIoError:
    return "IoError";
  case Errc::kMissingArtifact:
    return "MissingArtifact";
  case Errc::kRetryCapExceeded:
    return "RetryCapExceeded";
  case Errc::kInvalidConfig:
    return "InvalidConfig";
  }
  return "Unknown";
}

}  // namespace molchord
