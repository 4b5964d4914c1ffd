//
// MolChord desk pipeline - Copyright 2026 The MolChord Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLCHORD_ERROR_H_
#define MOLCHORD_ERROR_H_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace molchord {

enum class Errc {
  // molgraph
  kEmptyInput,
  kInputTooLong,
  kSyntaxError,
  kUnclosedBranch,
  kUnmatchedRingBond,
  kUnknownElement,
  kValenceViolation,
  kWidthMismatch,
  // metrics
  kTooFewItems,
  kOutOfRange,
  kMissingReference,
  kScoreCoverageGap,
  kTooFewGenerations,
  kUnlabeledPocket,
  kEmptyGroup,
  // curation
  kDuplicatePocketId,
  kTooFewCandidates,
  kDegeneratePool,
  // genmodel
  kShapeMismatch,
  kUnknownTemplate,
  kTokenOutOfVocab,
  kCorruptCheckpoint,
  // training
  kEmptyBatch,
  kMalformedSequence,
  kNonDeterministicLoss,
  // scorers
  kMalformedLine,
  kSchemaViolation,
  kDuplicateKey,
  kTimeout,
  kNonZeroExit,
  kUnparseableOutput,
  kConflictingScore,
  kIoError,
  // cli
  kMissingArtifact,
  kRetryCapExceeded,
  kInvalidConfig,
};

std::string_view errc_name(Errc code) noexcept;

class Error: public std::runtime_error {
public:
  Error(Errc code, const std::string &what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what),
        code_(code) { }

  Errc code() const noexcept { return code_; }

private:
  Errc code_;
};

// Parse failures carry the byte offset into the SMILES text.
class SmilesError: public Error {
public:
  SmilesError(Errc code, std::size_t offset, const std::string &what)
      : Error(code, what + " (at offset " + std::to_string(offset) + ")"),
        offset_(offset) { }

  std::size_t offset() const noexcept { return offset_; }

private:
  std::size_t offset_;
};

}  // namespace molchord

#endif  // MOLCHORD_ERROR_H_
