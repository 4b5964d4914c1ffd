//
// MolChord desk pipeline - Copyright 2026 The MolChord Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLCHORD_SCORERS_RECORDS_H_
#define MOLCHORD_SCORERS_RECORDS_H_

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "molchord/curation/curation.h"

namespace molchord {

// One docking/property score per (pocket_id, canonical smiles).
struct ScoreRecord {
  std::string pocket_id;
  std::string smiles;  // canonical
  double vina = 0;
  std::optional<double> qed;
  std::optional<double> sa_origin;
  // Spelling found in the file when it differs from the canonical form.
  std::optional<std::string> raw_smiles;

  bool operator==(const ScoreRecord &) const = default;
};

struct GenerationRecord {
  std::string pocket_id;
  std::string smiles;  // canonical
  std::optional<double> logprob;
  std::optional<std::string> raw_smiles;

  bool operator==(const GenerationRecord &) const = default;
};

// Files hold one JSON object per line; blank lines are skipped. SMILES are
// canonicalized while loading. Every error message starts with
// "<source>:<line>:".
//
// complexes: pocket_id unique; ligand_smiles canonicalized in file order.
std::vector<ComplexRecord> parse_complexes(std::string_view text,
                                           std::string_view source = "<text>");
// scores: (pocket_id, smiles) unique; vina finite.
std::vector<ScoreRecord> parse_scores(std::string_view text,
                                      std::string_view source = "<text>");
std::vector<PreferencePair> parse_pairs(std::string_view text,
                                        std::string_view source = "<text>");
std::vector<GenerationRecord>
parse_generations(std::string_view text, std::string_view source = "<text>");

std::vector<ComplexRecord> load_complexes(const std::filesystem::path &path);
std::vector<ScoreRecord> load_scores(const std::filesystem::path &path);
std::vector<PreferencePair> load_pairs(const std::filesystem::path &path);
std::vector<GenerationRecord>
load_generations(const std::filesystem::path &path);

// Fixed key order, shortest round-trip numbers, one record per line.
std::string serialize_complexes(const std::vector<ComplexRecord> &records);
std::string serialize_scores(const std::vector<ScoreRecord> &records);
std::string serialize_pairs(const std::vector<PreferencePair> &records);
std::string serialize_generations(const std::vector<GenerationRecord> &records);

struct CoverageReport {
  std::vector<GenerationRecord> covered;
  std::vector<GenerationRecord> missing;  // generation order
};

// Matches generations to scores on (pocket_id, canonical smiles).
CoverageReport coverage_check(const std::vector<GenerationRecord> &generations,
                              const std::vector<ScoreRecord> &scores);

}  // namespace molchord

#endif  // MOLCHORD_SCORERS_RECORDS_H_
