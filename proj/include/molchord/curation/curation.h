//
// MolChord desk pipeline - Copyright 2026 The MolChord Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLCHORD_CURATION_CURATION_H_
#define MOLCHORD_CURATION_CURATION_H_

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "molchord/metrics/metrics.h"

namespace molchord {

inline constexpr double kDefaultRewardLambda = 0.5;
inline constexpr double kDefaultDiversityThreshold = 0.8;
inline constexpr int kDefaultCandidateCount = 100;
inline constexpr int kOnlineCandidateCount = 32;
inline constexpr int kOnlineDockedCount = 5;
// A pocket with more distinct ligands than this goes to the SFT pool.
inline constexpr int kSftLigandThreshold = 2;

struct ComplexRecord {
  std::string pocket_id;
  std::vector<std::string> ligand_smiles;
  std::optional<double> reference_vina;
  std::optional<std::string> pocket_sequence;
  Homology homology = Homology::kUnknown;
};

struct Partition {
  std::vector<std::string> sft_pool;  // sorted pocket ids
  std::vector<std::string> dpo_pool;  // sorted pocket ids
};

struct PreferencePair {
  std::string pocket_id;
  std::string chosen;
  std::string rejected;
  double reward_chosen = 0;
  double reward_rejected = 0;
};

struct ScoredCandidate {
  std::string smiles;  // canonical
  double vina = 0;
  int fused_count = 0;
};

struct FilterDecision {
  bool keep = false;
  double diversity = 0;
};

// Counts distinct canonical ligands per pocket. Throws DuplicatePocketId.
int distinct_ligand_count(const ComplexRecord &record);
Partition partition_dataset(const std::vector<ComplexRecord> &records);

FilterDecision diversity_filter(const std::vector<std::string> &candidates,
                                double threshold = kDefaultDiversityThreshold);

double reward(double vina, int fused_count,
              double lambda = kDefaultRewardLambda);

// Repeated SMILES collapse to one entry and must carry identical scores
// (ConflictingScore otherwise). Ties on reward go to the
// lexicographically smaller SMILES on both ends.
PreferencePair
build_preference_pairs(const std::string &pocket_id,
                       const std::vector<ScoredCandidate> &scored,
                       double lambda = kDefaultRewardLambda);

// First `count` candidates in sampling order that parse, canonicalized.
std::vector<std::string>
select_for_docking(const std::vector<std::string> &candidates,
                   int count = kOnlineDockedCount);

// Returns raw candidate strings for a pocket.
using Sampler = std::function<std::vector<std::string>(
    const std::string &pocket_id, int n_samples)>;

struct CurationAudit {
  std::string pocket_id;
  int valid = 0;
  std::optional<double> diversity;
  bool kept = false;
  std::string reason;  // empty when kept
};

struct CurationResult {
  std::vector<std::string> selected;  // D_DPO, in pocket order
  std::vector<CurationAudit> audit;   // one row per input pocket
};

struct CurationOptions {
  int n_samples = kDefaultCandidateCount;
  double threshold = kDefaultDiversityThreshold;
  int jobs = 1;
  // When set, the sampler is called from one thread only.
  bool serial_sampler = false;
};

CurationResult curate_dpo_set(const std::vector<std::string> &pockets,
                              const Sampler &sampler,
                              const CurationOptions &opts = {});

}  // namespace molchord

#endif  // MOLCHORD_CURATION_CURATION_H_
