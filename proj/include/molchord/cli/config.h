//
// MolChord desk pipeline - Copyright 2026 The MolChord Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLCHORD_CLI_CONFIG_H_
#define MOLCHORD_CLI_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "molchord/curation/curation.h"
#include "molchord/genmodel/model.h"
#include "molchord/scorers/dock.h"
#include "molchord/training/training.h"

namespace molchord {

inline constexpr int kDefaultTopK = 10;
inline constexpr int kDefaultEvalSamples = 100;
inline constexpr int kDefaultRetryCap = 1000;

enum class CurationFlow {
  kOffline,  // all candidates of the diversity pass are scored
  kOnline,   // fresh candidates, the first valid few are scored
};

struct RunConfig {
  struct Paths {
    std::filesystem::path complexes;
    // Pockets used by sample/dock/evaluate; defaults to `complexes`.
    std::filesystem::path eval_complexes;
    // Externally produced scores; when empty evaluate reads the dock output.
    std::filesystem::path scores;
    std::filesystem::path out = "run";
  } paths;

  ModelConfig model;

  struct Train {
    double sft_learning_rate = kDefaultSftLearningRate;
    double dpo_learning_rate = kDefaultDpoLearningRate;
    int batch_size = 8;
    int dpo_batch_size = kDefaultDpoBatch;
    int sft_steps = 0;
    int sft_epochs = 1;
    int dpo_epochs = 1;
    double beta_vae = kDefaultBetaVae;
    double beta_dpo = kDefaultBetaDpo;
    double clip_norm = kDefaultClipNorm;
    double val_fraction = kValidationFraction;
    int eval_every = 100;
    OptimizerKind optimizer = OptimizerKind::kAdam;
  } train;

  struct Sample {
    double temperature = kDefaultTemperature;
    double top_p = kDefaultTopP;
    int max_len = kDefaultMaxLen;
    int n_eval = kDefaultEvalSamples;
    // Extra draws allowed per pocket beyond n_eval.
    int retry_cap = kDefaultRetryCap;
    std::string template_id = std::string(kDefaultTemplate);
    // "sft" or "dpo".
    std::string model = "dpo";
  } sample;

  struct Curate {
    CurationFlow flow = CurationFlow::kOffline;
    int n_candidates = kDefaultCandidateCount;
    int online_candidates = kOnlineCandidateCount;
    int online_docked = kOnlineDockedCount;
    double diversity_threshold = kDefaultDiversityThreshold;
    double lambda = kDefaultRewardLambda;
  } curate;

  int top_k = kDefaultTopK;

  DockCommand dock;
  // Directory holding per-pocket files substituted for {pocket_file}.
  std::filesystem::path pocket_dir;

  std::uint64_t seed = 0;
  int jobs = 1;
};

// Reads a sectioned key = value file. Relative paths resolve against the
// file's directory. Unknown sections or keys throw InvalidConfig.
RunConfig load_run_config(const std::filesystem::path &file);

// Range checks; throws InvalidConfig.
void validate_run_config(const RunConfig &config);

// Canonical text of every setting except paths, one "section.key=value"
// line each. Hashing it identifies a run independent of where it lives.
std::string config_fingerprint(const RunConfig &config);
std::string config_hash(const RunConfig &config);

TrainConfig sft_train_config(const RunConfig &config);
TrainConfig dpo_train_config(const RunConfig &config);
SampleOptions sample_options(const RunConfig &config);

}  // namespace molchord

#endif  // MOLCHORD_CLI_CONFIG_H_
