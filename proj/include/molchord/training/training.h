//
// MolChord desk pipeline - Copyright 2026 The MolChord Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLCHORD_TRAINING_TRAINING_H_
#define MOLCHORD_TRAINING_TRAINING_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "molchord/genmodel/checkpoint.h"
#include "molchord/genmodel/model.h"

namespace molchord {

inline constexpr double kDefaultBetaVae = 0.1;
inline constexpr double kDefaultBetaDpo = 0.1;
inline constexpr double kDefaultSftLearningRate = 1e-3;
inline constexpr double kDefaultDpoLearningRate = 1e-4;
inline constexpr double kDefaultClipNorm = 5.0;
inline constexpr double kValidationFraction = 0.05;
inline constexpr int kDefaultDpoBatch = 8;

enum class OptimizerKind {
  kSgd,
  kAdam,
};

struct TrainConfig {
  double learning_rate = kDefaultSftLearningRate;
  int batch_size = 8;
  // Optimizer steps; when 0, `epochs` passes over the training set.
  int steps = 0;
  int epochs = 1;
  double beta_vae = kDefaultBetaVae;
  double beta_dpo = kDefaultBetaDpo;
  std::uint64_t seed = 0;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  // Global gradient-norm clip; <= 0 disables clipping.
  double clip_norm = kDefaultClipNorm;
  double val_fraction = kValidationFraction;
  // Validation cadence in steps (the last step is always evaluated).
  int eval_every = 100;
  int jobs = 1;
};

// One pocket-ligand pair for Stage B.
struct SftExample {
  std::shared_ptr<const PocketFeatures> features;
  std::string smiles;
  std::vector<int> tokens;      // SMILES tokens, no BOS/EOS
  std::vector<double> complex;  // VAE input
  std::string template_id;
};

SftExample make_sft_example(std::shared_ptr<const PocketFeatures> features,
                            const std::string &smiles,
                            std::string template_id,
                            const Vocabulary &vocab = Vocabulary::standard());

// One preference pair with its VAE noise recorded once.
struct DpoExample {
  std::shared_ptr<const PocketFeatures> features;
  std::string template_id;
  std::vector<int> chosen;
  std::vector<int> rejected;
  std::vector<double> complex;  // pocket plus reference ligand
  std::vector<double> z;        // shared by policy and reference
};

// 0.5 * sum(mu^2 + exp(lv) - lv - 1)
double kl_gaussian(std::span<const double> mu, std::span<const double> log_var);
void kl_gaussian_grad(std::span<const double> mu,
                      std::span<const double> log_var, std::span<double> d_mu,
                      std::span<double> d_log_var);

// Mean masked NLL with epsilon fixed at zero. Only adapter gradients are
// written; other blocks of `grad` are left at zero.
double alignment_loss(const ModelParams &params,
                      std::span<const InterleavedSequence> batch,
                      ModelParams *grad = nullptr);

// Mean over the batch of NLL + beta_vae * KL with the recorded z values.
double sft_loss(const ModelParams &params, std::span<const SftExample> batch,
                std::span<const std::vector<double>> z, double beta_vae,
                ModelParams *grad = nullptr, int jobs = 1);

// Draws z for every example from rng, then evaluates as above.
double sft_loss(const ModelParams &params, std::span<const SftExample> batch,
                Rng &rng, double beta_vae, ModelParams *grad = nullptr,
                int jobs = 1);

struct DpoTerms {
  double loss = 0;
  double margin = 0;  // beta * (policy log-ratio difference)
  double kl = 0;
};

DpoTerms dpo_loss(const ModelParams &params, const ModelParams &ref_params,
                  const DpoExample &pair, double beta_dpo, double beta_vae,
                  ModelParams *grad = nullptr);

// Frozen-reference log-probs of one pair under its recorded noise.
struct ReferenceLogprobs {
  double chosen = 0;
  double rejected = 0;
};

ReferenceLogprobs reference_logprobs(const ModelParams &ref_params,
                                     const DpoExample &pair);

// Same as above with the reference side precomputed.
DpoTerms dpo_loss(const ModelParams &params, const ReferenceLogprobs &ref,
                  const DpoExample &pair, double beta_dpo, double beta_vae,
                  ModelParams *grad = nullptr);

// Batch mean of dpo_loss terms.
DpoTerms dpo_batch_loss(const ModelParams &params,
                        const ModelParams &ref_params,
                        std::span<const DpoExample> batch, double beta_dpo,
                        double beta_vae, ModelParams *grad = nullptr,
                        int jobs = 1);

// -log(sigmoid(x)), stable for large |x|.
double log1p_exp_neg(double x);

using LossThunk = std::function<double(const ModelParams &, ModelParams *)>;

struct GradCheckOptions {
  double epsilon = 1e-5;
  // Restricts checks to elements with mask != 0 when non-empty.
  std::vector<char> mask;
  // Above this many candidates a random 1% subsample is checked.
  std::size_t full_limit = 10000;
  std::uint64_t seed = 0;
};

struct GradCheckResult {
  double max_rel_error = 0;
  std::size_t checked = 0;
  std::size_t worst_index = 0;
};

// Central differences against the analytic gradient; relative error is
// |a - n| / max(1, |a|, |n|). Throws NonDeterministicLoss when two
// evaluations at the same point differ.
GradCheckResult grad_check(const LossThunk &loss, const ModelParams &params,
                           const GradCheckOptions &opts = {});

class Optimizer {
public:
  Optimizer(const TrainConfig &config, std::size_t size);

  // Applies one update to the elements selected by mask (all when empty).
  // Returns the gradient norm before clipping.
  double step(ModelParams &params, ModelParams &grad,
              const std::vector<char> &mask);

private:
  TrainConfig config_;
  std::vector<double> m_, v_;
  std::int64_t t_ = 0;
};

// Deterministic split by pocket hash.
bool is_validation_pocket(const std::string &pocket_id, double fraction);

// Splits examples into (train, validation) by pocket hash. If every pocket
// hashes into validation, everything trains and validation is empty.
std::pair<std::vector<SftExample>, std::vector<SftExample>>
split_validation(const std::vector<SftExample> &examples, double fraction);

// sft_loss over the validation set with noise derived from `seed` per
// example index, so the value is reproducible from a reloaded checkpoint.
double sft_validation_loss(const ModelParams &params,
                           const std::vector<SftExample> &val,
                           std::uint64_t seed, double beta_vae, int jobs = 1);

struct CurvePoint {
  std::int64_t step = 0;
  double loss = 0;
  std::optional<double> val_loss;
  std::optional<double> margin;
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<CurvePoint> curve;
};

// Stage B. The checkpoint with the lowest validation loss is returned. Throws
// EmptyBatch on an empty dataset.
TrainResult train_sft(const std::vector<SftExample> &examples,
                      const ModelParams &init, const TrainConfig &config);

// Stage C. The reference is a frozen copy of `sft`. The curve records the
// mean implied margin of every step.
TrainResult train_dpo(const std::vector<DpoExample> &pairs,
                      const ModelParams &sft, const TrainConfig &config);

// beta * [(log pi(M+) - log ref(M+)) - (log pi(M-) - log ref(M-))]
double implied_margin(const ModelParams &params, const ModelParams &ref,
                      const DpoExample &pair, double beta_dpo);

}  // namespace molchord

#endif  // MOLCHORD_TRAINING_TRAINING_H_
