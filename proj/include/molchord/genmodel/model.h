//
// MolChord desk pipeline - Copyright 2026 The MolChord Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLCHORD_GENMODEL_MODEL_H_
#define MOLCHORD_GENMODEL_MODEL_H_

#include <array>
#include <cstdint>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "molchord/curation/curation.h"
#include "molchord/genmodel/templates.h"
#include "molchord/genmodel/vocabulary.h"
#include "molchord/molgraph/molecule.h"
#include "molchord/util/rng.h"

namespace molchord {

inline constexpr double kDefaultTemperature = 1.5;
inline constexpr double kDefaultTopP = 0.95;
inline constexpr int kDefaultMaxLen = 256;
// Structural vectors generated for pockets without a residue sequence.
inline constexpr int kPseudoResidues = 8;

struct ModelConfig {
  int d = 64;               // token / adapter-output width
  int d_feat = 64;          // structural feature width
  int adapter_hidden = 64;  // gated-MLP inner width
  int hidden = 64;          // LM dense-layer width
  int window = 8;           // LM context length k
  int vocab_size = Vocabulary::standard().size();

  int lm_input() const { return window * d + d + d_feat; }
  bool operator==(const ModelConfig &) const = default;
};

enum class ParamBlock {
  kTokenEmbedding,  // V x d
  kGate,            // A x F
  kGateBias,        // A
  kUp,              // A x F
  kDown,            // d x A
  kMu,              // F x 2F
  kMuBias,          // F
  kLogVar,          // F x 2F
  kLogVarBias,      // F
  kW1,              // H x (k d + d + F)
  kB1,              // H
  kW2,              // H x H
  kB2,              // H
  kWo,              // V x H
  kBo,              // V
};
inline constexpr int kNumParamBlocks = 15;

enum class ParamGroup {
  kEmbedding,
  kAdapter,
  kVae,
  kLm,
};

// Flat parameter store. Each block is a row-major matrix (vectors have one
// column) at a fixed offset, so gradients and optimizer state share the
// layout.
class ModelParams {
public:
  struct Shape {
    int rows = 0;
    int cols = 0;
  };

  ModelParams() = default;
  explicit ModelParams(const ModelConfig &config);

  const ModelConfig &config() const noexcept { return config_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::vector<double> &values() noexcept { return values_; }
  const std::vector<double> &values() const noexcept { return values_; }

  Shape shape(ParamBlock b) const { return shapes_[index(b)]; }
  std::size_t offset(ParamBlock b) const { return offsets_[index(b)]; }
  std::span<double> block(ParamBlock b);
  std::span<const double> block(ParamBlock b) const;

  static std::string_view block_name(ParamBlock b);
  static ParamGroup group(ParamBlock b);

  // 1 for every element in one of `groups`, else 0.
  std::vector<char> mask(std::initializer_list<ParamGroup> groups) const;

  ModelParams zeros_like() const;
  bool all_finite() const;

private:
  static int index(ParamBlock b) { return static_cast<int>(b); }

  ModelConfig config_;
  std::vector<double> values_;
  std::array<Shape, kNumParamBlocks> shapes_ {};
  std::array<std::size_t, kNumParamBlocks> offsets_ {};
};

// Small random weights; VAE projections start near zero so early training
// sees unit-variance noise.
void init_params(ModelParams &params, std::uint64_t seed);

struct PocketFeatures {
  std::string pocket_id;
  std::vector<std::vector<double>> vectors;  // N_tok x d_feat
  std::vector<double> pooled;                // mean of vectors

  int num_tokens() const { return static_cast<int>(vectors.size()); }
};

PocketFeatures make_features(std::string pocket_id,
                             std::vector<std::vector<double>> vectors);

// Frozen stand-in for the structure encoder. Residue sequences map through
// a fixed random projection of one-hot and positional features; pockets
// without a sequence get pseudo-random vectors keyed by (pocket_id, seed).
PocketFeatures featurize_pocket(const ComplexRecord &record, int d_feat,
                                std::uint64_t seed);

// Morgan bits folded into d_feat bins and scaled by 1/sqrt(popcount).
std::vector<double> ligand_features(const Molecule &mol, int d_feat);

// [pooled pocket features || ligand features], the VAE input.
std::vector<double> complex_features(const PocketFeatures &pocket,
                                     const std::vector<double> &ligand);

// u = Down(sigmoid(Gate x + b) * Up x)
std::vector<double> adapter_apply(const ModelParams &params,
                                  std::span<const double> x);
std::vector<std::vector<double>> adapter_forward(const PocketFeatures &f,
                                                 const ModelParams &params);

struct Epsilon {
  std::vector<double> mu;
  std::vector<double> log_var;
  std::vector<double> z;
  std::vector<double> sample;
};

enum class VaeMode {
  kTrain,
  kInfer,
};

// Train: sample = mu + exp(log_var / 2) * z with z drawn from rng.
// Infer: mu = log_var = 0 and sample = z.
Epsilon vae_forward(std::span<const double> complex,
                    const ModelParams &params, VaeMode mode, Rng &rng);
// Train mode with a recorded z.
Epsilon vae_with_noise(std::span<const double> complex,
                       const ModelParams &params, std::vector<double> z);
Epsilon zero_epsilon(int d_feat);

// Backpropagates into the VAE projections of a train-mode Epsilon. d_sample
// is the gradient with respect to the drawn sample; d_mu and d_log_var are
// direct gradients such as those of the KL term. Empty spans count as zero.
void vae_backward(std::span<const double> complex, const Epsilon &eps,
                  std::span<const double> d_sample,
                  std::span<const double> d_mu,
                  std::span<const double> d_log_var, ModelParams &grad);

// Prefix tokens, then the structural slot, then suffix tokens. fid is the
// 1-based flattened index of the first suffix element.
struct InterleavedSequence {
  std::vector<int> prefix;
  std::shared_ptr<const PocketFeatures> features;
  std::vector<int> suffix;
  int fid = 0;

  int num_structural() const { return features ? features->num_tokens() : 0; }
  int length() const {
    return static_cast<int>(prefix.size() + suffix.size()) + num_structural();
  }
};

InterleavedSequence
make_interleaved(std::vector<int> prefix,
                 std::shared_ptr<const PocketFeatures> features,
                 std::vector<int> suffix);

// Template words around the slot; suffix = trailing words, BOS, target, EOS.
InterleavedSequence
build_interleaved(std::string_view template_id,
                  std::shared_ptr<const PocketFeatures> features,
                  std::span<const int> target_tokens,
                  const Vocabulary &vocab = Vocabulary::standard());

// Flattened mask, true exactly at positions >= fid.
std::vector<bool> loss_mask(const InterleavedSequence &seq);

// One prediction step. `window` holds k embeddings of width d, oldest first.
std::vector<double> lm_logits(const ModelParams &params,
                              std::span<const double> window,
                              std::span<const double> u_pooled,
                              std::span<const double> eps);

std::vector<double> softmax(std::span<const double> logits);

// Sum of log P(I_i | I_<i) over positions >= fid.
double sequence_logprob(const ModelParams &params,
                        const InterleavedSequence &seq,
                        std::span<const double> eps);

// Same value; also adds scale * d(logprob)/d(params) into `grad` and
// scale * d(logprob)/d(eps) into `d_eps` (skipped when empty).
double sequence_logprob_backward(const ModelParams &params,
                                 const InterleavedSequence &seq,
                                 std::span<const double> eps, double scale,
                                 ModelParams &grad, std::span<double> d_eps);

// Incremental left-to-right evaluation for sampling. Construction pushes the
// prefix, the structural slot, the template's trailing words and BOS.
class Decoder {
public:
  Decoder(const ModelParams &params,
          std::shared_ptr<const PocketFeatures> features,
          std::string_view template_id, std::vector<double> eps,
          const Vocabulary &vocab = Vocabulary::standard());

  std::vector<double> next_logits() const;
  void push(int token);

  // Tokens pushed after the structural slot, forced ones included.
  const std::vector<int> &suffix() const { return seq_.suffix; }
  int num_forced() const { return forced_; }
  const InterleavedSequence &sequence() const { return seq_; }
  // Model log-probability of the forced suffix tokens.
  double forced_logprob() const { return forced_logprob_; }

private:
  std::span<const double> element(int p) const;

  const ModelParams &params_;
  InterleavedSequence seq_;
  std::vector<double> eps_;
  std::vector<std::vector<double>> structural_;
  std::vector<double> u_pooled_;
  int forced_ = 0;
  double forced_logprob_ = 0;
};

struct SampleOptions {
  double temperature = kDefaultTemperature;
  double top_p = kDefaultTopP;
  int max_len = kDefaultMaxLen;
  std::string template_id = std::string(kDefaultTemplate);
};

struct SampleResult {
  std::string smiles;       // detokenized; may be invalid SMILES
  std::vector<int> tokens;  // sampled tokens, EOS excluded
  bool terminated = false;  // EOS drawn before max_len
  // Model log-probability of the whole suffix (forced tokens, samples, EOS)
  // under the drawn epsilon.
  double logprob = 0;
  double forced_logprob = 0;
  // Sum of log renormalized masses actually used by the sampler.
  double step_logprob = 0;
  std::vector<double> eps;
};

// Tempered softmax; temperature must be > 0.
std::vector<double> tempered_probs(std::span<const double> logits,
                                   double temperature);

// Smallest probability-sorted prefix with mass >= top_p (ties by id), with
// renormalized masses.
std::vector<std::pair<int, double>> nucleus(std::span<const double> probs,
                                            double top_p);

// Draws epsilon from N(0, I), then tokens until EOS or max_len.
SampleResult sample(const ModelParams &params,
                    std::shared_ptr<const PocketFeatures> features,
                    const SampleOptions &opts, Rng &rng,
                    const Vocabulary &vocab = Vocabulary::standard());

}  // namespace molchord

#endif  // MOLCHORD_GENMODEL_MODEL_H_
