//
// MolChord desk pipeline - Copyright 2026 The MolChord Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molchord/training/training.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "molchord/error.h"
#include "molchord/util/hash.h"
#include "molchord/util/parallel.h"

namespace molchord {
namespace {
  // Evaluates fn(i, grad_i) for every example. Per-example gradients land in
  // separate buffers and are summed in index order, so the result does not
  // depend on the worker count.
  template <class Fn>
  double sum_examples(const ModelParams &like, std::size_t n, int jobs,
                      ModelParams *grad, Fn &&fn) {
    std::vector<double> losses(n);
    if (grad == nullptr) {
      parallel_for(n, jobs, [&](std::size_t i) { losses[i] = fn(i, nullptr); });
    } else {
      std::vector<ModelParams> parts(n);
      parallel_for(n, jobs, [&](std::size_t i) {
        parts[i] = like.zeros_like();
        losses[i] = fn(i, &parts[i]);
      });
      auto &g = grad->values();
      for (const auto &part: parts)
        for (std::size_t j = 0; j < g.size(); ++j)
          g[j] += part.values()[j];
    }
    double total = 0;
    for (double l: losses)
      total += l;
    return total;
  }

  void require_batch(std::size_t n) {
    if (n == 0)
      throw Error(Errc::kEmptyBatch, "empty batch");
  }

  double sigmoid(double x) {
    if (x >= 0)
      return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
  }

  std::vector<double> draw_normal(Rng &rng, int n) {
    std::vector<double> z(n);
    for (double &v: z)
      v = rng.normal();
    return z;
  }

  double example_sft(const ModelParams &params, const SftExample &ex,
                     const std::vector<double> &z, double beta_vae,
                     double scale, ModelParams *grad) {
    const Epsilon eps = vae_with_noise(ex.complex, params, z);
    const auto seq = build_interleaved(ex.template_id, ex.features, ex.tokens);
    const double kl = kl_gaussian(eps.mu, eps.log_var);
    if (grad == nullptr)
      return -sequence_logprob(params, seq, eps.sample) + beta_vae * kl;

    const int F = params.config().d_feat;
    std::vector<double> d_eps(F, 0.0), d_mu(F), d_lv(F);
    const double lp =
        sequence_logprob_backward(params, seq, eps.sample, -scale, *grad, d_eps);
    kl_gaussian_grad(eps.mu, eps.log_var, d_mu, d_lv);
    for (int i = 0; i < F; ++i) {
      d_mu[i] *= scale * beta_vae;
      d_lv[i] *= scale * beta_vae;
    }
    vae_backward(ex.complex, eps, d_eps, d_mu, d_lv, *grad);
    return -lp + beta_vae * kl;
  }

  DpoTerms dpo_terms(const ModelParams &params, const ReferenceLogprobs &ref,
                     const DpoExample &pair, double beta_dpo,
                     double beta_vae, double scale, ModelParams *grad) {
    const Epsilon ep = vae_with_noise(pair.complex, params, pair.z);
    const auto sc = build_interleaved(pair.template_id, pair.features,
                                      pair.chosen);
    const auto sr = build_interleaved(pair.template_id, pair.features,
                                      pair.rejected);
    const int F = params.config().d_feat;

    DpoTerms out;
    out.kl = kl_gaussian(ep.mu, ep.log_var);
    if (grad == nullptr) {
      const double delta = (sequence_logprob(params, sc, ep.sample) - ref.chosen)
                           - (sequence_logprob(params, sr, ep.sample)
                              - ref.rejected);
      out.margin = beta_dpo * delta;
      out.loss = log1p_exp_neg(out.margin) + beta_vae * out.kl;
      return out;
    }

    // The loss depends on the log-probs only through the margin, so the
    // backward passes are run after the forward values are known.
    const double lp_c = sequence_logprob(params, sc, ep.sample);
    const double lp_r = sequence_logprob(params, sr, ep.sample);
    out.margin = beta_dpo * ((lp_c - ref.chosen) - (lp_r - ref.rejected));
    out.loss = log1p_exp_neg(out.margin) + beta_vae * out.kl;

    const double w = scale * beta_dpo * sigmoid(-out.margin);
    std::vector<double> d_eps(F, 0.0), d_mu(F), d_lv(F);
    sequence_logprob_backward(params, sc, ep.sample, -w, *grad, d_eps);
    sequence_logprob_backward(params, sr, ep.sample, w, *grad, d_eps);
    kl_gaussian_grad(ep.mu, ep.log_var, d_mu, d_lv);
    for (int i = 0; i < F; ++i) {
      d_mu[i] *= scale * beta_vae;
      d_lv[i] *= scale * beta_vae;
    }
    vae_backward(pair.complex, ep, d_eps, d_mu, d_lv, *grad);
    return out;
  }

  void require_reference(const ModelParams &params, const ModelParams &ref) {
    if (ref.size() == 0 || !(ref.config() == params.config()))
      throw Error(Errc::kMissingReference,
                  "DPO needs a reference model with the policy's shape");
  }

  std::vector<std::size_t> shuffled_order(std::size_t n, Rng &rng) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = n; i > 1; --i)
      std::swap(order[i - 1], order[rng.below(i)]);
    return order;
  }
}  // namespace

SftExample make_sft_example(std::shared_ptr<const PocketFeatures> features,
                            const std::string &smiles,
                            std::string template_id,
                            const Vocabulary &vocab) {
  SftExample ex;
  const Molecule mol = parse_smiles(smiles);
  ex.smiles = smiles;
  ex.tokens = vocab.encode_smiles(smiles);
  ex.complex = complex_features(
      *features,
      ligand_features(mol, static_cast<int>(features->pooled.size())));
  ex.features = std::move(features);
  ex.template_id = std::move(template_id);
  return ex;
}

double kl_gaussian(std::span<const double> mu,
                   std::span<const double> log_var) {
  if (mu.size() != log_var.size())
    throw Error(Errc::kShapeMismatch, "mu and log_var differ in width");
  double s = 0;
  for (std::size_t i = 0; i < mu.size(); ++i)
    s += mu[i] * mu[i] + std::exp(log_var[i]) - log_var[i] - 1.0;
  return 0.5 * s;
}

void kl_gaussian_grad(std::span<const double> mu,
                      std::span<const double> log_var, std::span<double> d_mu,
                      std::span<double> d_log_var) {
  for (std::size_t i = 0; i < mu.size(); ++i) {
    d_mu[i] = mu[i];
    d_log_var[i] = 0.5 * (std::exp(log_var[i]) - 1.0);
  }
}

double log1p_exp_neg(double x) {
  if (x > 0)
    return std::log1p(std::exp(-x));
  return -x + std::log1p(std::exp(x));
}

double alignment_loss(const ModelParams &params,
                      std::span<const InterleavedSequence> batch,
                      ModelParams *grad) {
  require_batch(batch.size());
  for (const auto &seq: batch)
    if (seq.suffix.empty())
      throw Error(Errc::kMalformedSequence,
                  "sequence has no positions at or after fid");

  const double scale = 1.0 / static_cast<double>(batch.size());
  const std::vector<double> eps(params.config().d_feat, 0.0);
  ModelParams full;
  if (grad != nullptr)
    full = params.zeros_like();
  const double total = sum_examples(
      params, batch.size(), 1, grad != nullptr ? &full : nullptr,
      [&](std::size_t i, ModelParams *g) {
        if (g == nullptr)
          return -sequence_logprob(params, batch[i], eps);
        return -sequence_logprob_backward(params, batch[i], eps, -scale, *g,
                                          {});
      });
  if (grad != nullptr) {
    const auto mask = params.mask({ ParamGroup::kAdapter });
    auto &out = grad->values();
    for (std::size_t j = 0; j < out.size(); ++j)
      if (mask[j])
        out[j] += full.values()[j];
  }
  return total * scale;
}

double sft_loss(const ModelParams &params, std::span<const SftExample> batch,
                std::span<const std::vector<double>> z, double beta_vae,
                ModelParams *grad, int jobs) {
  require_batch(batch.size());
  if (z.size() != batch.size())
    throw Error(Errc::kShapeMismatch, "one noise vector per example required");
  const double scale = 1.0 / static_cast<double>(batch.size());
  const double total = sum_examples(
      params, batch.size(), jobs, grad, [&](std::size_t i, ModelParams *g) {
        return example_sft(params, batch[i], z[i], beta_vae, scale, g);
      });
  return total * scale;
}

double sft_loss(const ModelParams &params, std::span<const SftExample> batch,
                Rng &rng, double beta_vae, ModelParams *grad, int jobs) {
  std::vector<std::vector<double>> z;
  for (std::size_t i = 0; i < batch.size(); ++i)
    z.push_back(draw_normal(rng, params.config().d_feat));
  return sft_loss(params, batch, z, beta_vae, grad, jobs);
}

ReferenceLogprobs reference_logprobs(const ModelParams &ref,
                                     const DpoExample &pair) {
  const Epsilon er = vae_with_noise(pair.complex, ref, pair.z);
  const auto sc = build_interleaved(pair.template_id, pair.features,
                                    pair.chosen);
  const auto sr = build_interleaved(pair.template_id, pair.features,
                                    pair.rejected);
  return { sequence_logprob(ref, sc, er.sample),
           sequence_logprob(ref, sr, er.sample) };
}

DpoTerms dpo_loss(const ModelParams &params, const ReferenceLogprobs &ref,
                  const DpoExample &pair, double beta_dpo, double beta_vae,
                  ModelParams *grad) {
  return dpo_terms(params, ref, pair, beta_dpo, beta_vae, 1.0, grad);
}

DpoTerms dpo_loss(const ModelParams &params, const ModelParams &ref_params,
                  const DpoExample &pair, double beta_dpo, double beta_vae,
                  ModelParams *grad) {
  require_reference(params, ref_params);
  return dpo_terms(params, reference_logprobs(ref_params, pair), pair,
                   beta_dpo, beta_vae, 1.0, grad);
}

DpoTerms dpo_batch_loss(const ModelParams &params,
                        const ModelParams &ref_params,
                        std::span<const DpoExample> batch, double beta_dpo,
                        double beta_vae, ModelParams *grad, int jobs) {
  require_batch(batch.size());
  require_reference(params, ref_params);
  const double scale = 1.0 / static_cast<double>(batch.size());
  std::vector<DpoTerms> terms(batch.size());
  sum_examples(params, batch.size(), jobs, grad,
               [&](std::size_t i, ModelParams *g) {
                 terms[i] = dpo_terms(params,
                                      reference_logprobs(ref_params, batch[i]),
                                      batch[i], beta_dpo, beta_vae, scale, g);
                 return terms[i].loss;
               });
  DpoTerms mean;
  for (const auto &t: terms) {
    mean.loss += t.loss * scale;
    mean.margin += t.margin * scale;
    mean.kl += t.kl * scale;
  }
  return mean;
}

double implied_margin(const ModelParams &params, const ModelParams &ref,
                      const DpoExample &pair, double beta_dpo) {
  return dpo_loss(params, ref, pair, beta_dpo, 0.0).margin;
}

GradCheckResult grad_check(const LossThunk &loss, const ModelParams &params,
                           const GradCheckOptions &opts) {
  if (!(opts.epsilon >= 1e-6 && opts.epsilon <= 1e-3))
    throw Error(Errc::kOutOfRange, "grad_check epsilon must be in [1e-6, 1e-3]");
  const double f1 = loss(params, nullptr);
  const double f2 = loss(params, nullptr);
  if (f1 != f2)
    throw Error(Errc::kNonDeterministicLoss,
                "loss differs between two evaluations at the same point");

  ModelParams analytic = params.zeros_like();
  loss(params, &analytic);

  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < params.size(); ++i)
    if (opts.mask.empty() || opts.mask[i])
      candidates.push_back(i);
  if (candidates.size() > opts.full_limit) {
    Rng rng(opts.seed);
    const auto order = shuffled_order(candidates.size(), rng);
    const std::size_t keep = (candidates.size() + 99) / 100;
    std::vector<std::size_t> sub;
    for (std::size_t i = 0; i < keep; ++i)
      sub.push_back(candidates[order[i]]);
    std::sort(sub.begin(), sub.end());
    candidates = std::move(sub);
  }

  GradCheckResult res;
  ModelParams work = params;
  for (std::size_t idx: candidates) {
    const double orig = work.values()[idx];
    work.values()[idx] = orig + opts.epsilon;
    const double fp = loss(work, nullptr);
    work.values()[idx] = orig - opts.epsilon;
    const double fm = loss(work, nullptr);
    work.values()[idx] = orig;
    const double num = (fp - fm) / (2 * opts.epsilon);
    const double a = analytic.values()[idx];
    const double rel = std::abs(a - num)
                       / std::max({ 1.0, std::abs(a), std::abs(num) });
    if (rel > res.max_rel_error || res.checked == 0) {
      res.max_rel_error = std::max(res.max_rel_error, rel);
      if (rel >= res.max_rel_error)
        res.worst_index = idx;
    }
    ++res.checked;
  }
  return res;
}

Optimizer::Optimizer(const TrainConfig &config, std::size_t size)
    : config_(config), m_(size, 0.0), v_(size, 0.0) {
  if (!(config.learning_rate >= 0))
    throw Error(Errc::kOutOfRange, "learning rate must be >= 0");
}

double Optimizer::step(ModelParams &params, ModelParams &grad,
                       const std::vector<char> &mask) {
  auto &p = params.values();
  auto &g = grad.values();
  auto active = [&](std::size_t i) { return mask.empty() || mask[i]; };

  double sq = 0;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (active(i))
      sq += g[i] * g[i];
  const double norm = std::sqrt(sq);
  if (config_.clip_norm > 0 && norm > config_.clip_norm) {
    const double s = config_.clip_norm / norm;
    for (std::size_t i = 0; i < g.size(); ++i)
      g[i] *= s;
  }

  ++t_;
  const double lr = config_.learning_rate;
  if (config_.optimizer == OptimizerKind::kSgd) {
    for (std::size_t i = 0; i < p.size(); ++i)
      if (active(i))
        p[i] -= lr * g[i];
    return norm;
  }
  const double b1 = config_.adam_beta1, b2 = config_.adam_beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!active(i))
      continue;
    m_[i] = b1 * m_[i] + (1 - b1) * g[i];
    v_[i] = b2 * v_[i] + (1 - b2) * g[i] * g[i];
    const double mhat = m_[i] / c1;
    const double vhat = v_[i] / c2;
    p[i] -= lr * mhat / (std::sqrt(vhat) + config_.adam_eps);
  }
  return norm;
}

bool is_validation_pocket(const std::string &pocket_id, double fraction) {
  const std::uint64_t bucket = splitmix64(fnv1a64(pocket_id)) % 10000;
  return static_cast<double>(bucket) < fraction * 10000.0;
}

std::pair<std::vector<SftExample>, std::vector<SftExample>>
split_validation(const std::vector<SftExample> &examples, double fraction) {
  std::vector<SftExample> train, val;
  for (const auto &ex: examples)
    (is_validation_pocket(ex.features->pocket_id, fraction) ? val : train)
        .push_back(ex);
  if (train.empty())
    return { examples, {} };
  return { std::move(train), std::move(val) };
}

double sft_validation_loss(const ModelParams &params,
                           const std::vector<SftExample> &val,
                           std::uint64_t seed, double beta_vae, int jobs) {
  std::vector<std::vector<double>> z;
  for (std::size_t i = 0; i < val.size(); ++i) {
    Rng rng(stream_seed(seed, "sft-validation", i));
    z.push_back(draw_normal(rng, params.config().d_feat));
  }
  return sft_loss(params, val, z, beta_vae, nullptr, jobs);
}

TrainResult train_sft(const std::vector<SftExample> &examples,
                      const ModelParams &init, const TrainConfig &config) {
  if (examples.empty())
    throw Error(Errc::kEmptyBatch, "no SFT examples");
  if (config.batch_size < 1)
    throw Error(Errc::kOutOfRange, "batch size must be >= 1");

  const auto [train, val] = split_validation(examples, config.val_fraction);
  const std::size_t batch = static_cast<std::size_t>(config.batch_size);
  const std::size_t per_epoch = (train.size() + batch - 1) / batch;
  const std::int64_t total_steps =
      config.steps > 0 ? config.steps
                       : static_cast<std::int64_t>(per_epoch) * config.epochs;

  ModelParams params = init;
  const auto mask = params.mask({ ParamGroup::kEmbedding, ParamGroup::kAdapter,
                                  ParamGroup::kVae, ParamGroup::kLm });
  Optimizer opt(config, params.size());
  Rng order_rng(stream_seed(config.seed, "sft-order", 0));
  auto order = shuffled_order(train.size(), order_rng);
  std::size_t cursor = 0;

  TrainResult result;
  ModelParams best = params;
  std::optional<double> best_val;
  std::int64_t best_step = 0;
  auto validate = [&](std::int64_t step) -> std::optional<double> {
    if (val.empty())
      return std::nullopt;
    const double v = sft_validation_loss(params, val, config.seed,
                                         config.beta_vae, config.jobs);
    if (!best_val || v < *best_val) {
      best_val = v;
      best = params;
      best_step = step;
    }
    return v;
  };

  result.curve.push_back({ 0, 0.0, validate(0), std::nullopt });
  for (std::int64_t step = 1; step <= total_steps; ++step) {
    std::vector<SftExample> mb;
    for (std::size_t i = 0; i < batch && i < train.size(); ++i) {
      if (cursor == order.size()) {
        order = shuffled_order(train.size(), order_rng);
        cursor = 0;
      }
      mb.push_back(train[order[cursor++]]);
    }
    Rng noise(stream_seed(config.seed, "sft-noise",
                          static_cast<std::uint64_t>(step)));
    ModelParams grad = params.zeros_like();
    const double loss =
        sft_loss(params, mb, noise, config.beta_vae, &grad, config.jobs);
    opt.step(params, grad, mask);

    CurvePoint pt { step, loss, std::nullopt, std::nullopt };
    if (step == total_steps || (config.eval_every > 0
                                && step % config.eval_every == 0))
      pt.val_loss = validate(step);
    result.curve.push_back(pt);
  }

  if (!best_val) {
    best = params;
    best_step = total_steps;
  }
  result.checkpoint.params = std::move(best);
  result.checkpoint.step = best_step;
  result.checkpoint.val_loss = best_val;
  result.checkpoint.stage = "sft";
  return result;
}

TrainResult train_dpo(const std::vector<DpoExample> &pairs,
                      const ModelParams &sft, const TrainConfig &config) {
  if (pairs.empty())
    throw Error(Errc::kEmptyBatch, "no preference pairs");
  if (config.batch_size < 1)
    throw Error(Errc::kOutOfRange, "batch size must be >= 1");

  const ModelParams ref = sft;
  ModelParams params = sft;
  const auto mask = params.mask({ ParamGroup::kEmbedding, ParamGroup::kAdapter,
                                  ParamGroup::kVae, ParamGroup::kLm });
  Optimizer opt(config, params.size());

  // The reference is frozen and the noise recorded, so its log-probs are
  // computed once.
  std::vector<ReferenceLogprobs> ref_lp(pairs.size());
  parallel_for(pairs.size(), config.jobs, [&](std::size_t i) {
    ref_lp[i] = reference_logprobs(ref, pairs[i]);
  });

  Rng order_rng(stream_seed(config.seed, "dpo-order", 0));
  const std::size_t batch = static_cast<std::size_t>(config.batch_size);
  TrainResult result;
  std::int64_t step = 0;
  const int epochs = std::max(1, config.epochs);
  for (int epoch = 0; epoch < epochs; ++epoch) {
    const auto order = shuffled_order(pairs.size(), order_rng);
    for (std::size_t begin = 0; begin < order.size(); begin += batch) {
      const std::size_t end = std::min(order.size(), begin + batch);
      const double scale = 1.0 / static_cast<double>(end - begin);
      std::vector<DpoTerms> terms(end - begin);
      ModelParams grad = params.zeros_like();
      sum_examples(params, end - begin, config.jobs, &grad,
                   [&](std::size_t i, ModelParams *g) {
                     const std::size_t k = order[begin + i];
                     terms[i] = dpo_terms(params, ref_lp[k], pairs[k],
                                          config.beta_dpo, config.beta_vae,
                                          scale, g);
                     return terms[i].loss;
                   });
      double loss = 0, margin = 0;
      for (const auto &t: terms) {
        loss += t.loss * scale;
        margin += t.margin * scale;
      }
      opt.step(params, grad, mask);
      ++step;
      result.curve.push_back({ step, loss, std::nullopt, margin });
      if (config.steps > 0 && step >= config.steps)
        break;
    }
    if (config.steps > 0 && step >= config.steps)
      break;
  }

  result.checkpoint.params = std::move(params);
  result.checkpoint.step = step;
  result.checkpoint.stage = "dpo";
  return result;
}

}  // namespace molchord
