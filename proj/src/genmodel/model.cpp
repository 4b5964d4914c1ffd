//
// MolChord desk pipeline - Copyright 2026 The MolChord Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molchord/genmodel/model.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "molchord/error.h"

namespace molchord {
namespace {
  // y = W x, W is rows x cols row-major.
  void matvec(const double *w, int rows, int cols, const double *x,
              double *y) {
    for (int r = 0; r < rows; ++r) {
      const double *row = w + static_cast<std::size_t>(r) * cols;
      double acc = 0;
      for (int c = 0; c < cols; ++c)
        acc += row[c] * x[c];
      y[r] = acc;
    }
  }

  // dx += W^T dy
  void matvec_t_acc(const double *w, int rows, int cols, const double *dy,
                    double *dx) {
    for (int r = 0; r < rows; ++r) {
      const double *row = w + static_cast<std::size_t>(r) * cols;
      const double g = dy[r];
      if (g == 0)
        continue;
      for (int c = 0; c < cols; ++c)
        dx[c] += row[c] * g;
    }
  }

  // dW += dy x^T
  void outer_acc(double *dw, int rows, int cols, const double *dy,
                 const double *x) {
    for (int r = 0; r < rows; ++r) {
      double *row = dw + static_cast<std::size_t>(r) * cols;
      const double g = dy[r];
      if (g == 0)
        continue;
      for (int c = 0; c < cols; ++c)
        row[c] += g * x[c];
    }
  }

  double sigmoid(double x) {
    if (x >= 0)
      return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
  }

  double log_sum_exp(std::span<const double> xs) {
    const double m = *std::max_element(xs.begin(), xs.end());
    double s = 0;
    for (double x: xs)
      s += std::exp(x - m);
    return m + std::log(s);
  }

  void require(bool ok, const std::string &what) {
    if (!ok)
      throw Error(Errc::kShapeMismatch, what);
  }

  struct AdapterTrace {
    std::vector<double> a, s, up, hid, u;
  };

  AdapterTrace adapter_trace(const ModelParams &p, std::span<const double> a) {
    const auto &cfg = p.config();
    require(static_cast<int>(a.size()) == cfg.d_feat,
            "adapter input has width " + std::to_string(a.size())
                + ", expected " + std::to_string(cfg.d_feat));
    const int A = cfg.adapter_hidden, F = cfg.d_feat;
    AdapterTrace t;
    t.a.assign(a.begin(), a.end());
    t.s.resize(A);
    t.up.resize(A);
    t.hid.resize(A);
    t.u.resize(cfg.d);
    matvec(p.block(ParamBlock::kGate).data(), A, F, t.a.data(), t.s.data());
    const auto bg = p.block(ParamBlock::kGateBias);
    for (int i = 0; i < A; ++i)
      t.s[i] = sigmoid(t.s[i] + bg[i]);
    matvec(p.block(ParamBlock::kUp).data(), A, F, t.a.data(), t.up.data());
    for (int i = 0; i < A; ++i)
      t.hid[i] = t.s[i] * t.up[i];
    matvec(p.block(ParamBlock::kDown).data(), cfg.d, A, t.hid.data(),
           t.u.data());
    return t;
  }

  // Adds parameter gradients for upstream du; da (may be null) receives the
  // input gradient.
  void adapter_backward(const ModelParams &p, const AdapterTrace &t,
                        const double *du, ModelParams &grad, double *da) {
    const auto &cfg = p.config();
    const int A = cfg.adapter_hidden, F = cfg.d_feat, d = cfg.d;
    outer_acc(grad.block(ParamBlock::kDown).data(), d, A, du, t.hid.data());
    std::vector<double> dhid(A, 0.0);
    matvec_t_acc(p.block(ParamBlock::kDown).data(), d, A, du, dhid.data());
    std::vector<double> dg(A), dup(A);
    for (int i = 0; i < A; ++i) {
      dup[i] = dhid[i] * t.s[i];
      dg[i] = dhid[i] * t.up[i] * t.s[i] * (1.0 - t.s[i]);
    }
    outer_acc(grad.block(ParamBlock::kGate).data(), A, F, dg.data(),
              t.a.data());
    auto gbg = grad.block(ParamBlock::kGateBias);
    for (int i = 0; i < A; ++i)
      gbg[i] += dg[i];
    outer_acc(grad.block(ParamBlock::kUp).data(), A, F, dup.data(),
              t.a.data());
    if (da != nullptr) {
      matvec_t_acc(p.block(ParamBlock::kGate).data(), A, F, dg.data(), da);
      matvec_t_acc(p.block(ParamBlock::kUp).data(), A, F, dup.data(), da);
    }
  }

  struct StepTrace {
    std::vector<double> z, h1, h2, logits;
  };

  void step_forward(const ModelParams &p, StepTrace &t) {
    const auto &cfg = p.config();
    const int H = cfg.hidden, V = cfg.vocab_size, in = cfg.lm_input();
    t.h1.resize(H);
    t.h2.resize(H);
    t.logits.resize(V);
    matvec(p.block(ParamBlock::kW1).data(), H, in, t.z.data(), t.h1.data());
    const auto b1 = p.block(ParamBlock::kB1);
    for (int i = 0; i < H; ++i)
      t.h1[i] = std::tanh(t.h1[i] + b1[i]);
    matvec(p.block(ParamBlock::kW2).data(), H, H, t.h1.data(), t.h2.data());
    const auto b2 = p.block(ParamBlock::kB2);
    for (int i = 0; i < H; ++i)
      t.h2[i] = std::tanh(t.h2[i] + b2[i]);
    matvec(p.block(ParamBlock::kWo).data(), V, H, t.h2.data(),
           t.logits.data());
    const auto bo = p.block(ParamBlock::kBo);
    for (int i = 0; i < V; ++i)
      t.logits[i] += bo[i];
  }

  // Gradient of scale * log softmax(logits)[target]. Writes dz.
  void step_backward(const ModelParams &p, const StepTrace &t, int target,
                     double scale, ModelParams &grad, std::vector<double> &dz) {
    const auto &cfg = p.config();
    const int H = cfg.hidden, V = cfg.vocab_size, in = cfg.lm_input();

    const double lse = log_sum_exp(t.logits);
    std::vector<double> dlogits(V);
    for (int v = 0; v < V; ++v)
      dlogits[v] = -scale * std::exp(t.logits[v] - lse);
    dlogits[target] += scale;

    outer_acc(grad.block(ParamBlock::kWo).data(), V, H, dlogits.data(),
              t.h2.data());
    auto gbo = grad.block(ParamBlock::kBo);
    for (int v = 0; v < V; ++v)
      gbo[v] += dlogits[v];

    std::vector<double> d2(H, 0.0);
    matvec_t_acc(p.block(ParamBlock::kWo).data(), V, H, dlogits.data(),
                 d2.data());
    for (int i = 0; i < H; ++i)
      d2[i] *= 1.0 - t.h2[i] * t.h2[i];
    outer_acc(grad.block(ParamBlock::kW2).data(), H, H, d2.data(),
              t.h1.data());
    auto gb2 = grad.block(ParamBlock::kB2);
    for (int i = 0; i < H; ++i)
      gb2[i] += d2[i];

    std::vector<double> d1(H, 0.0);
    matvec_t_acc(p.block(ParamBlock::kW2).data(), H, H, d2.data(), d1.data());
    for (int i = 0; i < H; ++i)
      d1[i] *= 1.0 - t.h1[i] * t.h1[i];
    outer_acc(grad.block(ParamBlock::kW1).data(), H, in, d1.data(),
              t.z.data());
    auto gb1 = grad.block(ParamBlock::kB1);
    for (int i = 0; i < H; ++i)
      gb1[i] += d1[i];

    dz.assign(in, 0.0);
    matvec_t_acc(p.block(ParamBlock::kW1).data(), H, in, d1.data(),
                 dz.data());
  }

  void check_tokens(const std::vector<int> &ids, int vocab_size) {
    for (int t: ids)
      if (t < 0 || t >= vocab_size)
        throw Error(Errc::kTokenOutOfVocab,
                    "token id " + std::to_string(t) + " outside vocabulary of "
                        + std::to_string(vocab_size));
  }

  std::vector<double> pooled_input(const PocketFeatures &f,
                                   std::span<const double> eps) {
    std::vector<double> a(f.pooled);
    for (std::size_t i = 0; i < a.size(); ++i)
      a[i] += eps[i];
    return a;
  }

  double run_sequence(const ModelParams &params,
                      const InterleavedSequence &seq,
                      std::span<const double> eps, double scale,
                      ModelParams *grad, std::span<double> d_eps) {
    const auto &cfg = params.config();
    const int d = cfg.d, k = cfg.window, F = cfg.d_feat;
    require(seq.features != nullptr, "interleaved sequence has no features");
    require(static_cast<int>(eps.size()) == F,
            "epsilon has width " + std::to_string(eps.size()) + ", expected "
                + std::to_string(F));
    require(d_eps.empty() || static_cast<int>(d_eps.size()) == F,
            "epsilon gradient has the wrong width");
    check_tokens(seq.prefix, cfg.vocab_size);
    check_tokens(seq.suffix, cfg.vocab_size);

    const int m = static_cast<int>(seq.prefix.size());
    const int n_struct = seq.num_structural();
    const int start = m + n_struct;
    const int len = seq.length();

    std::vector<AdapterTrace> structural;
    structural.reserve(n_struct);
    for (const auto &x: seq.features->vectors)
      structural.push_back(adapter_trace(params, x));
    const AdapterTrace pooled =
        adapter_trace(params, pooled_input(*seq.features, eps));

    const auto emb = params.block(ParamBlock::kTokenEmbedding);
    auto token_row = [&](int id) {
      return emb.data() + static_cast<std::size_t>(id) * d;
    };
    auto element = [&](int p) -> const double * {
      if (p < 0)
        return token_row(Vocabulary::kPad);
      if (p < m)
        return token_row(seq.prefix[p]);
      if (p < start)
        return structural[p - m].u.data();
      return token_row(seq.suffix[p - start]);
    };

    std::vector<std::vector<double>> du_struct(n_struct,
                                               std::vector<double>(d, 0.0));
    std::vector<double> du_pool(d, 0.0);
    std::vector<double> deps_local(F, 0.0);

    StepTrace t;
    t.z.resize(cfg.lm_input());
    std::vector<double> dz;
    double total = 0;
    for (int p = start; p < len; ++p) {
      for (int w = 0; w < k; ++w)
        std::copy_n(element(p - k + w), d, t.z.begin() + w * d);
      std::copy_n(pooled.u.begin(), d, t.z.begin() + k * d);
      std::copy_n(eps.begin(), F, t.z.begin() + k * d + d);
      step_forward(params, t);

      const int y = seq.suffix[p - start];
      total += t.logits[y] - log_sum_exp(t.logits);
      if (grad == nullptr)
        continue;

      step_backward(params, t, y, scale, *grad, dz);
      auto gemb = grad->block(ParamBlock::kTokenEmbedding);
      for (int w = 0; w < k; ++w) {
        const int q = p - k + w;
        const double *src = dz.data() + w * d;
        double *dst;
        if (q < 0)
          dst = gemb.data() + static_cast<std::size_t>(Vocabulary::kPad) * d;
        else if (q < m)
          dst = gemb.data() + static_cast<std::size_t>(seq.prefix[q]) * d;
        else if (q < start)
          dst = du_struct[q - m].data();
        else
          dst = gemb.data() + static_cast<std::size_t>(seq.suffix[q - start]) * d;
        for (int i = 0; i < d; ++i)
          dst[i] += src[i];
      }
      for (int i = 0; i < d; ++i)
        du_pool[i] += dz[k * d + i];
      for (int i = 0; i < F; ++i)
        deps_local[i] += dz[k * d + d + i];
    }

    if (grad != nullptr) {
      for (int j = 0; j < n_struct; ++j)
        adapter_backward(params, structural[j], du_struct[j].data(), *grad,
                         nullptr);
      adapter_backward(params, pooled, du_pool.data(), *grad,
                       deps_local.data());
      for (std::size_t i = 0; i < d_eps.size(); ++i)
        d_eps[i] += deps_local[i];
    }
    return total;
  }

  std::string_view kBlockNames[kNumParamBlocks] = {
    "token_embedding", "adapter.gate", "adapter.gate_bias", "adapter.up",
    "adapter.down",    "vae.mu",       "vae.mu_bias",       "vae.log_var",
    "vae.log_var_bias", "lm.w1",       "lm.b1",             "lm.w2",
    "lm.b2",           "lm.out",       "lm.out_bias",
  };
}  // namespace

ModelParams::ModelParams(const ModelConfig &config): config_(config) {
  const int V = config.vocab_size, d = config.d, F = config.d_feat,
            A = config.adapter_hidden, H = config.hidden;
  if (V < 3 || d < 1 || F < 1 || A < 1 || H < 1 || config.window < 1)
    throw Error(Errc::kShapeMismatch, "model dimensions must be positive");
  shapes_ = { {
      { V, d },
      { A, F },
      { A, 1 },
      { A, F },
      { d, A },
      { F, 2 * F },
      { F, 1 },
      { F, 2 * F },
      { F, 1 },
      { H, config.lm_input() },
      { H, 1 },
      { H, H },
      { H, 1 },
      { V, H },
      { V, 1 },
  } };
  std::size_t off = 0;
  for (int i = 0; i < kNumParamBlocks; ++i) {
    offsets_[i] = off;
    off += static_cast<std::size_t>(shapes_[i].rows) * shapes_[i].cols;
  }
  values_.assign(off, 0.0);
}

std::span<double> ModelParams::block(ParamBlock b) {
  const auto s = shape(b);
  return { values_.data() + offset(b),
           static_cast<std::size_t>(s.rows) * s.cols };
}

std::span<const double> ModelParams::block(ParamBlock b) const {
  const auto s = shape(b);
  return { values_.data() + offset(b),
           static_cast<std::size_t>(s.rows) * s.cols };
}

std::string_view ModelParams::block_name(ParamBlock b) {
  return kBlockNames[index(b)];
}

ParamGroup ModelParams::group(ParamBlock b) {
  switch (b) {
  case ParamBlock::kTokenEmbedding:
    return ParamGroup::kEmbedding;
  case ParamBlock::kGate:
  case ParamBlock::kGateBias:
  case ParamBlock::kUp:
  case ParamBlock::kDown:
    return ParamGroup::kAdapter;
  case ParamBlock::kMu:
  case ParamBlock::kMuBias:
  case ParamBlock::kLogVar:
  case ParamBlock::kLogVarBias:
    return ParamGroup::kVae;
  default:
    return ParamGroup::kLm;
  }
}

std::vector<char>
ModelParams::mask(std::initializer_list<ParamGroup> groups) const {
  std::vector<char> m(values_.size(), 0);
  for (int i = 0; i < kNumParamBlocks; ++i) {
    const auto b = static_cast<ParamBlock>(i);
    if (std::find(groups.begin(), groups.end(), group(b)) == groups.end())
      continue;
    const auto s = shape(b);
    std::fill_n(m.begin() + static_cast<std::ptrdiff_t>(offset(b)),
                static_cast<std::size_t>(s.rows) * s.cols, 1);
  }
  return m;
}

ModelParams ModelParams::zeros_like() const { return ModelParams(config_); }

bool ModelParams::all_finite() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](double v) { return std::isfinite(v); });
}

void init_params(ModelParams &params, std::uint64_t seed) {
  Rng rng(seed);
  const auto &cfg = params.config();
  auto fill = [&](ParamBlock b, double scale) {
    for (double &v: params.block(b))
      v = scale * rng.normal();
  };
  fill(ParamBlock::kTokenEmbedding, 0.3);
  fill(ParamBlock::kGate, 1.0 / std::sqrt(cfg.d_feat));
  fill(ParamBlock::kUp, 1.0 / std::sqrt(cfg.d_feat));
  fill(ParamBlock::kDown, 1.0 / std::sqrt(cfg.adapter_hidden));
  fill(ParamBlock::kMu, 0.01);
  fill(ParamBlock::kLogVar, 0.01);
  fill(ParamBlock::kW1, 1.0 / std::sqrt(cfg.lm_input()));
  fill(ParamBlock::kW2, 1.0 / std::sqrt(cfg.hidden));
  fill(ParamBlock::kWo, 0.5 / std::sqrt(cfg.hidden));
}

std::vector<double> adapter_apply(const ModelParams &params,
                                  std::span<const double> x) {
  return adapter_trace(params, x).u;
}

std::vector<std::vector<double>> adapter_forward(const PocketFeatures &f,
                                                 const ModelParams &params) {
  std::vector<std::vector<double>> out;
  out.reserve(f.vectors.size());
  for (const auto &x: f.vectors)
    out.push_back(adapter_apply(params, x));
  return out;
}

Epsilon vae_with_noise(std::span<const double> complex,
                       const ModelParams &params, std::vector<double> z) {
  const int F = params.config().d_feat;
  require(static_cast<int>(complex.size()) == 2 * F,
          "VAE input has width " + std::to_string(complex.size())
              + ", expected " + std::to_string(2 * F));
  require(static_cast<int>(z.size()) == F, "VAE noise has the wrong width");
  Epsilon e;
  e.mu.resize(F);
  e.log_var.resize(F);
  matvec(params.block(ParamBlock::kMu).data(), F, 2 * F, complex.data(),
         e.mu.data());
  matvec(params.block(ParamBlock::kLogVar).data(), F, 2 * F, complex.data(),
         e.log_var.data());
  const auto bm = params.block(ParamBlock::kMuBias);
  const auto bl = params.block(ParamBlock::kLogVarBias);
  e.sample.resize(F);
  for (int i = 0; i < F; ++i) {
    e.mu[i] += bm[i];
    e.log_var[i] += bl[i];
    e.sample[i] = e.mu[i] + std::exp(e.log_var[i] / 2) * z[i];
  }
  e.z = std::move(z);
  return e;
}

Epsilon vae_forward(std::span<const double> complex,
                    const ModelParams &params, VaeMode mode, Rng &rng) {
  const int F = params.config().d_feat;
  std::vector<double> z(F);
  for (double &v: z)
    v = rng.normal();
  if (mode == VaeMode::kTrain)
    return vae_with_noise(complex, params, std::move(z));
  Epsilon e;
  e.mu.assign(F, 0.0);
  e.log_var.assign(F, 0.0);
  e.sample = z;
  e.z = std::move(z);
  return e;
}

Epsilon zero_epsilon(int d_feat) {
  Epsilon e;
  e.mu.assign(d_feat, 0.0);
  e.log_var.assign(d_feat, 0.0);
  e.z.assign(d_feat, 0.0);
  e.sample.assign(d_feat, 0.0);
  return e;
}

void vae_backward(std::span<const double> complex, const Epsilon &eps,
                  std::span<const double> d_sample,
                  std::span<const double> d_mu,
                  std::span<const double> d_log_var, ModelParams &grad) {
  const int F = grad.config().d_feat;
  std::vector<double> gm(F), gl(F);
  for (int i = 0; i < F; ++i) {
    const double ds = d_sample.empty() ? 0.0 : d_sample[i];
    gm[i] = ds + (d_mu.empty() ? 0.0 : d_mu[i]);
    gl[i] = ds * eps.z[i] * std::exp(eps.log_var[i] / 2) / 2
            + (d_log_var.empty() ? 0.0 : d_log_var[i]);
  }
  outer_acc(grad.block(ParamBlock::kMu).data(), F, 2 * F, gm.data(),
            complex.data());
  outer_acc(grad.block(ParamBlock::kLogVar).data(), F, 2 * F, gl.data(),
            complex.data());
  auto bm = grad.block(ParamBlock::kMuBias);
  auto bl = grad.block(ParamBlock::kLogVarBias);
  for (int i = 0; i < F; ++i) {
    bm[i] += gm[i];
    bl[i] += gl[i];
  }
}

InterleavedSequence
make_interleaved(std::vector<int> prefix,
                 std::shared_ptr<const PocketFeatures> features,
                 std::vector<int> suffix) {
  if (!features || features->num_tokens() < 1)
    throw Error(Errc::kShapeMismatch,
                "structural slot needs at least one feature vector");
  InterleavedSequence s;
  s.prefix = std::move(prefix);
  s.features = std::move(features);
  s.suffix = std::move(suffix);
  s.fid = static_cast<int>(s.prefix.size()) + s.num_structural() + 1;
  return s;
}

InterleavedSequence
build_interleaved(std::string_view template_id,
                  std::shared_ptr<const PocketFeatures> features,
                  std::span<const int> target_tokens,
                  const Vocabulary &vocab) {
  const PromptTemplate &t = find_template(template_id);
  std::vector<int> prefix, suffix;
  for (const auto &w: t.prefix_words)
    prefix.push_back(vocab.word(w));
  for (const auto &w: t.suffix_words)
    suffix.push_back(vocab.word(w));
  suffix.push_back(Vocabulary::kBos);
  suffix.insert(suffix.end(), target_tokens.begin(), target_tokens.end());
  suffix.push_back(Vocabulary::kEos);
  return make_interleaved(std::move(prefix), std::move(features),
                          std::move(suffix));
}

std::vector<bool> loss_mask(const InterleavedSequence &seq) {
  std::vector<bool> mask(seq.length(), false);
  for (int p = seq.fid - 1; p < seq.length(); ++p)
    mask[p] = true;
  return mask;
}

std::vector<double> lm_logits(const ModelParams &params,
                              std::span<const double> window,
                              std::span<const double> u_pooled,
                              std::span<const double> eps) {
  const auto &cfg = params.config();
  require(static_cast<int>(window.size()) == cfg.window * cfg.d,
          "window has width " + std::to_string(window.size()) + ", expected "
              + std::to_string(cfg.window * cfg.d));
  require(static_cast<int>(u_pooled.size()) == cfg.d,
          "pooled conditioning has the wrong width");
  require(static_cast<int>(eps.size()) == cfg.d_feat,
          "epsilon has the wrong width");
  StepTrace t;
  t.z.reserve(cfg.lm_input());
  t.z.insert(t.z.end(), window.begin(), window.end());
  t.z.insert(t.z.end(), u_pooled.begin(), u_pooled.end());
  t.z.insert(t.z.end(), eps.begin(), eps.end());
  step_forward(params, t);
  return t.logits;
}

std::vector<double> softmax(std::span<const double> logits) {
  const double lse = log_sum_exp(logits);
  std::vector<double> p(logits.size());
  for (std::size_t i = 0; i < p.size(); ++i)
    p[i] = std::exp(logits[i] - lse);
  return p;
}

double sequence_logprob(const ModelParams &params,
                        const InterleavedSequence &seq,
                        std::span<const double> eps) {
  return run_sequence(params, seq, eps, 0.0, nullptr, {});
}

double sequence_logprob_backward(const ModelParams &params,
                                 const InterleavedSequence &seq,
                                 std::span<const double> eps, double scale,
                                 ModelParams &grad, std::span<double> d_eps) {
  require(grad.config() == params.config(),
          "gradient store does not match the model");
  return run_sequence(params, seq, eps, scale, &grad, d_eps);
}

Decoder::Decoder(const ModelParams &params,
                 std::shared_ptr<const PocketFeatures> features,
                 std::string_view template_id, std::vector<double> eps,
                 const Vocabulary &vocab)
    : params_(params), eps_(std::move(eps)) {
  const PromptTemplate &t = find_template(template_id);
  std::vector<int> prefix;
  for (const auto &w: t.prefix_words)
    prefix.push_back(vocab.word(w));
  seq_ = make_interleaved(std::move(prefix), std::move(features), {});
  require(static_cast<int>(eps_.size()) == params.config().d_feat,
          "epsilon has the wrong width");

  structural_ = adapter_forward(*seq_.features, params);
  u_pooled_ = adapter_apply(params, pooled_input(*seq_.features, eps_));

  std::vector<int> forced;
  for (const auto &w: t.suffix_words)
    forced.push_back(vocab.word(w));
  forced.push_back(Vocabulary::kBos);
  for (int tok: forced) {
    const auto logits = next_logits();
    forced_logprob_ += logits[tok] - log_sum_exp(logits);
    push(tok);
  }
  forced_ = static_cast<int>(forced.size());
}

std::span<const double> Decoder::element(int p) const {
  const int d = params_.config().d;
  const auto emb = params_.block(ParamBlock::kTokenEmbedding);
  auto row = [&](int id) {
    return emb.subspan(static_cast<std::size_t>(id) * d, d);
  };
  const int m = static_cast<int>(seq_.prefix.size());
  const int start = m + seq_.num_structural();
  if (p < 0)
    return row(Vocabulary::kPad);
  if (p < m)
    return row(seq_.prefix[p]);
  if (p < start)
    return structural_[p - m];
  return row(seq_.suffix[p - start]);
}

std::vector<double> Decoder::next_logits() const {
  const auto &cfg = params_.config();
  const int len = seq_.length();
  std::vector<double> window;
  window.reserve(static_cast<std::size_t>(cfg.window) * cfg.d);
  for (int p = len - cfg.window; p < len; ++p) {
    const auto e = element(p);
    window.insert(window.end(), e.begin(), e.end());
  }
  return lm_logits(params_, window, u_pooled_, eps_);
}

void Decoder::push(int token) {
  if (token < 0 || token >= params_.config().vocab_size)
    throw Error(Errc::kTokenOutOfVocab,
                "token id " + std::to_string(token) + " out of range");
  seq_.suffix.push_back(token);
}

std::vector<double> tempered_probs(std::span<const double> logits,
                                   double temperature) {
  if (!(temperature > 0))
    throw Error(Errc::kOutOfRange, "temperature must be > 0");
  std::vector<double> scaled(logits.begin(), logits.end());
  for (double &x: scaled)
    x /= temperature;
  return softmax(scaled);
}

std::vector<std::pair<int, double>> nucleus(std::span<const double> probs,
                                            double top_p) {
  if (!(top_p > 0 && top_p <= 1))
    throw Error(Errc::kOutOfRange, "top_p must be in (0, 1]");
  std::vector<int> order(probs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return probs[a] > probs[b]; });

  std::vector<std::pair<int, double>> kept;
  double mass = 0;
  for (int id: order) {
    kept.push_back({ id, probs[id] });
    mass += probs[id];
    if (mass >= top_p)
      break;
  }
  for (auto &[id, p]: kept)
    p /= mass;
  return kept;
}

SampleResult sample(const ModelParams &params,
                    std::shared_ptr<const PocketFeatures> features,
                    const SampleOptions &opts, Rng &rng,
                    const Vocabulary &vocab) {
  if (!(opts.temperature > 0))
    throw Error(Errc::kOutOfRange, "temperature must be > 0");
  if (!(opts.top_p > 0 && opts.top_p <= 1))
    throw Error(Errc::kOutOfRange, "top_p must be in (0, 1]");
  if (opts.max_len < 1)
    throw Error(Errc::kOutOfRange, "max_len must be >= 1");

  SampleResult r;
  r.eps.resize(params.config().d_feat);
  for (double &v: r.eps)
    v = rng.normal();

  Decoder dec(params, std::move(features), opts.template_id, r.eps, vocab);
  r.forced_logprob = dec.forced_logprob();
  double model_lp = 0;
  for (int step = 0; step < opts.max_len; ++step) {
    const auto logits = dec.next_logits();
    const auto kept = nucleus(tempered_probs(logits, opts.temperature),
                              opts.top_p);
    const double u = rng.uniform();
    double acc = 0;
    auto choice = kept.back();
    for (const auto &entry: kept) {
      acc += entry.second;
      if (u < acc) {
        choice = entry;
        break;
      }
    }
    r.step_logprob += std::log(choice.second);
    model_lp += logits[choice.first] - log_sum_exp(logits);
    dec.push(choice.first);
    if (choice.first == Vocabulary::kEos) {
      r.terminated = true;
      break;
    }
    r.tokens.push_back(choice.first);
  }
  r.logprob = r.forced_logprob + model_lp;

  for (int t: r.tokens)
    r.smiles += vocab.is_smiles_token(t) ? vocab.token(t)
                                         : "<" + vocab.token(t) + ">";
  return r;
}

}  // namespace molchord
