//
// MolChord desk pipeline - Copyright 2026 The MolChord Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molchord/cli/config.h"

#include <functional>
#include <map>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "molchord/error.h"
#include "molchord/util/hash.h"
#include "molchord/util/numfmt.h"

namespace molchord {
namespace {
  namespace pt = boost::property_tree;
  namespace fs = std::filesystem;

  [[noreturn]] void invalid(const std::string &what) {
    throw Error(Errc::kInvalidConfig, what);
  }

  double to_double(const std::string &key, const std::string &text) {
    const auto v = parse_double(text);
    if (!v)
      invalid(key + ": '" + text + "' is not a number");
    return *v;
  }

  long long to_integer(const std::string &key, const std::string &text) {
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(text, &used);
    } catch (const std::exception &) {
      invalid(key + ": '" + text + "' is not an integer");
    }
    if (used != text.size())
      invalid(key + ": '" + text + "' is not an integer");
    return v;
  }

  using Setter = std::function<void(RunConfig &, const std::string &,
                                    const fs::path &base)>;

  fs::path resolve(const fs::path &base, const std::string &text) {
    fs::path p(text);
    return p.is_absolute() || text.empty() ? p : base / p;
  }

  // Every recognized "section.key" and how to apply it.
  const std::map<std::string, Setter> &setters() {
    static const std::map<std::string, Setter> table = [] {
      std::map<std::string, Setter> t;
      auto path = [&](const std::string &k, fs::path RunConfig::Paths::*m) {
        t[k] = [m](RunConfig &c, const std::string &v, const fs::path &b) {
          c.paths.*m = resolve(b, v);
        };
      };
      auto real = [&](const std::string &k, auto get) {
        t[k] = [k, get](RunConfig &c, const std::string &v, const fs::path &) {
          get(c) = to_double(k, v);
        };
      };
      auto integer = [&](const std::string &k, auto get) {
        t[k] = [k, get](RunConfig &c, const std::string &v, const fs::path &) {
          get(c) = static_cast<std::remove_reference_t<decltype(get(c))>>(
              to_integer(k, v));
        };
      };

      path("paths.complexes", &RunConfig::Paths::complexes);
      path("paths.eval_complexes", &RunConfig::Paths::eval_complexes);
      path("paths.scores", &RunConfig::Paths::scores);
      path("paths.out", &RunConfig::Paths::out);
      t["paths.pocket_dir"] = [](RunConfig &c, const std::string &v,
                                 const fs::path &b) {
        c.pocket_dir = resolve(b, v);
      };

      integer("model.d", [](RunConfig &c) -> int & { return c.model.d; });
      integer("model.d_feat",
              [](RunConfig &c) -> int & { return c.model.d_feat; });
      integer("model.adapter_hidden",
              [](RunConfig &c) -> int & { return c.model.adapter_hidden; });
      integer("model.hidden",
              [](RunConfig &c) -> int & { return c.model.hidden; });
      integer("model.window",
              [](RunConfig &c) -> int & { return c.model.window; });

      real("train.sft_learning_rate",
           [](RunConfig &c) -> double & { return c.train.sft_learning_rate; });
      real("train.dpo_learning_rate",
           [](RunConfig &c) -> double & { return c.train.dpo_learning_rate; });
      integer("train.batch_size",
              [](RunConfig &c) -> int & { return c.train.batch_size; });
      integer("train.dpo_batch_size",
              [](RunConfig &c) -> int & { return c.train.dpo_batch_size; });
      integer("train.sft_steps",
              [](RunConfig &c) -> int & { return c.train.sft_steps; });
      integer("train.sft_epochs",
              [](RunConfig &c) -> int & { return c.train.sft_epochs; });
      integer("train.dpo_epochs",
              [](RunConfig &c) -> int & { return c.train.dpo_epochs; });
      real("train.beta_vae",
           [](RunConfig &c) -> double & { return c.train.beta_vae; });
      real("train.beta_dpo",
           [](RunConfig &c) -> double & { return c.train.beta_dpo; });
      real("train.clip_norm",
           [](RunConfig &c) -> double & { return c.train.clip_norm; });
      real("train.val_fraction",
           [](RunConfig &c) -> double & { return c.train.val_fraction; });
      integer("train.eval_every",
              [](RunConfig &c) -> int & { return c.train.eval_every; });
      t["train.optimizer"] = [](RunConfig &c, const std::string &v,
                                const fs::path &) {
        if (v == "adam")
          c.train.optimizer = OptimizerKind::kAdam;
        else if (v == "sgd")
          c.train.optimizer = OptimizerKind::kSgd;
        else
          invalid("train.optimizer must be adam or sgd");
      };

      real("sample.temperature",
           [](RunConfig &c) -> double & { return c.sample.temperature; });
      real("sample.top_p",
           [](RunConfig &c) -> double & { return c.sample.top_p; });
      integer("sample.max_len",
              [](RunConfig &c) -> int & { return c.sample.max_len; });
      integer("sample.n_eval",
              [](RunConfig &c) -> int & { return c.sample.n_eval; });
      integer("sample.retry_cap",
              [](RunConfig &c) -> int & { return c.sample.retry_cap; });
      t["sample.template"] = [](RunConfig &c, const std::string &v,
                                const fs::path &) { c.sample.template_id = v; };
      t["sample.model"] = [](RunConfig &c, const std::string &v,
                             const fs::path &) { c.sample.model = v; };

      t["curate.flow"] = [](RunConfig &c, const std::string &v,
                            const fs::path &) {
        if (v == "offline")
          c.curate.flow = CurationFlow::kOffline;
        else if (v == "online")
          c.curate.flow = CurationFlow::kOnline;
        else
          invalid("curate.flow must be offline or online");
      };
      integer("curate.n_candidates",
              [](RunConfig &c) -> int & { return c.curate.n_candidates; });
      integer("curate.online_candidates",
              [](RunConfig &c) -> int & { return c.curate.online_candidates; });
      integer("curate.online_docked",
              [](RunConfig &c) -> int & { return c.curate.online_docked; });
      real("curate.diversity_threshold", [](RunConfig &c) -> double & {
        return c.curate.diversity_threshold;
      });
      real("curate.lambda",
           [](RunConfig &c) -> double & { return c.curate.lambda; });

      integer("metrics.top_k", [](RunConfig &c) -> int & { return c.top_k; });

      t["dock.command"] = [](RunConfig &c, const std::string &v,
                             const fs::path &) { c.dock.command = v; };
      real("dock.timeout",
           [](RunConfig &c) -> double & { return c.dock.timeout; });
      integer("dock.max_parallel",
              [](RunConfig &c) -> int & { return c.dock.max_parallel; });

      integer("run.seed",
              [](RunConfig &c) -> std::uint64_t & { return c.seed; });
      integer("run.jobs", [](RunConfig &c) -> int & { return c.jobs; });
      return t;
    }();
    return table;
  }

  std::string flow_name(CurationFlow f) {
    return f == CurationFlow::kOffline ? "offline" : "online";
  }
}  // namespace

RunConfig load_run_config(const fs::path &file) {
  if (!fs::exists(file))
    throw Error(Errc::kMissingArtifact, "missing config " + file.string());
  pt::ptree tree;
  try {
    pt::read_ini(file.string(), tree);
  } catch (const pt::ini_parser_error &e) {
    invalid(e.what());
  }
  RunConfig config;
  const fs::path base = file.has_parent_path() ? file.parent_path() : ".";
  for (const auto &[section, body]: tree) {
    if (body.empty() && !body.data().empty())
      invalid("key '" + section + "' must sit inside a section");
    for (const auto &[key, value]: body) {
      const std::string name = section + "." + key;
      const auto it = setters().find(name);
      if (it == setters().end())
        invalid("unknown setting " + name);
      it->second(config, value.data(), base);
    }
  }
  if (config.paths.eval_complexes.empty())
    config.paths.eval_complexes = config.paths.complexes;
  validate_run_config(config);
  return config;
}

void validate_run_config(const RunConfig &c) {
  auto need = [](bool ok, const std::string &what) {
    if (!ok)
      invalid(what);
  };
  need(c.model.d > 0 && c.model.d_feat > 0 && c.model.adapter_hidden > 0
           && c.model.hidden > 0 && c.model.window > 0,
       "model dimensions must be positive");
  need(c.train.sft_learning_rate >= 0 && c.train.dpo_learning_rate >= 0,
       "learning rates must be >= 0");
  need(c.train.batch_size > 0 && c.train.dpo_batch_size > 0,
       "batch sizes must be positive");
  need(c.train.sft_steps >= 0 && c.train.sft_epochs >= 1
           && c.train.dpo_epochs >= 1,
       "steps must be >= 0 and epochs >= 1");
  need(c.train.beta_vae >= 0 && c.train.beta_dpo >= 0, "betas must be >= 0");
  need(c.train.val_fraction >= 0 && c.train.val_fraction < 1,
       "train.val_fraction must be in [0, 1)");
  need(c.sample.temperature > 0, "sample.temperature must be > 0");
  need(c.sample.top_p > 0 && c.sample.top_p <= 1,
       "sample.top_p must be in (0, 1]");
  need(c.sample.max_len >= 1, "sample.max_len must be >= 1");
  need(c.sample.n_eval >= 1 && c.sample.retry_cap >= 0,
       "sample.n_eval must be >= 1 and retry_cap >= 0");
  need(c.sample.model == "sft" || c.sample.model == "dpo",
       "sample.model must be sft or dpo");
  need(c.curate.n_candidates >= 2 && c.curate.online_candidates >= 1
           && c.curate.online_docked >= 2,
       "curation counts too small");
  need(c.curate.diversity_threshold >= 0 && c.curate.diversity_threshold <= 1,
       "curate.diversity_threshold must be in [0, 1]");
  need(c.curate.lambda >= 0, "curate.lambda must be >= 0");
  need(c.top_k >= 1, "metrics.top_k must be >= 1");
  need(c.jobs >= 1, "run.jobs must be >= 1");
  need(c.dock.timeout > 0 && c.dock.max_parallel >= 1,
       "dock.timeout must be > 0 and dock.max_parallel >= 1");
}

std::string config_fingerprint(const RunConfig &c) {
  std::string out;
  auto put = [&](const std::string &k, const std::string &v) {
    out += k + "=" + v + "\n";
  };
  auto num = [](double v) { return format_double(v); };
  put("model.d", std::to_string(c.model.d));
  put("model.d_feat", std::to_string(c.model.d_feat));
  put("model.adapter_hidden", std::to_string(c.model.adapter_hidden));
  put("model.hidden", std::to_string(c.model.hidden));
  put("model.window", std::to_string(c.model.window));
  put("model.vocab_size", std::to_string(c.model.vocab_size));
  put("train.sft_learning_rate", num(c.train.sft_learning_rate));
  put("train.dpo_learning_rate", num(c.train.dpo_learning_rate));
  put("train.batch_size", std::to_string(c.train.batch_size));
  put("train.dpo_batch_size", std::to_string(c.train.dpo_batch_size));
  put("train.sft_steps", std::to_string(c.train.sft_steps));
  put("train.sft_epochs", std::to_string(c.train.sft_epochs));
  put("train.dpo_epochs", std::to_string(c.train.dpo_epochs));
  put("train.beta_vae", num(c.train.beta_vae));
  put("train.beta_dpo", num(c.train.beta_dpo));
  put("train.clip_norm", num(c.train.clip_norm));
  put("train.val_fraction", num(c.train.val_fraction));
  put("train.eval_every", std::to_string(c.train.eval_every));
  put("train.optimizer",
      c.train.optimizer == OptimizerKind::kAdam ? "adam" : "sgd");
  put("sample.temperature", num(c.sample.temperature));
  put("sample.top_p", num(c.sample.top_p));
  put("sample.max_len", std::to_string(c.sample.max_len));
  put("sample.n_eval", std::to_string(c.sample.n_eval));
  put("sample.retry_cap", std::to_string(c.sample.retry_cap));
  put("sample.template", c.sample.template_id);
  put("sample.model", c.sample.model);
  put("curate.flow", flow_name(c.curate.flow));
  put("curate.n_candidates", std::to_string(c.curate.n_candidates));
  put("curate.online_candidates", std::to_string(c.curate.online_candidates));
  put("curate.online_docked", std::to_string(c.curate.online_docked));
  put("curate.diversity_threshold", num(c.curate.diversity_threshold));
  put("curate.lambda", num(c.curate.lambda));
  put("metrics.top_k", std::to_string(c.top_k));
  put("dock.command", c.dock.command);
  put("run.seed", std::to_string(c.seed));
  return out;
}

std::string config_hash(const RunConfig &config) {
  return sha256_hex(config_fingerprint(config));
}

TrainConfig sft_train_config(const RunConfig &c) {
  TrainConfig t;
  t.learning_rate = c.train.sft_learning_rate;
  t.batch_size = c.train.batch_size;
  t.steps = c.train.sft_steps;
  t.epochs = c.train.sft_epochs;
  t.beta_vae = c.train.beta_vae;
  t.beta_dpo = c.train.beta_dpo;
  t.seed = stream_seed(c.seed, "train-sft", 0);
  t.optimizer = c.train.optimizer;
  t.clip_norm = c.train.clip_norm;
  t.val_fraction = c.train.val_fraction;
  t.eval_every = c.train.eval_every;
  t.jobs = c.jobs;
  return t;
}

TrainConfig dpo_train_config(const RunConfig &c) {
  TrainConfig t = sft_train_config(c);
  t.learning_rate = c.train.dpo_learning_rate;
  t.batch_size = c.train.dpo_batch_size;
  t.steps = 0;
  t.epochs = c.train.dpo_epochs;
  t.seed = stream_seed(c.seed, "train-dpo", 0);
  return t;
}

SampleOptions sample_options(const RunConfig &c) {
  SampleOptions o;
  o.temperature = c.sample.temperature;
  o.top_p = c.sample.top_p;
  o.max_len = c.sample.max_len;
  o.template_id = c.sample.template_id;
  return o;
}

}  // namespace molchord
