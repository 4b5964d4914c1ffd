//
// MolChord desk pipeline - Copyright 2026 The MolChord Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molchord/cli/commands.h"

#include <chrono>
#include <iostream>
#include <map>
#include <mutex>
#include <set>

#include <json.hpp>

#include "molchord/curation/curation.h"
#include "molchord/genmodel/checkpoint.h"
#include "molchord/genmodel/templates.h"
#include "molchord/metrics/metrics.h"
#include "molchord/molgraph/molecule.h"
#include "molchord/scorers/dock.h"
#include "molchord/scorers/records.h"
#include "molchord/training/training.h"
#include "molchord/util/hash.h"
#include "molchord/util/io.h"
#include "molchord/util/numfmt.h"
#include "molchord/util/parallel.h"

namespace molchord {
namespace {
  namespace fs = std::filesystem;
  using nlohmann::ordered_json;
  using FeatureMap =
      std::map<std::string, std::shared_ptr<const PocketFeatures>>;

  fs::path normalized(const fs::path &p) {
    return fs::absolute(p).lexically_normal();
  }

  // Per-command bookkeeping: declared inputs, written outputs, the
  // manifest and the wall-clock timing file.
  class Run {
  public:
    Run(std::string command, const RunConfig &config)
        : command_(std::move(command)), config_(config),
          out_(config.paths.out), start_(std::chrono::steady_clock::now()) {
      std::error_code ec;
      fs::create_directories(out_, ec);
    }

    fs::path path(const std::string &name) const { return out_ / name; }

    // Throws MissingArtifact when the file is absent.
    const fs::path &input(const fs::path &p) {
      if (!fs::exists(p))
        throw Error(Errc::kMissingArtifact,
                    command_ + " needs " + p.string()
                        + " (run the upstream command first)");
      inputs_.push_back(p);
      return p;
    }

    void write(const std::string &name, std::string_view data) {
      write_text_file(path(name), data);
      outputs_.push_back(path(name));
    }

    void finish() const {
      ordered_json m;
      m["command"] = command_;
      m["config_hash"] = config_hash(config_);
      m["seed"] = config_.seed;
      m["inputs"] = describe(inputs_);
      m["outputs"] = describe(outputs_);
      write_text_file(out_ / (command_ + ".manifest.json"), m.dump(2) + "\n");

      const double seconds = std::chrono::duration<double>(
                                 std::chrono::steady_clock::now() - start_)
                                 .count();
      ordered_json t;
      t["command"] = command_;
      t["seconds"] = seconds;
      write_text_file(out_ / (command_ + ".timings.json"), t.dump(2) + "\n");
    }

  private:
    ordered_json describe(const std::vector<fs::path> &files) const {
      ordered_json list = ordered_json::array();
      const auto base = normalized(out_);
      for (const auto &f: files) {
        const auto rel = normalized(f).lexically_relative(base);
        ordered_json e;
        e["path"] = rel.empty() ? normalized(f).string() : rel.string();
        e["sha256"] = sha256_file(f);
        list.push_back(std::move(e));
      }
      return list;
    }

    std::string command_;
    const RunConfig &config_;
    fs::path out_;
    std::vector<fs::path> inputs_, outputs_;
    std::chrono::steady_clock::time_point start_;
  };

  std::string jsonl(const std::vector<ordered_json> &rows) {
    std::string out;
    for (const auto &r: rows)
      out += r.dump() + "\n";
    return out;
  }

  std::string pretty(const ordered_json &j) { return j.dump(2) + "\n"; }

  template <class T>
  void put_optional(ordered_json &j, const char *key,
                    const std::optional<T> &v) {
    if (v)
      j[key] = *v;
    else
      j[key] = nullptr;
  }

  std::map<std::string, const ComplexRecord *>
  index_records(const std::vector<ComplexRecord> &records) {
    std::map<std::string, const ComplexRecord *> index;
    for (const auto &r: records)
      index[r.pocket_id] = &r;
    return index;
  }

  FeatureMap featurize_all(const std::vector<const ComplexRecord *> &records,
                           int d_feat, std::uint64_t seed, int jobs) {
    std::vector<std::shared_ptr<const PocketFeatures>> slots(records.size());
    parallel_for(records.size(), jobs, [&](std::size_t i) {
      slots[i] = std::make_shared<const PocketFeatures>(
          featurize_pocket(*records[i], d_feat, seed));
    });
    FeatureMap out;
    for (std::size_t i = 0; i < records.size(); ++i)
      out[records[i]->pocket_id] = slots[i];
    return out;
  }

  Rng draw_rng(std::uint64_t seed, std::string_view tag,
               const std::string &pocket_id, std::uint64_t index) {
    return Rng(stream_seed(seed, std::string(tag) + ":" + pocket_id, index));
  }

  Checkpoint load_model(Run &run, const std::string &name) {
    return load_checkpoint(run.input(run.path(name)));
  }

  std::string curve_jsonl(const std::vector<CurvePoint> &curve) {
    std::vector<ordered_json> rows;
    for (const auto &p: curve) {
      ordered_json j;
      j["step"] = p.step;
      j["loss"] = p.loss;
      put_optional(j, "val_loss", p.val_loss);
      put_optional(j, "margin", p.margin);
      rows.push_back(std::move(j));
    }
    return jsonl(rows);
  }

  DockCommand resolved_dock(const RunConfig &c, const CommandOptions &opts) {
    DockCommand cmd = c.dock;
    const std::string token = "{molchord}";
    for (auto pos = cmd.command.find(token); pos != std::string::npos;
         pos = cmd.command.find(token, pos)) {
      if (opts.self_exe.empty())
        throw Error(Errc::kInvalidConfig,
                    "dock command uses {molchord} but the binary path is "
                    "unknown");
      const auto q = shell_quote(opts.self_exe);
      cmd.command.replace(pos, token.size(), q);
      pos += q.size();
    }
    validate_dock_command(cmd);
    return cmd;
  }

  DockRequest make_request(const RunConfig &c, const ComplexRecord *record,
                           const std::string &pocket_id,
                           const std::string &smiles) {
    DockRequest r;
    r.pocket_id = pocket_id;
    r.smiles = smiles;
    r.pocket_file = c.pocket_dir.empty()
                        ? pocket_id
                        : (c.pocket_dir / (pocket_id + ".pdb")).string();
    if (record != nullptr && !record->ligand_smiles.empty())
      r.center_source = record->ligand_smiles.front();
    return r;
  }

  DockCache open_cache(const RunConfig &c, const DockCommand &cmd) {
    return DockCache(dock_cache_path(cmd, c.paths.out / "cache"));
  }

  ordered_json failure_row(const DockOutcome &o) {
    ordered_json j;
    j["pocket_id"] = o.request.pocket_id;
    j["smiles"] = o.request.smiles;
    j["error"] = std::string(errc_name(*o.error));
    j["message"] = o.message;
    return j;
  }

  std::vector<std::string> distinct(const std::vector<std::string> &xs) {
    std::set<std::string> seen;
    std::vector<std::string> out;
    for (const auto &x: xs)
      if (seen.insert(x).second)
        out.push_back(x);
    return out;
  }

  // Joins generations with scores per evaluation pocket.
  struct Joined {
    std::vector<PocketEval> pockets;
    CoverageReport coverage;
  };

  Joined join_scores(const RunConfig &c, Run &run) {
    const auto records = load_complexes(run.input(c.paths.eval_complexes));
    const auto gens =
        load_generations(run.input(run.path(artifact::kGenerations)));
    const fs::path score_path =
        c.paths.scores.empty() ? run.path(artifact::kScores) : c.paths.scores;
    const auto scores = load_scores(run.input(score_path));

    Joined out;
    out.coverage = coverage_check(gens, scores);
    std::map<std::pair<std::string, std::string>, const ScoreRecord *> by_key;
    for (const auto &s: scores)
      by_key[{ s.pocket_id, s.smiles }] = &s;

    std::map<std::string, std::vector<Generation>> per_pocket;
    for (const auto &g: out.coverage.covered) {
      const auto *s = by_key.at({ g.pocket_id, g.smiles });
      per_pocket[g.pocket_id].push_back(
          { g.smiles, s->vina, s->qed, s->sa_origin });
    }
    const auto index = index_records(records);
    for (const auto &g: gens)
      if (!index.count(g.pocket_id))
        throw Error(Errc::kSchemaViolation,
                    "generation for pocket " + g.pocket_id
                        + " which is not in the evaluation complexes");
    for (const auto &r: records) {
      auto it = per_pocket.find(r.pocket_id);
      if (it == per_pocket.end())
        continue;
      out.pockets.push_back(
          { r.pocket_id, std::move(it->second), r.reference_vina, r.homology });
    }
    return out;
  }

  ordered_json coverage_json(const CoverageReport &cov) {
    ordered_json j;
    j["generations"] = cov.covered.size() + cov.missing.size();
    j["covered"] = cov.covered.size();
    j["missing_count"] = cov.missing.size();
    ordered_json missing = ordered_json::array();
    for (const auto &g: cov.missing)
      missing.push_back({ { "pocket_id", g.pocket_id }, { "smiles", g.smiles } });
    j["missing"] = std::move(missing);
    return j;
  }

  ordered_json ood_json(const OodReport &o) {
    ordered_json j;
    j["homologous_mean_vina"] = o.homologous_mean;
    j["non_homologous_mean_vina"] = o.non_homologous_mean;
    j["delta"] = o.delta;
    j["homologous_pockets"] = o.homologous_pockets;
    j["non_homologous_pockets"] = o.non_homologous_pockets;
    return j;
  }
}  // namespace

int exit_code_for(Errc code) noexcept {
  switch (code) {
  case Errc::kMissingArtifact:
    return kExitMissingArtifact;
  case Errc::kTimeout:
  case Errc::kNonZeroExit:
  case Errc::kUnparseableOutput:
    return kExitExternal;
  case Errc::kIoError:
    return kExitInternal;
  default:
    return kExitValidation;
  }
}

int cmd_partition(const RunConfig &c) {
  Run run("partition", c);
  const auto records = load_complexes(run.input(c.paths.complexes));
  const auto part = partition_dataset(records);
  ordered_json j;
  j["rule"] = "distinct canonical ligands > "
              + std::to_string(kSftLigandThreshold) + " -> sft";
  j["counts"] = { { "total", records.size() },
                  { "sft", part.sft_pool.size() },
                  { "dpo", part.dpo_pool.size() } };
  j["sft_pool"] = part.sft_pool;
  j["dpo_pool"] = part.dpo_pool;
  run.write(artifact::kPartition, pretty(j));
  run.finish();
  return kExitOk;
}

int cmd_train_sft(const RunConfig &c) {
  Run run("train-sft", c);
  const auto records = load_complexes(run.input(c.paths.complexes));
  const auto part = partition_dataset(records);
  const std::set<std::string> sft_ids(part.sft_pool.begin(),
                                      part.sft_pool.end());
  std::vector<const ComplexRecord *> pool;
  for (const auto &r: records)
    if (sft_ids.count(r.pocket_id))
      pool.push_back(&r);
  const auto features = featurize_all(pool, c.model.d_feat, c.seed, c.jobs);

  const auto family = template_family("sbdd");
  std::vector<SftExample> examples;
  std::size_t skipped = 0;
  for (const auto *r: pool) {
    for (const auto &lig: distinct(r->ligand_smiles)) {
      try {
        examples.push_back(make_sft_example(
            features.at(r->pocket_id), lig,
            family[examples.size() % family.size()]));
      } catch (const Error &e) {
        if (e.code() != Errc::kTokenOutOfVocab)
          throw;
        ++skipped;
      }
    }
  }

  ModelParams init(c.model);
  init_params(init, stream_seed(c.seed, "init", 0));
  const auto tc = sft_train_config(c);
  auto result = train_sft(examples, init, tc);
  result.checkpoint.config_hash = config_hash(c);
  const auto [train, val] = split_validation(examples, tc.val_fraction);

  ordered_json data;
  data["pockets"] = pool.size();
  data["examples"] = examples.size();
  data["train_examples"] = train.size();
  data["validation_examples"] = val.size();
  data["skipped_out_of_vocab"] = skipped;
  data["best_step"] = result.checkpoint.step;
  put_optional(data, "best_val_loss", result.checkpoint.val_loss);
  run.write(artifact::kSftCheckpoint, serialize_checkpoint(result.checkpoint));
  run.write(artifact::kSftCurve, curve_jsonl(result.curve));
  run.write(artifact::kSftReport, pretty(data));
  run.finish();
  return kExitOk;
}

int cmd_curate(const RunConfig &c, const CommandOptions &opts) {
  Run run("curate", c);
  const auto records = load_complexes(run.input(c.paths.complexes));
  const auto model = load_model(run, artifact::kSftCheckpoint);
  const auto dock = resolved_dock(c, opts);
  const auto part = partition_dataset(records);
  const auto index = index_records(records);
  std::vector<const ComplexRecord *> pool;
  for (const auto &id: part.dpo_pool)
    pool.push_back(index.at(id));
  const auto features =
      featurize_all(pool, model.params.config().d_feat, c.seed, c.jobs);
  const auto so = sample_options(c);

  auto draw = [&](const std::string &tag, const std::string &pocket, int n) {
    std::vector<std::string> out;
    for (int i = 0; i < n; ++i) {
      Rng rng = draw_rng(c.seed, tag, pocket, static_cast<std::uint64_t>(i));
      auto res = sample(model.params, features.at(pocket), so, rng);
      out.push_back(res.terminated ? std::move(res.smiles) : std::string());
    }
    return out;
  };

  std::mutex mutex;
  std::map<std::string, std::vector<std::string>> drawn;
  const Sampler sampler = [&](const std::string &pocket, int n) {
    auto out = draw("curate", pocket, n);
    std::lock_guard lock(mutex);
    drawn[pocket] = out;
    return out;
  };
  CurationOptions co;
  co.n_samples = c.curate.n_candidates;
  co.threshold = c.curate.diversity_threshold;
  co.jobs = c.jobs;
  const auto curated = curate_dpo_set(part.dpo_pool, sampler, co);

  // Candidates to score for every selected pocket.
  std::vector<std::vector<std::string>> candidates(curated.selected.size());
  parallel_for(curated.selected.size(), c.jobs, [&](std::size_t i) {
    const auto &pocket = curated.selected[i];
    if (c.curate.flow == CurationFlow::kOffline) {
      candidates[i] = distinct(
          select_for_docking(drawn.at(pocket), c.curate.n_candidates));
    } else {
      candidates[i] = select_for_docking(
          draw("curate-online", pocket, c.curate.online_candidates),
          c.curate.online_docked);
    }
  });

  std::vector<DockRequest> requests;
  for (std::size_t i = 0; i < curated.selected.size(); ++i)
    for (const auto &smi: candidates[i])
      requests.push_back(make_request(c, index.at(curated.selected[i]),
                                      curated.selected[i], smi));
  auto cache = open_cache(c, dock);
  const auto outcomes = dock_batch(dock, requests, cache);

  std::map<std::string, std::vector<ScoredCandidate>> scored;
  std::map<std::string, int> failures;
  std::vector<ordered_json> score_rows, failure_rows;
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto &o: outcomes) {
    const auto &pocket = o.request.pocket_id;
    if (!o.vina) {
      ++failures[pocket];
      failure_rows.push_back(failure_row(o));
      continue;
    }
    const int fused = count_fused_rings(parse_smiles(o.request.smiles));
    scored[pocket].push_back({ o.request.smiles, *o.vina, fused });
    if (seen.insert({ pocket, o.request.smiles }).second) {
      ordered_json j;
      j["pocket_id"] = pocket;
      j["smiles"] = o.request.smiles;
      j["vina"] = *o.vina;
      j["fused_rings"] = fused;
      j["reward"] = reward(*o.vina, fused, c.curate.lambda);
      score_rows.push_back(std::move(j));
    }
  }

  std::vector<PreferencePair> pairs;
  std::vector<ordered_json> audit_rows;
  for (const auto &a: curated.audit) {
    ordered_json j;
    j["pocket_id"] = a.pocket_id;
    j["valid"] = a.valid;
    put_optional(j, "diversity", a.diversity);
    j["kept"] = a.kept;
    std::string reason = a.reason;
    if (a.kept) {
      j["scored"] = scored[a.pocket_id].size();
      j["dock_failures"] = failures[a.pocket_id];
      try {
        pairs.push_back(build_preference_pairs(
            a.pocket_id, scored[a.pocket_id], c.curate.lambda));
      } catch (const Error &e) {
        reason = e.what();
      }
    }
    j["pair"] = a.kept && reason.empty();
    j["reason"] = reason;
    audit_rows.push_back(std::move(j));
  }

  run.write(artifact::kCurationAudit, jsonl(audit_rows));
  run.write(artifact::kCurationScores, jsonl(score_rows));
  run.write(artifact::kPairs, serialize_pairs(pairs));
  if (!failure_rows.empty())
    run.write("curation_dock_failures.jsonl", jsonl(failure_rows));
  run.finish();
  if (pairs.empty() && !failure_rows.empty())
    return kExitExternal;
  return kExitOk;
}

int cmd_train_dpo(const RunConfig &c) {
  Run run("train-dpo", c);
  const auto records = load_complexes(run.input(c.paths.complexes));
  const auto sft = load_model(run, artifact::kSftCheckpoint);
  const auto pairs = load_pairs(run.input(run.path(artifact::kPairs)));
  if (pairs.empty())
    throw Error(Errc::kEmptyBatch, "no preference pairs in "
                                       + run.path(artifact::kPairs).string());
  const auto index = index_records(records);
  std::vector<const ComplexRecord *> pool;
  for (const auto &p: pairs) {
    const auto it = index.find(p.pocket_id);
    if (it == index.end())
      throw Error(Errc::kSchemaViolation,
                  "pair for pocket " + p.pocket_id + " not in complexes");
    pool.push_back(it->second);
  }
  const int d_feat = sft.params.config().d_feat;
  const auto features = featurize_all(pool, d_feat, c.seed, c.jobs);
  const auto &vocab = Vocabulary::standard();

  std::vector<DpoExample> examples;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto &p = pairs[i];
    const auto *rec = index.at(p.pocket_id);
    DpoExample ex;
    ex.features = features.at(p.pocket_id);
    ex.template_id = c.sample.template_id;
    ex.chosen = vocab.encode_smiles(p.chosen);
    ex.rejected = vocab.encode_smiles(p.rejected);
    const auto lig = rec->ligand_smiles.empty()
                         ? std::vector<double>(d_feat, 0.0)
                         : ligand_features(
                             parse_smiles(rec->ligand_smiles.front()), d_feat);
    ex.complex = complex_features(*ex.features, lig);
    Rng rng = draw_rng(c.seed, "dpo-noise", p.pocket_id, i);
    ex.z.resize(d_feat);
    for (double &v: ex.z)
      v = rng.normal();
    examples.push_back(std::move(ex));
  }

  auto result = train_dpo(examples, sft.params, dpo_train_config(c));
  result.checkpoint.config_hash = config_hash(c);
  run.write(artifact::kDpoCheckpoint, serialize_checkpoint(result.checkpoint));
  run.write(artifact::kDpoCurve, curve_jsonl(result.curve));
  run.finish();
  return kExitOk;
}

int cmd_sample(const RunConfig &c, const CommandOptions &opts) {
  Run run("sample", c);
  const auto records = load_complexes(run.input(c.paths.eval_complexes));
  const auto model = load_model(run, c.sample.model == "sft"
                                         ? artifact::kSftCheckpoint
                                         : artifact::kDpoCheckpoint);
  std::vector<const ComplexRecord *> pool;
  for (const auto &r: records)
    pool.push_back(&r);
  const auto features =
      featurize_all(pool, model.params.config().d_feat, c.seed, c.jobs);
  const auto so = sample_options(c);

  struct PocketDraws {
    std::vector<GenerationRecord> gens;
    int attempts = 0, invalid = 0, duplicates = 0;
  };
  std::vector<PocketDraws> slots(pool.size());
  parallel_for(pool.size(), c.jobs, [&](std::size_t i) {
    const auto &id = pool[i]->pocket_id;
    auto &slot = slots[i];
    std::set<std::string> seen;
    const int cap = c.sample.n_eval + c.sample.retry_cap;
    while (static_cast<int>(slot.gens.size()) < c.sample.n_eval
           && slot.attempts < cap) {
      Rng rng = draw_rng(c.seed, "sample", id,
                         static_cast<std::uint64_t>(slot.attempts++));
      const auto res = sample(model.params, features.at(id), so, rng);
      std::string canon;
      try {
        if (!res.terminated)
          throw Error(Errc::kEmptyInput, "no EOS");
        canon = canonicalize(res.smiles);
      } catch (const Error &) {
        ++slot.invalid;
        continue;
      }
      if (!seen.insert(canon).second) {
        ++slot.duplicates;
        continue;
      }
      slot.gens.push_back({ id, canon, res.logprob, std::nullopt });
    }
  });

  std::vector<GenerationRecord> gens;
  std::vector<ordered_json> report;
  int flagged = 0;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const auto &s = slots[i];
    gens.insert(gens.end(), s.gens.begin(), s.gens.end());
    const bool short_of = static_cast<int>(s.gens.size()) < c.sample.n_eval;
    flagged += short_of;
    ordered_json j;
    j["pocket_id"] = pool[i]->pocket_id;
    j["unique"] = s.gens.size();
    j["attempts"] = s.attempts;
    j["invalid"] = s.invalid;
    j["duplicates"] = s.duplicates;
    j["flagged"] = short_of;
    if (short_of)
      j["error"] = std::string(errc_name(Errc::kRetryCapExceeded));
    report.push_back(std::move(j));
  }
  run.write(artifact::kGenerations, serialize_generations(gens));
  run.write(artifact::kSampleReport, jsonl(report));
  run.finish();
  if (flagged > 0) {
    std::cerr << errc_name(Errc::kRetryCapExceeded) << ": " << flagged
              << " pocket(s) yielded fewer than " << c.sample.n_eval
              << " unique valid molecules; see "
              << run.path(artifact::kSampleReport).string() << "\n";
    if (!opts.allow_partial)
      return kExitValidation;
  }
  return kExitOk;
}

int cmd_dock(const RunConfig &c, const CommandOptions &opts) {
  Run run("dock", c);
  const auto records = load_complexes(run.input(c.paths.eval_complexes));
  const auto gens =
      load_generations(run.input(run.path(artifact::kGenerations)));
  const auto dock = resolved_dock(c, opts);
  const auto index = index_records(records);

  std::vector<DockRequest> requests;
  for (const auto &g: gens) {
    const auto it = index.find(g.pocket_id);
    requests.push_back(make_request(
        c, it == index.end() ? nullptr : it->second, g.pocket_id, g.smiles));
  }
  auto cache = open_cache(c, dock);
  const auto outcomes = dock_batch(dock, requests, cache);

  std::vector<ScoreRecord> scores;
  std::vector<ordered_json> failures;
  std::set<std::pair<std::string, std::string>> seen;
  int exit = kExitOk;
  for (const auto &o: outcomes) {
    if (o.vina) {
      if (seen.insert({ o.request.pocket_id, o.request.smiles }).second)
        scores.push_back({ o.request.pocket_id, o.request.smiles, *o.vina,
                           std::nullopt, std::nullopt, std::nullopt });
      continue;
    }
    failures.push_back(failure_row(o));
    exit = std::max(exit, exit_code_for(*o.error));
  }
  run.write(artifact::kScores, serialize_scores(scores));
  run.write(artifact::kDockFailures, jsonl(failures));
  run.finish();
  if (!failures.empty())
    std::cerr << failures.size() << " docking request(s) failed; see "
              << run.path(artifact::kDockFailures).string() << "\n";
  return exit;
}

int cmd_evaluate(const RunConfig &c, const CommandOptions &opts) {
  Run run("evaluate", c);
  auto joined = join_scores(c, run);
  run.write(artifact::kCoverage, pretty(coverage_json(joined.coverage)));
  if (!joined.coverage.missing.empty() && !opts.allow_partial) {
    run.finish();
    std::cerr << errc_name(Errc::kScoreCoverageGap) << ": "
              << joined.coverage.missing.size()
              << " generation(s) have no score; see "
              << run.path(artifact::kCoverage).string()
              << " or pass --allow-partial\n";
    return kExitValidation;
  }
  if (joined.pockets.empty())
    throw Error(Errc::kEmptyInput, "no scored generations to evaluate");

  const auto report = evaluate(joined.pockets, c.jobs);
  ordered_json m;
  m["pockets"] = report.per_pocket.size();
  m["mean_vina"] = report.mean_vina;
  put_optional(m, "high_affinity", report.high_affinity);
  put_optional(m, "mean_qed", report.mean_qed);
  put_optional(m, "mean_sa", report.mean_sa);
  put_optional(m, "diversity", report.diversity);
  put_optional(m, "success_rate", report.success_rate);
  m["fused_ring_mean"] = report.fused_ring_mean;
  m["partial"] = !joined.coverage.missing.empty();
  if (report.ood)
    m["ood"] = ood_json(*report.ood);
  else
    m["ood"] = nullptr;

  std::vector<ordered_json> rows;
  for (const auto &r: report.per_pocket) {
    ordered_json j;
    j["pocket_id"] = r.pocket_id;
    j["num_generations"] = r.num_generations;
    j["mean_vina"] = r.mean_vina;
    put_optional(j, "high_affinity", r.high_affinity);
    put_optional(j, "mean_qed", r.mean_qed);
    put_optional(j, "mean_sa", r.mean_sa);
    put_optional(j, "diversity", r.diversity);
    put_optional(j, "success_rate", r.success_rate);
    j["fused_ring_mean"] = r.fused_ring_mean;
    rows.push_back(std::move(j));
  }
  run.write(artifact::kMetrics, pretty(m));
  run.write(artifact::kPerPocket, jsonl(rows));
  run.finish();
  return kExitOk;
}

int cmd_report(const RunConfig &c, const CommandOptions &opts) {
  Run run("report", c);
  const auto joined = join_scores(c, run);
  if (!joined.coverage.missing.empty() && !opts.allow_partial)
    throw Error(Errc::kScoreCoverageGap,
                std::to_string(joined.coverage.missing.size())
                    + " generation(s) have no score; pass --allow-partial");
  const bool both = !opts.fused && !opts.ood;

  if (opts.fused || both) {
    const auto fr = fused_ring_report(joined.pockets, c.top_k);
    ordered_json j;
    j["top_k"] = c.top_k;
    j["pockets"] = joined.pockets.size();
    j["num_compounds"] = fr.num_compounds;
    j["mean_fused_rings"] = fr.mean;
    ordered_json hist = ordered_json::object();
    for (const auto &[k, n]: fr.histogram)
      hist[std::to_string(k)] = n;
    j["histogram"] = std::move(hist);
    run.write(artifact::kFusedReport, pretty(j));
  }
  if (opts.ood || both) {
    try {
      run.write(artifact::kOodReport, pretty(ood_json(ood_report(joined.pockets))));
    } catch (const Error &e) {
      if (opts.ood || (e.code() != Errc::kUnlabeledPocket
                       && e.code() != Errc::kEmptyGroup))
        throw;
    }
  }
  run.finish();
  return kExitOk;
}

int cmd_verify(const fs::path &out_dir) {
  if (!fs::is_directory(out_dir))
    throw Error(Errc::kMissingArtifact, "no output directory " + out_dir.string());
  std::vector<fs::path> manifests;
  for (const auto &e: fs::directory_iterator(out_dir)) {
    const auto name = e.path().filename().string();
    if (name.size() > 14 && name.ends_with(".manifest.json"))
      manifests.push_back(e.path());
  }
  std::sort(manifests.begin(), manifests.end());
  if (manifests.empty())
    throw Error(Errc::kMissingArtifact,
                "no manifests in " + out_dir.string());

  int files = 0, bad = 0, missing = 0;
  // Every file produced by one command and consumed by another must carry
  // the same digest on both sides.
  std::map<std::string, std::string> produced;
  for (const auto &m: manifests) {
    const auto j = nlohmann::json::parse(read_text_file(m));
    for (const char *side: { "outputs", "inputs" }) {
      for (const auto &entry: j.at(side)) {
        const fs::path rel = entry.at("path").get<std::string>();
        const auto want = entry.at("sha256").get<std::string>();
        const fs::path file = rel.is_absolute() ? rel : out_dir / rel;
        ++files;
        if (!fs::exists(file)) {
          ++missing;
          std::cout << "MISSING " << file.string() << " ("
                    << m.filename().string() << ")\n";
          continue;
        }
        if (sha256_file(file) != want) {
          ++bad;
          std::cout << "CHANGED " << file.string() << " ("
                    << m.filename().string() << ")\n";
        }
        if (std::string(side) == "outputs")
          produced[normalized(file).string()] = want;
      }
    }
  }
  for (const auto &m: manifests) {
    const auto j = nlohmann::json::parse(read_text_file(m));
    for (const auto &entry: j.at("inputs")) {
      const fs::path rel = entry.at("path").get<std::string>();
      const fs::path file = rel.is_absolute() ? rel : out_dir / rel;
      const auto it = produced.find(normalized(file).string());
      if (it != produced.end() && it->second != entry.at("sha256")) {
        ++bad;
        std::cout << "STALE " << file.string() << " consumed by "
                  << m.filename().string() << "\n";
      }
    }
  }
  std::cout << "verified " << files << " file reference(s) in "
            << manifests.size() << " manifest(s): " << bad << " changed, "
            << missing << " missing\n";
  if (missing > 0)
    return kExitMissingArtifact;
  return bad > 0 ? kExitValidation : kExitOk;
}

int cmd_make_fixture(const fs::path &dir, const FixtureOptions &opts) {
  const auto set = make_fixture(opts);
  write_text_file(dir / "complexes.jsonl", serialize_complexes(set.complexes));
  write_text_file(dir / "eval_complexes.jsonl",
                  serialize_complexes(set.eval_complexes));
  std::string ini;
  ini += "[paths]\n";
  ini += "complexes = complexes.jsonl\n";
  ini += "eval_complexes = eval_complexes.jsonl\n";
  ini += "out = run\n\n";
  ini += "[model]\n";
  ini += "d = 32\nd_feat = 32\nadapter_hidden = 32\nhidden = 64\nwindow = 8\n\n";
  ini += "[train]\n";
  ini += "sft_steps = 300\neval_every = 50\nval_fraction = 0.05\n\n";
  ini += "[sample]\n";
  ini += "n_eval = 20\nmax_len = 256\n\n";
  ini += "[curate]\n";
  ini += "n_candidates = 20\n\n";
  ini += "[dock]\n";
  ini += "command = {molchord} surrogate-dock --smiles {smiles}\n";
  ini += "timeout = 60\nmax_parallel = 1\n\n";
  ini += "[run]\n";
  ini += "seed = " + std::to_string(opts.seed) + "\njobs = 1\n";
  write_text_file(dir / "config.ini", ini);
  return kExitOk;
}

}  // namespace molchord
