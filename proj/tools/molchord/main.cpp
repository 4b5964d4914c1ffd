//
// MolChord desk pipeline - Copyright 2026 The MolChord Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "molchord/cli/commands.h"
#include "molchord/fixtures/synthetic.h"
#include "molchord/util/numfmt.h"

namespace mc = molchord;
namespace fs = std::filesystem;

namespace {
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs, top_k, max_len;
  std::optional<double> temperature, top_p, beta_dpo, beta_vae, lambda;
  std::optional<std::string> out;
};

mc::RunConfig resolve(const std::string &config_file, const Overrides &o) {
  auto c = mc::load_run_config(config_file);
  if (o.seed)
    c.seed = *o.seed;
  if (o.jobs)
    c.jobs = *o.jobs;
  if (o.top_k)
    c.top_k = *o.top_k;
  if (o.max_len)
    c.sample.max_len = *o.max_len;
  if (o.temperature)
    c.sample.temperature = *o.temperature;
  if (o.top_p)
    c.sample.top_p = *o.top_p;
  if (o.beta_dpo)
    c.train.beta_dpo = *o.beta_dpo;
  if (o.beta_vae)
    c.train.beta_vae = *o.beta_vae;
  if (o.lambda)
    c.curate.lambda = *o.lambda;
  if (o.out)
    c.paths.out = *o.out;
  mc::validate_run_config(c);
  return c;
}

std::string self_exe(const char *argv0) {
  std::error_code ec;
  auto p = fs::read_symlink("/proc/self/exe", ec);
  if (ec)
    p = fs::absolute(argv0);
  return p.string();
}
}  // namespace

int main(int argc, char **argv) {
  CLI::App app { "molchord: pocket-conditioned ligand generation pipeline" };
  app.require_subcommand(1);

  std::string config_file = "config.ini";
  Overrides o;
  mc::CommandOptions opts;
  opts.self_exe = self_exe(argv[0]);

  auto add_common = [&](CLI::App *sub) {
    sub->add_option("--config", config_file, "Run configuration file")
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "Base seed");
    sub->add_option("--jobs", o.jobs, "Worker threads");
    sub->add_option("--out", o.out, "Output directory");
  };
  auto add_sampling = [&](CLI::App *sub) {
    sub->add_option("--temperature", o.temperature);
    sub->add_option("--top-p", o.top_p);
    sub->add_option("--max-len", o.max_len, "Maximum sampled tokens");
  };

  auto *partition = app.add_subcommand("partition", "Split pockets into SFT and DPO pools");
  auto *train_sft = app.add_subcommand("train-sft", "Supervised fine-tuning");
  auto *curate = app.add_subcommand("curate", "Build preference pairs");
  auto *train_dpo = app.add_subcommand("train-dpo", "Preference optimization");
  auto *sample = app.add_subcommand("sample", "Generate molecules per pocket");
  auto *dock = app.add_subcommand("dock", "Score generations with the dock command");
  auto *evaluate = app.add_subcommand("evaluate", "Compute metrics");
  auto *report = app.add_subcommand("report", "Fused-ring and OOD reports");
  for (auto *sub: { partition, train_sft, curate, train_dpo, sample, dock,
                    evaluate, report })
    add_common(sub);
  add_sampling(curate);
  add_sampling(sample);
  curate->add_option("--lambda", o.lambda, "Fused-ring penalty weight");
  train_sft->add_option("--beta-vae", o.beta_vae);
  train_dpo->add_option("--beta-vae", o.beta_vae);
  train_dpo->add_option("--beta-dpo", o.beta_dpo);
  for (auto *sub: { sample, evaluate, report })
    sub->add_flag("--allow-partial", opts.allow_partial,
                  "Continue with incomplete samples or scores");
  report->add_option("--top-k", o.top_k, "Compounds per pocket");
  report->add_flag("--fused", opts.fused, "Only the fused-ring report");
  report->add_flag("--ood", opts.ood, "Only the OOD report");

  auto *verify = app.add_subcommand("verify", "Rehash artifacts named by manifests");
  std::string verify_dir = "run";
  verify->add_option("dir", verify_dir, "Output directory")->required();

  auto *fixture = app.add_subcommand("make-fixture", "Write a synthetic dataset and config");
  std::string fixture_dir;
  mc::FixtureOptions fopts;
  fixture->add_option("dir", fixture_dir)->required();
  fixture->add_option("--pockets", fopts.pockets);
  fixture->add_option("--eval-pockets", fopts.eval_pockets);
  fixture->add_option("--max-ligands", fopts.max_ligands);
  fixture->add_option("--seed", fopts.seed);

  auto *surrogate = app.add_subcommand(
      "surrogate-dock", "Print the deterministic surrogate score of a molecule");
  std::string smiles;
  surrogate->add_option("--smiles", smiles)->required();
  // Dock commands may pass extra placeholders; they are ignored here.
  surrogate->allow_extras();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*verify)
      return mc::cmd_verify(verify_dir);
    if (*fixture)
      return mc::cmd_make_fixture(fixture_dir, fopts);
    if (*surrogate) {
      std::cout << mc::format_double(mc::surrogate_vina(smiles)) << "\n";
      return mc::kExitOk;
    }
    const auto config = resolve(config_file, o);
    if (*partition)
      return mc::cmd_partition(config);
    if (*train_sft)
      return mc::cmd_train_sft(config);
    if (*curate)
      return mc::cmd_curate(config, opts);
    if (*train_dpo)
      return mc::cmd_train_dpo(config);
    if (*sample)
      return mc::cmd_sample(config, opts);
    if (*dock)
      return mc::cmd_dock(config, opts);
    if (*evaluate)
      return mc::cmd_evaluate(config, opts);
    if (*report)
      return mc::cmd_report(config, opts);
  } catch (const mc::Error &e) {
    std::cerr << "molchord: " << e.what() << "\n";
    return mc::exit_code_for(e.code());
  } catch (const std::exception &e) {
    std::cerr << "molchord: internal error: " << e.what() << "\n";
    return mc::kExitInternal;
  }
  return mc::kExitInternal;
}
