//
// MolChord desk pipeline - Copyright 2026 The MolChord Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLCHORD_CLI_COMMANDS_H_
#define MOLCHORD_CLI_COMMANDS_H_

#include <filesystem>
#include <string>

#include "molchord/cli/config.h"
#include "molchord/error.h"
#include "molchord/fixtures/synthetic.h"

namespace molchord {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitMissingArtifact = 3;
inline constexpr int kExitExternal = 4;

int exit_code_for(Errc code) noexcept;

// Artifact names inside the output directory.
namespace artifact {
  inline constexpr const char *kPartition = "partition.json";
  inline constexpr const char *kSftCheckpoint = "sft.ckpt";
  inline constexpr const char *kSftCurve = "sft_curve.jsonl";
  inline constexpr const char *kSftReport = "sft_data.json";
  inline constexpr const char *kCurationAudit = "curation_audit.jsonl";
  inline constexpr const char *kCurationScores = "curation_scores.jsonl";
  inline constexpr const char *kPairs = "pairs.jsonl";
  inline constexpr const char *kDpoCheckpoint = "dpo.ckpt";
  inline constexpr const char *kDpoCurve = "dpo_curve.jsonl";
  inline constexpr const char *kGenerations = "generations.jsonl";
  inline constexpr const char *kSampleReport = "sample_report.jsonl";
  inline constexpr const char *kScores = "scores.jsonl";
  inline constexpr const char *kDockFailures = "dock_failures.jsonl";
  inline constexpr const char *kCoverage = "coverage.json";
  inline constexpr const char *kMetrics = "metrics.json";
  inline constexpr const char *kPerPocket = "per_pocket.jsonl";
  inline constexpr const char *kFusedReport = "fused_report.json";
  inline constexpr const char *kOodReport = "ood.json";
}  // namespace artifact

struct CommandOptions {
  bool allow_partial = false;
  // report: which sub-reports to write; both when neither is set.
  bool fused = false;
  bool ood = false;
  // Absolute path of the running binary, substituted for {molchord} in the
  // dock command.
  std::string self_exe;
};

// Each command writes its artifacts plus "<command>.manifest.json" (config
// hash, input and output digests) and "<command>.timings.json" into
// config.paths.out. Return values are exit codes; errors propagate as
// molchord::Error.
int cmd_partition(const RunConfig &config);
int cmd_train_sft(const RunConfig &config);
int cmd_curate(const RunConfig &config, const CommandOptions &opts);
int cmd_train_dpo(const RunConfig &config);
int cmd_sample(const RunConfig &config, const CommandOptions &opts);
int cmd_dock(const RunConfig &config, const CommandOptions &opts);
int cmd_evaluate(const RunConfig &config, const CommandOptions &opts);
int cmd_report(const RunConfig &config, const CommandOptions &opts);

// Rehashes every file named by the manifests in `out_dir`.
int cmd_verify(const std::filesystem::path &out_dir);

// Writes complexes.jsonl, eval_complexes.jsonl and a desk-sized config.ini
// whose dock command runs the surrogate scorer of this binary.
int cmd_make_fixture(const std::filesystem::path &dir,
                     const FixtureOptions &opts);

}  // namespace molchord

#endif  // MOLCHORD_CLI_COMMANDS_H_
