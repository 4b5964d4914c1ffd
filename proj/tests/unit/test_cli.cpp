//
// MolChord desk pipeline - Copyright 2026 The MolChord Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <filesystem>
#include <fstream>

#include <doctest.h>
#include <json.hpp>

#include "molchord/cli/commands.h"
#include "molchord/cli/config.h"
#include "molchord/error.h"
#include "molchord/scorers/records.h"
#include "molchord/util/io.h"

namespace mc = molchord;
namespace fs = std::filesystem;

namespace {
mc::Errc code_of(const std::function<void()> &fn) {
  try {
    fn();
  } catch (const mc::Error &e) {
    return e.code();
  }
  FAIL("expected an error");
  return mc::Errc::kIoError;
}

fs::path scratch(const std::string &name) {
  auto dir = fs::temp_directory_path() / ("molchord-test-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// A tiny dataset and a config sized for a unit test.
fs::path tiny_run(const std::string &name) {
  const auto dir = scratch(name);
  mc::FixtureOptions fo;
  fo.pockets = 16;
  fo.eval_pockets = 4;
  fo.seed = 3;
  const auto set = mc::make_fixture(fo);
  mc::write_text_file(dir / "complexes.jsonl",
                      mc::serialize_complexes(set.complexes));
  mc::write_text_file(dir / "eval.jsonl",
                      mc::serialize_complexes(set.eval_complexes));
  mc::write_text_file(dir / "config.ini",
                      "[paths]\n"
                      "complexes = complexes.jsonl\n"
                      "eval_complexes = eval.jsonl\n"
                      "out = out\n"
                      "[model]\n"
                      "d = 16\nd_feat = 16\nadapter_hidden = 16\n"
                      "hidden = 16\nwindow = 4\n"
                      "[train]\n"
                      "sft_steps = 400\neval_every = 100\n"
                      "[sample]\n"
                      "n_eval = 3\ntemperature = 1.0\n"
                      "[curate]\n"
                      "n_candidates = 8\n"
                      "[metrics]\n"
                      "top_k = 3\n"
                      "[dock]\n"
                      "command = echo -7.5 # {smiles} {pocket_id}\n"
                      "timeout = 10\n"
                      "[run]\n"
                      "seed = 5\n");
  return dir;
}

nlohmann::json read_json(const fs::path &p) {
  return nlohmann::json::parse(mc::read_text_file(p));
}

std::size_t count_lines(const fs::path &p) {
  std::ifstream in(p);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line))
    n += !line.empty();
  return n;
}
}  // namespace

TEST_CASE("run configuration loading") {
  const auto dir = tiny_run("config");
  const auto c = mc::load_run_config(dir / "config.ini");
  CHECK(c.paths.complexes == dir / "complexes.jsonl");
  CHECK(c.paths.out == dir / "out");
  CHECK(c.model.d == 16);
  CHECK(c.sample.temperature == 1.0);
  CHECK(c.sample.top_p == mc::kDefaultTopP);
  CHECK(c.seed == 5);
  CHECK(mc::sft_train_config(c).steps == 400);
  CHECK(mc::dpo_train_config(c).learning_rate == mc::kDefaultDpoLearningRate);

  // The fingerprint ignores where a run lives but not what it does.
  auto moved = c;
  moved.paths.out = "/elsewhere";
  CHECK(mc::config_hash(moved) == mc::config_hash(c));
  auto reseeded = c;
  reseeded.seed = 6;
  CHECK(mc::config_hash(reseeded) != mc::config_hash(c));

  mc::write_text_file(dir / "bad.ini", "[model]\nwidth = 3\n");
  CHECK(code_of([&] { mc::load_run_config(dir / "bad.ini"); })
        == mc::Errc::kInvalidConfig);
  mc::write_text_file(dir / "range.ini", "[sample]\ntop_p = 2\n");
  CHECK(code_of([&] { mc::load_run_config(dir / "range.ini"); })
        == mc::Errc::kInvalidConfig);
  mc::write_text_file(dir / "nan.ini", "[train]\nbatch_size = eight\n");
  CHECK(code_of([&] { mc::load_run_config(dir / "nan.ini"); })
        == mc::Errc::kInvalidConfig);
  CHECK(code_of([&] { mc::load_run_config(dir / "absent.ini"); })
        == mc::Errc::kMissingArtifact);
  fs::remove_all(dir);
}

TEST_CASE("exit codes by error kind") {
  CHECK(mc::exit_code_for(mc::Errc::kMissingArtifact) == mc::kExitMissingArtifact);
  CHECK(mc::exit_code_for(mc::Errc::kTimeout) == mc::kExitExternal);
  CHECK(mc::exit_code_for(mc::Errc::kNonZeroExit) == mc::kExitExternal);
  CHECK(mc::exit_code_for(mc::Errc::kUnparseableOutput) == mc::kExitExternal);
  CHECK(mc::exit_code_for(mc::Errc::kSchemaViolation) == mc::kExitValidation);
  CHECK(mc::exit_code_for(mc::Errc::kInvalidConfig) == mc::kExitValidation);
  CHECK(mc::exit_code_for(mc::Errc::kMissingReference) == mc::kExitValidation);
  CHECK(mc::exit_code_for(mc::Errc::kIoError) == mc::kExitInternal);
}

TEST_CASE("commands run end to end and verify their manifests") {
  const auto dir = tiny_run("pipeline");
  const auto c = mc::load_run_config(dir / "config.ini");
  const auto out = c.paths.out;
  mc::CommandOptions opts;

  // Upstream artifacts are required.
  CHECK(code_of([&] { mc::cmd_train_dpo(c); }) == mc::Errc::kMissingArtifact);

  REQUIRE(mc::cmd_partition(c) == 0);
  const auto part = read_json(out / mc::artifact::kPartition);
  CHECK(part["counts"]["total"] == 16);
  CHECK(part["counts"]["sft"].get<int>() + part["counts"]["dpo"].get<int>()
        == 16);

  REQUIRE(mc::cmd_train_sft(c) == 0);
  CHECK(fs::exists(out / mc::artifact::kSftCheckpoint));
  CHECK(count_lines(out / mc::artifact::kSftCurve) == 401);

  REQUIRE(mc::cmd_curate(c, opts) == 0);
  CHECK(count_lines(out / mc::artifact::kCurationAudit)
        == part["dpo_pool"].size());

  if (count_lines(out / mc::artifact::kPairs) > 0) {
    REQUIRE(mc::cmd_train_dpo(c) == 0);
  } else {
    CHECK(code_of([&] { mc::cmd_train_dpo(c); }) == mc::Errc::kEmptyBatch);
    fs::copy_file(out / mc::artifact::kSftCheckpoint,
                  out / mc::artifact::kDpoCheckpoint);
  }

  REQUIRE(mc::cmd_sample(c, opts) == 0);
  const auto gens = mc::load_generations(out / mc::artifact::kGenerations);
  CHECK(gens.size() == 12);

  REQUIRE(mc::cmd_dock(c, opts) == 0);
  const auto scores = mc::load_scores(out / mc::artifact::kScores);
  CHECK(scores.size() == gens.size());
  for (const auto &s: scores)
    CHECK(s.vina == -7.5);
  CHECK(count_lines(out / mc::artifact::kDockFailures) == 0);

  REQUIRE(mc::cmd_evaluate(c, opts) == 0);
  const auto metrics = read_json(out / mc::artifact::kMetrics);
  CHECK(metrics["mean_vina"] == -7.5);
  CHECK(metrics["pockets"] == 4);
  CHECK(count_lines(out / mc::artifact::kPerPocket) == 4);

  auto wide = c;
  wide.top_k = 10;
  CHECK(code_of([&] { mc::cmd_report(wide, opts); })
        == mc::Errc::kTooFewGenerations);
  REQUIRE(mc::cmd_report(c, opts) == 0);
  const auto fused = read_json(out / mc::artifact::kFusedReport);
  CHECK(fused["num_compounds"] == 12);
  CHECK(fs::exists(out / mc::artifact::kOodReport));

  CHECK(mc::cmd_verify(out) == mc::kExitOk);
  {
    std::ofstream tamper(out / mc::artifact::kScores, std::ios::app);
    tamper << "\n";
  }
  CHECK(mc::cmd_verify(out) == mc::kExitValidation);
  fs::remove(out / mc::artifact::kPerPocket);
  CHECK(mc::cmd_verify(out) == mc::kExitMissingArtifact);
  fs::remove_all(dir);
}

TEST_CASE("partial inputs are refused unless allowed") {
  const auto dir = tiny_run("partial");
  auto c = mc::load_run_config(dir / "config.ini");
  const auto out = c.paths.out;
  mc::CommandOptions opts;
  REQUIRE(mc::cmd_train_sft(c) == 0);
  fs::copy_file(out / mc::artifact::kSftCheckpoint,
                out / mc::artifact::kDpoCheckpoint);

  // More unique molecules than the retry cap allows.
  auto greedy = c;
  greedy.sample.n_eval = 400;
  greedy.sample.retry_cap = 0;
  CHECK(mc::cmd_sample(greedy, opts) == mc::kExitValidation);
  const auto report = mc::read_text_file(out / mc::artifact::kSampleReport);
  CHECK(report.find("RetryCapExceeded") != std::string::npos);
  opts.allow_partial = true;
  CHECK(mc::cmd_sample(greedy, opts) == mc::kExitOk);
  opts.allow_partial = false;

  REQUIRE(mc::cmd_sample(c, opts) == 0);
  REQUIRE(mc::cmd_dock(c, opts) == 0);

  // Drop one score: evaluate reports the gap and stops.
  auto scores = mc::load_scores(out / mc::artifact::kScores);
  scores.pop_back();
  mc::write_text_file(out / mc::artifact::kScores, mc::serialize_scores(scores));
  CHECK(mc::cmd_evaluate(c, opts) == mc::kExitValidation);
  CHECK(read_json(out / mc::artifact::kCoverage)["missing_count"] == 1);
  CHECK(!fs::exists(out / mc::artifact::kMetrics));
  CHECK(code_of([&] { mc::cmd_report(c, opts); })
        == mc::Errc::kScoreCoverageGap);
  opts.allow_partial = true;
  CHECK(mc::cmd_evaluate(c, opts) == mc::kExitOk);
  CHECK(read_json(out / mc::artifact::kMetrics)["partial"] == true);
  opts.allow_partial = false;

  // A failing dock command is recorded per request.
  c.dock.command = "echo nope >&2; exit 3 # {smiles}";
  CHECK(mc::cmd_dock(c, opts) == mc::kExitExternal);
  CHECK(count_lines(out / mc::artifact::kDockFailures) == 12);
  CHECK(mc::read_text_file(out / mc::artifact::kDockFailures).find("nope")
        != std::string::npos);

  c.dock.command = "echo 1";
  CHECK(code_of([&] { mc::cmd_dock(c, opts); }) == mc::Errc::kInvalidConfig);
  fs::remove_all(dir);
}
