//
// MolChord desk pipeline - Copyright 2026 The MolChord Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLCHORD_SCORERS_DOCK_H_
#define MOLCHORD_SCORERS_DOCK_H_

#include <atomic>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "molchord/error.h"

namespace molchord {

inline constexpr double kDefaultDockTimeout = 600.0;
inline constexpr std::size_t kStderrExcerpt = 400;

// Shell command template for an external docking wrapper. Placeholders:
// {smiles}, {pocket_id}, {pocket_file} and {center_source}; substituted
// values are single-quoted for /bin/sh.
struct DockCommand {
  std::string command;
  double timeout = kDefaultDockTimeout;  // seconds
  int max_parallel = 1;
};

// Throws InvalidConfig when {smiles} is absent, timeout <= 0 or
// max_parallel < 1.
void validate_dock_command(const DockCommand &cmd);

struct DockRequest {
  std::string pocket_id;
  std::string smiles;  // canonical
  std::string pocket_file;
  // Reference ligand used to place the box center; required.
  std::string center_source;
};

std::string shell_quote(std::string_view s);
std::string render_dock_command(const DockCommand &cmd,
                                const DockRequest &req);

struct ProcessResult {
  int exit_code = 0;
  bool timed_out = false;
  std::string out;
  std::string err;
};

// Runs `/bin/sh -c command` in its own process group; on timeout the whole
// group is killed.
ProcessResult run_shell(const std::string &command, double timeout);

// The final non-empty stdout line must be exactly one finite number.
// Throws UnparseableOutput otherwise.
double parse_dock_output(std::string_view out);

// Scores keyed by (pocket_id, canonical smiles), persisted as JSON lines in
// `file` when a path is given. Inserting a different value for an existing
// key throws ConflictingScore.
class DockCache {
public:
  DockCache() = default;
  explicit DockCache(std::filesystem::path file);

  std::optional<double> get(const std::string &pocket_id,
                            const std::string &smiles) const;
  void put(const std::string &pocket_id, const std::string &smiles,
           double vina);
  std::size_t size() const;

private:
  mutable std::mutex mutex_;
  std::filesystem::path file_;
  std::map<std::pair<std::string, std::string>, double> scores_;
};

// Cache file for a command under MOLCHORD_CACHE_DIR (or `fallback_dir`),
// named by a hash of the command template.
std::filesystem::path dock_cache_path(const DockCommand &cmd,
                                      const std::filesystem::path &fallback_dir);

// Counts subprocess launches; used to audit cache behavior.
struct DockStats {
  std::atomic<std::size_t> executed { 0 };
  std::atomic<std::size_t> cache_hits { 0 };
};

// Cache hit returns immediately; otherwise runs the command. Errors:
// MissingReference (empty center_source), Timeout, NonZeroExit,
// UnparseableOutput, ConflictingScore.
double external_dock(const DockCommand &cmd, const DockRequest &req,
                     DockCache &cache, DockStats *stats = nullptr);

struct DockOutcome {
  DockRequest request;
  std::optional<double> vina;
  std::optional<Errc> error;
  std::string message;
};

// Docks every request with up to max_parallel subprocesses. Identical keys
// run once; outcomes follow request order.
std::vector<DockOutcome> dock_batch(const DockCommand &cmd,
                                    const std::vector<DockRequest> &requests,
                                    DockCache &cache,
                                    DockStats *stats = nullptr);

}  // namespace molchord

#endif  // MOLCHORD_SCORERS_DOCK_H_
