//
// MolChord desk pipeline - Copyright 2026 The MolChord Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molchord/scorers/dock.h"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>

#include <json.hpp>

#include "molchord/util/hash.h"
#include "molchord/util/numfmt.h"
#include "molchord/util/parallel.h"

namespace molchord {
namespace {
  void replace_all(std::string &s, std::string_view from,
                   const std::string &to) {
    for (auto pos = s.find(from); pos != std::string::npos;
         pos = s.find(from, pos + to.size()))
      s.replace(pos, from.size(), to);
  }

  std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
      return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }

  void close_fd(int &fd) {
    if (fd >= 0)
      ::close(fd);
    fd = -1;
  }
}  // namespace

void validate_dock_command(const DockCommand &cmd) {
  if (cmd.command.find("{smiles}") == std::string::npos)
    throw Error(Errc::kInvalidConfig,
                "dock command template must contain {smiles}");
  if (!(cmd.timeout > 0))
    throw Error(Errc::kInvalidConfig, "dock timeout must be > 0");
  if (cmd.max_parallel < 1)
    throw Error(Errc::kInvalidConfig, "dock max_parallel must be >= 1");
}

std::string shell_quote(std::string_view s) {
  std::string out = "'";
  for (char c: s) {
    if (c == '\'')
      out += "'\\''";
    else
      out += c;
  }
  out += "'";
  return out;
}

std::string render_dock_command(const DockCommand &cmd,
                                const DockRequest &req) {
  std::string s = cmd.command;
  replace_all(s, "{smiles}", shell_quote(req.smiles));
  replace_all(s, "{pocket_id}", shell_quote(req.pocket_id));
  replace_all(s, "{pocket_file}", shell_quote(req.pocket_file));
  replace_all(s, "{center_source}", shell_quote(req.center_source));
  return s;
}

ProcessResult run_shell(const std::string &command, double timeout) {
  int out_pipe[2], err_pipe[2];
  if (::pipe2(out_pipe, O_CLOEXEC) != 0)
    throw Error(Errc::kIoError, "pipe failed");
  if (::pipe2(err_pipe, O_CLOEXEC) != 0) {
    ::close(out_pipe[0]);
    ::close(out_pipe[1]);
    throw Error(Errc::kIoError, "pipe failed");
  }

  const pid_t pid = ::fork();
  if (pid < 0)
    throw Error(Errc::kIoError, "fork failed");
  if (pid == 0) {
    ::setpgid(0, 0);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::dup2(err_pipe[1], STDERR_FILENO);
    const int devnull = ::open("/dev/null", O_RDONLY);
    if (devnull >= 0)
      ::dup2(devnull, STDIN_FILENO);
    ::execl("/bin/sh", "sh", "-c", command.c_str(),
            static_cast<char *>(nullptr));
    ::_exit(127);
  }
  ::setpgid(pid, pid);
  ::close(out_pipe[1]);
  ::close(err_pipe[1]);

  ProcessResult res;
  int fds[2] = { out_pipe[0], err_pipe[0] };
  std::string *sinks[2] = { &res.out, &res.err };
  const auto deadline =
      std::chrono::steady_clock::now()
      + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
          std::chrono::duration<double>(timeout));
  char buf[4096];
  while (fds[0] >= 0 || fds[1] >= 0) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
                          deadline - std::chrono::steady_clock::now())
                          .count();
    if (left <= 0) {
      res.timed_out = true;
      break;
    }
    pollfd pfd[2];
    int n = 0;
    int which[2];
    for (int i = 0; i < 2; ++i) {
      if (fds[i] >= 0) {
        pfd[n] = { fds[i], POLLIN, 0 };
        which[n++] = i;
      }
    }
    const int rc = ::poll(pfd, n, static_cast<int>(std::min<long long>(
                                      left, 1000)));
    if (rc < 0 && errno != EINTR)
      break;
    for (int j = 0; j < n; ++j) {
      if (!(pfd[j].revents & (POLLIN | POLLHUP | POLLERR)))
        continue;
      const ssize_t got = ::read(fds[which[j]], buf, sizeof(buf));
      if (got > 0)
        sinks[which[j]]->append(buf, static_cast<std::size_t>(got));
      else if (got == 0 || errno != EINTR)
        close_fd(fds[which[j]]);
    }
  }
  if (res.timed_out)
    ::kill(-pid, SIGKILL);
  close_fd(fds[0]);
  close_fd(fds[1]);

  int status = 0;
  while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) { }
  if (WIFEXITED(status))
    res.exit_code = WEXITSTATUS(status);
  else if (WIFSIGNALED(status))
    res.exit_code = 128 + WTERMSIG(status);
  return res;
}

double parse_dock_output(std::string_view out) {
  std::string_view last;
  while (!out.empty()) {
    const auto nl = out.find('\n');
    const auto line = trim(out.substr(0, nl));
    if (!line.empty())
      last = line;
    out.remove_prefix(nl == std::string_view::npos ? out.size() : nl + 1);
  }
  const auto v = parse_double(last);
  if (!v || !std::isfinite(*v))
    throw Error(Errc::kUnparseableOutput,
                "final output line '" + std::string(last)
                    + "' is not a single finite number");
  return *v;
}

DockCache::DockCache(std::filesystem::path file): file_(std::move(file)) {
  std::ifstream in(file_);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty())
      continue;
    try {
      const auto j = nlohmann::json::parse(line);
      const auto key = std::make_pair(j.at("pocket_id").get<std::string>(),
                                      j.at("smiles").get<std::string>());
      const double v = j.at("vina").get<double>();
      const auto [it, fresh] = scores_.emplace(key, v);
      if (!fresh && it->second != v)
        throw Error(Errc::kConflictingScore,
                    file_.string() + ":" + std::to_string(n)
                        + ": conflicting cached score for (" + key.first
                        + ", " + key.second + ")");
    } catch (const nlohmann::json::exception &e) {
      throw Error(Errc::kMalformedLine, file_.string() + ":"
                                            + std::to_string(n) + ": "
                                            + e.what());
    }
  }
}

std::optional<double> DockCache::get(const std::string &pocket_id,
                                     const std::string &smiles) const {
  std::lock_guard lock(mutex_);
  const auto it = scores_.find({ pocket_id, smiles });
  if (it == scores_.end())
    return std::nullopt;
  return it->second;
}

void DockCache::put(const std::string &pocket_id, const std::string &smiles,
                    double vina) {
  std::lock_guard lock(mutex_);
  const auto [it, fresh] = scores_.emplace(std::make_pair(pocket_id, smiles),
                                           vina);
  if (!fresh) {
    if (it->second != vina)
      throw Error(Errc::kConflictingScore,
                  "conflicting scores for (" + pocket_id + ", " + smiles
                      + "): " + format_double(it->second) + " vs "
                      + format_double(vina));
    return;
  }
  if (file_.empty())
    return;
  std::error_code ec;
  if (file_.has_parent_path())
    std::filesystem::create_directories(file_.parent_path(), ec);
  std::ofstream out(file_, std::ios::app);
  nlohmann::ordered_json j;
  j["pocket_id"] = pocket_id;
  j["smiles"] = smiles;
  j["vina"] = vina;
  out << j.dump() << '\n';
  if (!out)
    throw Error(Errc::kIoError, "cannot append to " + file_.string());
}

std::size_t DockCache::size() const {
  std::lock_guard lock(mutex_);
  return scores_.size();
}

std::filesystem::path
dock_cache_path(const DockCommand &cmd,
                const std::filesystem::path &fallback_dir) {
  std::filesystem::path dir = fallback_dir;
  if (const char *env = std::getenv("MOLCHORD_CACHE_DIR"); env && *env)
    dir = env;
  return dir / ("dock-" + sha256_hex(cmd.command).substr(0, 16) + ".jsonl");
}

double external_dock(const DockCommand &cmd, const DockRequest &req,
                     DockCache &cache, DockStats *stats) {
  validate_dock_command(cmd);
  if (auto hit = cache.get(req.pocket_id, req.smiles)) {
    if (stats)
      ++stats->cache_hits;
    return *hit;
  }
  if (req.center_source.empty())
    throw Error(Errc::kMissingReference,
                "pocket " + req.pocket_id
                    + " has no reference ligand to center the docking box");

  if (stats)
    ++stats->executed;
  const auto res = run_shell(render_dock_command(cmd, req), cmd.timeout);
  if (res.timed_out)
    throw Error(Errc::kTimeout, "docking " + req.smiles + " for "
                                    + req.pocket_id + " exceeded "
                                    + format_double(cmd.timeout) + " s");
  if (res.exit_code != 0)
    throw Error(Errc::kNonZeroExit,
                "exit code " + std::to_string(res.exit_code) + ": "
                    + res.err.substr(0, kStderrExcerpt));
  const double v = parse_dock_output(res.out);
  cache.put(req.pocket_id, req.smiles, v);
  return v;
}

std::vector<DockOutcome> dock_batch(const DockCommand &cmd,
                                    const std::vector<DockRequest> &requests,
                                    DockCache &cache, DockStats *stats) {
  validate_dock_command(cmd);
  std::map<std::pair<std::string, std::string>, std::size_t> first;
  std::vector<std::size_t> unique;
  std::vector<std::size_t> owner(requests.size());
  for (std::size_t i = 0; i < requests.size(); ++i) {
    const auto key = std::make_pair(requests[i].pocket_id, requests[i].smiles);
    const auto [it, fresh] = first.emplace(key, i);
    if (fresh)
      unique.push_back(i);
    owner[i] = it->second;
  }

  std::vector<DockOutcome> done(requests.size());
  parallel_for(unique.size(), cmd.max_parallel, [&](std::size_t u) {
    const std::size_t i = unique[u];
    auto &o = done[i];
    o.request = requests[i];
    try {
      o.vina = external_dock(cmd, requests[i], cache, stats);
    } catch (const Error &e) {
      o.error = e.code();
      o.message = e.what();
    }
  });

  std::vector<DockOutcome> out(requests.size());
  for (std::size_t i = 0; i < requests.size(); ++i) {
    out[i] = done[owner[i]];
    out[i].request = requests[i];
  }
  return out;
}

}  // namespace molchord
