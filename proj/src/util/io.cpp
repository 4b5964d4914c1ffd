//
// MolChord desk pipeline - Copyright 2026 The MolChord Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molchord/util/io.h"

#include <fstream>
#include <sstream>

#include "molchord/error.h"

namespace molchord {

namespace fs = std::filesystem;

std::string read_text_file(const fs::path &path) {
  std::error_code ec;
  if (!fs::exists(path, ec))
    throw Error(Errc::kMissingArtifact, "missing file " + path.string());
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(Errc::kIoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad())
    throw Error(Errc::kIoError, "read failed for " + path.string());
  return ss.str();
}

void write_text_file(const fs::path &path, std::string_view data) {
  std::error_code ec;
  if (path.has_parent_path())
    fs::create_directories(path.parent_path(), ec);
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw Error(Errc::kIoError, "cannot write " + tmp.string());
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out)
      throw Error(Errc::kIoError, "write failed for " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec)
    throw Error(Errc::kIoError,
                "cannot move " + tmp.string() + " into place: " + ec.message());
}

}  // namespace molchord
