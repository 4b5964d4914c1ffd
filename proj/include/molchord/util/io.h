//
// MolChord desk pipeline - Copyright 2026 The MolChord Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLCHORD_UTIL_IO_H_
#define MOLCHORD_UTIL_IO_H_

#include <filesystem>
#include <string>
#include <string_view>

namespace molchord {

// Throws MissingArtifact if the file does not exist, IoError otherwise.
std::string read_text_file(const std::filesystem::path &path);

// Writes through a temporary sibling and renames it into place, so readers
// never see a partial file. Parent directories are created.
void write_text_file(const std::filesystem::path &path, std::string_view data);

}  // namespace molchord

#endif  // MOLCHORD_UTIL_IO_H_
