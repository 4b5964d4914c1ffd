//
// MolChord desk pipeline - Copyright 2026 The MolChord Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLCHORD_GENMODEL_CHECKPOINT_H_
#define MOLCHORD_GENMODEL_CHECKPOINT_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "molchord/genmodel/model.h"

namespace molchord {

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  ModelParams params;
  std::int64_t step = 0;
  std::optional<double> val_loss;
  std::string stage;        // "init", "sft" or "dpo"
  std::string config_hash;  // hash of the run configuration
};

// Text layout:
//   molchord-checkpoint <version>
//   config <json>
//   vocab <n> <token>...
//   meta <json>
//   tensor <name> <rows> <cols>   followed by one line per row
//   sha256 <hex digest of every preceding byte>
// Values use shortest round-trip formatting, so reloading is exact.
std::string serialize_checkpoint(const Checkpoint &ckpt,
                                 const Vocabulary &vocab =
                                     Vocabulary::standard());

// Throws CorruptCheckpoint on any structural, digest or vocabulary mismatch.
Checkpoint parse_checkpoint(std::string_view text,
                            const Vocabulary &vocab = Vocabulary::standard());

void save_checkpoint(const std::filesystem::path &path,
                     const Checkpoint &ckpt);
Checkpoint load_checkpoint(const std::filesystem::path &path);

}  // namespace molchord

#endif  // MOLCHORD_GENMODEL_CHECKPOINT_H_
