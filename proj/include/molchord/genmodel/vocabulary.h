//
// MolChord desk pipeline - Copyright 2026 The MolChord Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLCHORD_GENMODEL_VOCABULARY_H_
#define MOLCHORD_GENMODEL_VOCABULARY_H_

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace molchord {

// Token inventory shared by the prompt words and the SMILES alphabet.
//
// Ids 0, 1, 2 are PAD, BOS and EOS. SMILES tokens are single characters
// except the two-letter atoms Cl and Br. Prompt words are stored with a
// "w:" prefix so a word never collides with a SMILES character.
class Vocabulary {
public:
  static constexpr int kPad = 0;
  static constexpr int kBos = 1;
  static constexpr int kEos = 2;

  // SMILES alphabet plus every word of the bundled prompt templates.
  static const Vocabulary &standard();

  explicit Vocabulary(std::vector<std::string> tokens);

  int size() const noexcept { return static_cast<int>(tokens_.size()); }
  const std::vector<std::string> &tokens() const noexcept { return tokens_; }
  const std::string &token(int id) const;

  std::optional<int> find(std::string_view token) const;
  // Throws TokenOutOfVocab.
  int id(std::string_view token) const;
  int word(std::string_view w) const;

  bool is_smiles_token(int id) const noexcept;

  // Splits SMILES text into token ids (no BOS/EOS).
  std::vector<int> encode_smiles(std::string_view smiles) const;
  // Concatenates SMILES tokens; throws TokenOutOfVocab on anything else.
  std::string decode_smiles(std::span<const int> ids) const;

  bool operator==(const Vocabulary &other) const {
    return tokens_ == other.tokens_;
  }

private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

}  // namespace molchord

#endif  // MOLCHORD_GENMODEL_VOCABULARY_H_
