//
// MolChord desk pipeline - Copyright 2026 The MolChord Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molchord/genmodel/vocabulary.h"

#include <set>

#include "molchord/error.h"
#include "molchord/genmodel/templates.h"

namespace molchord {
namespace {
  constexpr std::string_view kSmilesChars = "CNOSPFIBcnospbH0123456789%()[]=#-+.:/\\@";

  std::vector<std::string> standard_tokens() {
    std::vector<std::string> tokens = { "<pad>", "<bos>", "<eos>" };
    for (char c: kSmilesChars)
      tokens.emplace_back(1, c);
    tokens.emplace_back("Cl");
    tokens.emplace_back("Br");

    std::set<std::string> words;
    for (const auto &t: prompt_templates()) {
      words.insert(t.prefix_words.begin(), t.prefix_words.end());
      words.insert(t.suffix_words.begin(), t.suffix_words.end());
    }
    for (const auto &w: words)
      tokens.push_back("w:" + w);
    return tokens;
  }
}  // namespace

const Vocabulary &Vocabulary::standard() {
  static const Vocabulary vocab(standard_tokens());
  return vocab;
}

Vocabulary::Vocabulary(std::vector<std::string> tokens)
    : tokens_(std::move(tokens)) {
  if (tokens_.size() < 3 || tokens_[kPad] != "<pad>"
      || tokens_[kBos] != "<bos>" || tokens_[kEos] != "<eos>")
    throw Error(Errc::kShapeMismatch,
                "vocabulary must start with <pad>, <bos>, <eos>");
  for (int i = 0; i < size(); ++i)
    if (!index_.emplace(tokens_[i], i).second)
      throw Error(Errc::kShapeMismatch,
                  "duplicate vocabulary token " + tokens_[i]);
}

const std::string &Vocabulary::token(int id) const {
  if (id < 0 || id >= size())
    throw Error(Errc::kTokenOutOfVocab,
                "token id " + std::to_string(id) + " out of range");
  return tokens_[id];
}

std::optional<int> Vocabulary::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end())
    return std::nullopt;
  return it->second;
}

int Vocabulary::id(std::string_view token) const {
  if (auto i = find(token))
    return *i;
  throw Error(Errc::kTokenOutOfVocab,
              "token '" + std::string(token) + "' not in vocabulary");
}

int Vocabulary::word(std::string_view w) const {
  return id("w:" + std::string(w));
}

bool Vocabulary::is_smiles_token(int id) const noexcept {
  if (id <= kEos || id >= size())
    return false;
  return tokens_[id].compare(0, 2, "w:") != 0;
}

std::vector<int> Vocabulary::encode_smiles(std::string_view smiles) const {
  std::vector<int> ids;
  for (std::size_t i = 0; i < smiles.size();) {
    if (i + 1 < smiles.size()) {
      const auto two = smiles.substr(i, 2);
      if (two == "Cl" || two == "Br") {
        ids.push_back(id(two));
        i += 2;
        continue;
      }
    }
    ids.push_back(id(smiles.substr(i, 1)));
    ++i;
  }
  return ids;
}

std::string Vocabulary::decode_smiles(std::span<const int> ids) const {
  std::string out;
  for (int t: ids) {
    if (!is_smiles_token(t))
      throw Error(Errc::kTokenOutOfVocab,
                  "token id " + std::to_string(t) + " is not a SMILES token");
    out += tokens_[t];
  }
  return out;
}

}  // namespace molchord
