//
// MolChord desk pipeline - Copyright 2026 The MolChord Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLCHORD_GENMODEL_TEMPLATES_H_
#define MOLCHORD_GENMODEL_TEMPLATES_H_

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace molchord {

// A prompt sentence with one structural placeholder. Words before the
// placeholder form the prefix; the remaining words (including the final
// period) open the suffix.
struct PromptTemplate {
  std::string id;
  std::string text;
  std::vector<std::string> prefix_words;
  std::vector<std::string> suffix_words;
};

// Pocket-conditioned prompts have ids "sbdd/0".."sbdd/40". The same
// sentences with "pocket" replaced by "protein" have ids "sbdd-protein/i".
std::span<const PromptTemplate> prompt_templates();

// Throws UnknownTemplate.
const PromptTemplate &find_template(std::string_view id);

// Ids of one family ("sbdd" or "sbdd-protein") in index order.
std::vector<std::string> template_family(std::string_view family);

inline constexpr std::string_view kDefaultTemplate = "sbdd/0";

}  // namespace molchord

#endif  // MOLCHORD_GENMODEL_TEMPLATES_H_
