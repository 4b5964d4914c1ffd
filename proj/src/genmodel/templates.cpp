//
// MolChord desk pipeline - Copyright 2026 The MolChord Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molchord/genmodel/templates.h"

#include <array>
#include <sstream>

#include "molchord/error.h"

namespace molchord {
namespace {
  constexpr std::string_view kSlot = "<3d pocket>";

  constexpr std::array<std::string_view, 41> kSbdd = {
    "Generate a compound based on the pocket <3d pocket>.",
    "Innovate a compound with the pocket <3d pocket> as a foundation.",
    "Assemble a compound in relation to the pocket <3d pocket>.",
    "Create a compound influenced by the pocket <3d pocket>.",
    "Construct a compound reflecting the essence of the pocket <3d pocket>.",
    "Prepare a compound derived from the principles of the pocket "
    "<3d pocket>.",
    "Innovate a compound in the spirit of the pocket <3d pocket>.",
    "Develop a compound that matches the pocket <3d pocket>.",
    "Synthesize a compound derived from the pocket <3d pocket>.",
    "Manufacture a compound using the pocket <3d pocket> as a basis.",
    "Create a compound that corresponds to the pocket <3d pocket>.",
    "Generate a compound that aligns with the pocket <3d pocket>.",
    "Synthesize a compound according to the pocket <3d pocket>.",
    "Craft a compound in the likeness of the pocket <3d pocket>.",
    "Assemble a compound inspired by the essence of the pocket <3d pocket>.",
    "Formulate a compound in accordance with the pocket <3d pocket>.",
    "Fabricate a compound that adheres to the pocket <3d pocket>.",
    "Engineer a compound anchored in the pocket <3d pocket>.",
    "Craft a compound that embodies the pocket <3d pocket>.",
    "Cultivate a compound with the pocket <3d pocket> in mind.",
    "Design a compound that conforms to the pocket <3d pocket>.",
    "Formulate a compound that is influenced by the pocket <3d pocket>.",
    "Produce a compound guided by the pocket <3d pocket>.",
    "Construct a compound modeled on the pocket <3d pocket>.",
    "Design a compound with reference to the pocket <3d pocket>.",
    "Generate a compound reflecting the attributes of the pocket "
    "<3d pocket>.",
    "Produce a compound that incorporates the pocket <3d pocket>.",
    "Formulate a compound that mirrors the pocket <3d pocket>.",
    "Fabricate a compound utilizing the pocket <3d pocket>.",
    "Develop a compound that is rooted in the pocket <3d pocket>.",
    "Create a compound that is consistent with the pocket <3d pocket>.",
    "Assemble a compound taking the pocket <3d pocket> into account.",
    "Derive a compound from the characteristics of the pocket <3d pocket>.",
    "Produce a compound based on the criteria of the pocket <3d pocket>.",
    "Compose a compound centered around the pocket <3d pocket>.",
    "Fashion a compound in response to the pocket <3d pocket>.",
    "Invent a compound informed by the pocket <3d pocket>.",
    "Devise a compound inspired by the pocket <3d pocket>.",
    "Construct a compound that reflects the pocket <3d pocket>.",
    "Design a compound following the pocket <3d pocket>.",
    "Develop a compound referencing the pocket <3d pocket>.",
  };

  std::vector<std::string> split_words(std::string_view text) {
    std::vector<std::string> words;
    std::istringstream in { std::string(text) };
    std::string w;
    while (in >> w) {
      if (w.size() > 1 && w.back() == '.') {
        words.push_back(w.substr(0, w.size() - 1));
        words.push_back(".");
      } else {
        words.push_back(w);
      }
    }
    return words;
  }

  PromptTemplate make(std::string id, std::string text,
                      std::string_view slot) {
    PromptTemplate t;
    const auto pos = text.find(slot);
    t.prefix_words = split_words(std::string_view(text).substr(0, pos));
    t.suffix_words =
        split_words(std::string_view(text).substr(pos + slot.size()));
    t.id = std::move(id);
    t.text = std::move(text);
    return t;
  }

  std::string replace_all(std::string s, std::string_view from,
                          std::string_view to) {
    for (auto pos = s.find(from); pos != std::string::npos;
         pos = s.find(from, pos + to.size()))
      s.replace(pos, from.size(), to);
    return s;
  }

  std::vector<PromptTemplate> build_all() {
    std::vector<PromptTemplate> all;
    for (std::size_t i = 0; i < kSbdd.size(); ++i)
      all.push_back(make("sbdd/" + std::to_string(i), std::string(kSbdd[i]),
                         kSlot));
    for (std::size_t i = 0; i < kSbdd.size(); ++i)
      all.push_back(make("sbdd-protein/" + std::to_string(i),
                         replace_all(std::string(kSbdd[i]), "pocket",
                                     "protein"),
                         "<3d protein>"));
    return all;
  }
}  // namespace

std::span<const PromptTemplate> prompt_templates() {
  static const std::vector<PromptTemplate> all = build_all();
  return all;
}

const PromptTemplate &find_template(std::string_view id) {
  for (const auto &t: prompt_templates())
    if (t.id == id)
      return t;
  throw Error(Errc::kUnknownTemplate,
              "no prompt template with id " + std::string(id));
}

std::vector<std::string> template_family(std::string_view family) {
  std::vector<std::string> ids;
  const std::string prefix = std::string(family) + "/";
  for (const auto &t: prompt_templates())
    if (t.id.compare(0, prefix.size(), prefix) == 0)
      ids.push_back(t.id);
  return ids;
}

}  // namespace molchord
