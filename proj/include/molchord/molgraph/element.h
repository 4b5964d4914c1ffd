//
// MolChord desk pipeline - Copyright 2026 The MolChord Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLCHORD_MOLGRAPH_ELEMENT_H_
#define MOLCHORD_MOLGRAPH_ELEMENT_H_

#include <optional>
#include <span>
#include <string_view>

namespace molchord {

struct ElementInfo {
  std::string_view symbol;
  int atomic_number;
  // Highest neutral valence accepted by validate_valence; 0 = unchecked.
  int max_valence;
};

// Lookup by symbol with canonical capitalization ("C", "Cl", "Se").
const ElementInfo *find_element(std::string_view symbol) noexcept;
const ElementInfo &element_by_number(int atomic_number);

// Members of the unbracketed organic subset: B C N O P S F Cl Br I.
bool is_organic_subset(int atomic_number) noexcept;

// Elements that may be written lowercase (aromatic).
bool can_be_aromatic(int atomic_number) noexcept;

// Normal valences used for implicit hydrogen counts of organic-subset
// atoms, in increasing order.
std::span<const int> normal_valences(int atomic_number) noexcept;

// Maximum valence allowed for an element at a given formal charge.
// Returns nullopt when the element is not valence-checked.
std::optional<int> max_valence(int atomic_number, int formal_charge) noexcept;

}  // namespace molchord

#endif  // MOLCHORD_MOLGRAPH_ELEMENT_H_
