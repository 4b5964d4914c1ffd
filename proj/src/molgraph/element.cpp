//
// MolChord desk pipeline - Copyright 2026 The MolChord Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molchord/molgraph/element.h"

#include <array>
#include <stdexcept>
#include <string>

#include "molchord/error.h"

namespace molchord {
namespace {
  // clang-format off
  constexpr std::array<ElementInfo, 119> kElements = { {
    { "*", 0, 0 },
    { "H", 1, 1 }, { "He", 2, 0 }, { "Li", 3, 1 }, { "Be", 4, 2 },
    { "B", 5, 3 }, { "C", 6, 4 }, { "N", 7, 3 }, { "O", 8, 2 },
    { "F", 9, 1 }, { "Ne", 10, 0 }, { "Na", 11, 1 }, { "Mg", 12, 2 },
    { "Al", 13, 3 }, { "Si", 14, 4 }, { "P", 15, 5 }, { "S", 16, 6 },
    { "Cl", 17, 1 }, { "Ar", 18, 0 }, { "K", 19, 1 }, { "Ca", 20, 2 },
    { "Sc", 21, 0 }, { "Ti", 22, 0 }, { "V", 23, 0 }, { "Cr", 24, 0 },
    { "Mn", 25, 0 }, { "Fe", 26, 0 }, { "Co", 27, 0 }, { "Ni", 28, 0 },
    { "Cu", 29, 0 }, { "Zn", 30, 0 }, { "Ga", 31, 3 }, { "Ge", 32, 4 },
    { "As", 33, 5 }, { "Se", 34, 6 }, { "Br", 35, 1 }, { "Kr", 36, 0 },
    { "Rb", 37, 1 }, { "Sr", 38, 2 }, { "Y", 39, 0 }, { "Zr", 40, 0 },
    { "Nb", 41, 0 }, { "Mo", 42, 0 }, { "Tc", 43, 0 }, { "Ru", 44, 0 },
    { "Rh", 45, 0 }, { "Pd", 46, 0 }, { "Ag", 47, 0 }, { "Cd", 48, 0 },
    { "In", 49, 3 }, { "Sn", 50, 4 }, { "Sb", 51, 5 }, { "Te", 52, 6 },
    { "I", 53, 1 }, { "Xe", 54, 0 }, { "Cs", 55, 1 }, { "Ba", 56, 2 },
    { "La", 57, 0 }, { "Ce", 58, 0 }, { "Pr", 59, 0 }, { "Nd", 60, 0 },
    { "Pm", 61, 0 }, { "Sm", 62, 0 }, { "Eu", 63, 0 }, { "Gd", 64, 0 },
    { "Tb", 65, 0 }, { "Dy", 66, 0 }, { "Ho", 67, 0 }, { "Er", 68, 0 },
    { "Tm", 69, 0 }, { "Yb", 70, 0 }, { "Lu", 71, 0 }, { "Hf", 72, 0 },
    { "Ta", 73, 0 }, { "W", 74, 0 }, { "Re", 75, 0 }, { "Os", 76, 0 },
    { "Ir", 77, 0 }, { "Pt", 78, 0 }, { "Au", 79, 0 }, { "Hg", 80, 0 },
    { "Tl", 81, 0 }, { "Pb", 82, 0 }, { "Bi", 83, 0 }, { "Po", 84, 0 },
    { "At", 85, 0 }, { "Rn", 86, 0 }, { "Fr", 87, 0 }, { "Ra", 88, 0 },
    { "Ac", 89, 0 }, { "Th", 90, 0 }, { "Pa", 91, 0 }, { "U", 92, 0 },
    { "Np", 93, 0 }, { "Pu", 94, 0 }, { "Am", 95, 0 }, { "Cm", 96, 0 },
    { "Bk", 97, 0 }, { "Cf", 98, 0 }, { "Es", 99, 0 }, { "Fm", 100, 0 },
    { "Md", 101, 0 }, { "No", 102, 0 }, { "Lr", 103, 0 }, { "Rf", 104, 0 },
    { "Db", 105, 0 }, { "Sg", 106, 0 }, { "Bh", 107, 0 }, { "Hs", 108, 0 },
    { "Mt", 109, 0 }, { "Ds", 110, 0 }, { "Rg", 111, 0 }, { "Cn", 112, 0 },
    { "Nh", 113, 0 }, { "Fl", 114, 0 }, { "Mc", 115, 0 }, { "Lv", 116, 0 },
    { "Ts", 117, 0 }, { "Og", 118, 0 },
  } };
  // clang-format on

  constexpr std::array kValB { 3 };
  constexpr std::array kValC { 4 };
  constexpr std::array kValN { 3, 5 };
  constexpr std::array kValO { 2 };
  constexpr std::array kValP { 3, 5 };
  constexpr std::array kValS { 2, 4, 6 };
  constexpr std::array kValHalogen { 1 };
}  // namespace

const ElementInfo *find_element(std::string_view symbol) noexcept {
  // Index 0 is the wildcard, which is not accepted as an element here.
  for (std::size_t i = 1; i < kElements.size(); ++i)
    if (kElements[i].symbol == symbol)
      return &kElements[i];
  return nullptr;
}

const ElementInfo &element_by_number(int atomic_number) {
  if (atomic_number < 1
      || atomic_number >= static_cast<int>(kElements.size()))
    throw Error(Errc::kUnknownElement,
                "atomic number " + std::to_string(atomic_number));
  return kElements[atomic_number];
}

bool is_organic_subset(int z) noexcept {
  switch (z) {
  case 5:
  case 6:
  case 7:
  case 8:
  case 9:
  case 15:
  case 16:
  case 17:
  case 35:
  case 53:
    return true;
  default:
    return false;
  }
}

bool can_be_aromatic(int z) noexcept {
  switch (z) {
  case 5:
  case 6:
  case 7:
  case 8:
  case 15:
  case 16:
  case 33:
  case 34:
  case 52:
    return true;
  default:
    return false;
  }
}

std::span<const int> normal_valences(int z) noexcept {
  switch (z) {
  case 5:
    return kValB;
  case 6:
    return kValC;
  case 7:
    return kValN;
  case 8:
    return kValO;
  case 15:
    return kValP;
  case 16:
    return kValS;
  case 9:
  case 17:
  case 35:
  case 53:
    return kValHalogen;
  default:
    return {};
  }
}

std::optional<int> max_valence(int z, int charge) noexcept {
  if (z < 1 || z >= static_cast<int>(kElements.size()))
    return std::nullopt;
  const int base = kElements[z].max_valence;
  if (base == 0)
    return std::nullopt;

  int v = base;
  switch (z) {
  case 5:  // B: B- is tetravalent
    v = base - charge;
    break;
  case 6:  // carbocations and carbanions are trivalent
  case 14:
    v = base - (charge < 0 ? -charge : charge);
    break;
  case 1:
  case 3:
  case 11:
  case 19:
  case 37:
  case 55:
  case 4:
  case 12:
  case 20:
  case 38:
  case 56:
  case 13:
    // Ionic species: valence shrinks with charge magnitude.
    v = base - (charge < 0 ? -charge : charge);
    break;
  default:
    // Pnictogens, chalcogens, halogens: onium cations gain a bond,
    // anions lose one.
    v = base + charge;
    break;
  }
  return v < 0 ? 0 : v;
}

}  // namespace molchord
