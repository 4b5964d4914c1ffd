//
// MolChord desk pipeline - Copyright 2026 The MolChord Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLCHORD_MOLGRAPH_MOLECULE_H_
#define MOLCHORD_MOLGRAPH_MOLECULE_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace molchord {

enum class BondOrder : std::uint8_t {
  kSingle = 1,
  kDouble = 2,
  kTriple = 3,
  kAromatic = 4,
};

struct Atom {
  std::string element;  // canonical capitalization, e.g. "C", "Cl"
  int atomic_number = 6;
  bool aromatic = false;
  int formal_charge = 0;
  // Hydrogens written inside brackets.
  int explicit_h = 0;
  // Hydrogens implied by the organic-subset valence rules.
  int implicit_h = 0;
  int isotope = 0;
  bool bracket = false;
  int index = 0;
  // Byte offset of the atom in the source text.
  std::size_t offset = 0;

  int total_h() const noexcept { return explicit_h + implicit_h; }
};

struct Bond {
  int begin = 0;
  int end = 0;
  BondOrder order = BondOrder::kSingle;
  // Whether the order came from an explicit symbol rather than a default.
  bool explicit_symbol = false;

  int other(int atom) const noexcept { return atom == begin ? end : begin; }
};

struct Neighbor {
  int atom;
  int bond;
};

class Molecule {
public:
  Molecule() = default;

  int add_atom(Atom atom);
  // Returns the bond index, or -1 if the pair is already bonded or the
  // endpoints coincide.
  int add_bond(int a, int b, BondOrder order, bool explicit_symbol = false);

  std::size_t num_atoms() const noexcept { return atoms_.size(); }
  std::size_t num_bonds() const noexcept { return bonds_.size(); }

  const std::vector<Atom> &atoms() const noexcept { return atoms_; }
  std::vector<Atom> &atoms() noexcept { return atoms_; }
  const Atom &atom(int i) const { return atoms_[i]; }
  Atom &atom(int i) { return atoms_[i]; }

  const std::vector<Bond> &bonds() const noexcept { return bonds_; }
  const Bond &bond(int i) const { return bonds_[i]; }
  void set_bond_order(int i, BondOrder order) { bonds_[i].order = order; }

  std::span<const Neighbor> neighbors(int atom) const {
    return adjacency_[atom];
  }
  int degree(int atom) const {
    return static_cast<int>(adjacency_[atom].size());
  }
  int find_bond(int a, int b) const;

  // SSSR as atom-index cycles; filled by perceive_rings.
  const std::vector<std::vector<int>> &rings() const noexcept {
    return rings_;
  }
  void set_rings(std::vector<std::vector<int>> rings) {
    rings_ = std::move(rings);
  }

  const std::string &source() const noexcept { return source_; }
  void set_source(std::string s) { source_ = std::move(s); }

  const std::vector<std::string> &warnings() const noexcept {
    return warnings_;
  }
  void add_warning(std::string w) { warnings_.push_back(std::move(w)); }

  int num_components() const;
  // Cyclomatic number |E| - |V| + #components.
  int cyclomatic_number() const;

private:
  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
  std::vector<std::vector<Neighbor>> adjacency_;
  std::vector<std::vector<int>> rings_;
  std::string source_;
  std::vector<std::string> warnings_;
};

struct ValenceViolation {
  int atom;
  int valence;
  int allowed;
};

// Bond-order sum of an atom for valence purposes: aromatic bonds count 1,
// and an aromatic carbon or boron with no exocyclic multiple bond gets one
// more for its share of the aromatic system.
int bond_order_sum(const Molecule &mol, int atom);

// Hydrogens implied for an unbracketed organic-subset atom with the given
// bonds. Aromatic heteroatoms imply none (pyrrole-type N is written [nH]).
int implied_hydrogens(const Molecule &mol, int atom);

// Grammar: branches, ring closures (including %nn), bond symbols, bracket
// atoms with isotope, charge and H count, dot-disconnection. Stereo marks
// are accepted and dropped with a warning. Rings are perceived and valence
// is validated; any failure throws SmilesError with the byte offset.
Molecule parse_smiles(std::string_view text);

// Empty result means the molecule is valid.
std::vector<ValenceViolation> validate_valence(const Molecule &mol);

// Fills mol.rings() with a smallest set of smallest rings. Deterministic for
// a given atom order.
void perceive_rings(Molecule &mol);

// Number of SSSR rings sharing at least one bond with another SSSR ring.
// Requires perceive_rings.
int count_fused_rings(const Molecule &mol);

// Canonical SMILES without stereochemistry. Invariant under atom order.
std::string canonical_smiles(const Molecule &mol);

// Convenience: parse and canonicalize.
std::string canonicalize(std::string_view smiles);

// Returns a copy where new atom i is old atom perm[i]; bonds are emitted in
// an order derived from perm. Rings are re-perceived.
Molecule permute_atoms(const Molecule &mol, std::span<const int> perm);

}  // namespace molchord

#endif  // MOLCHORD_MOLGRAPH_MOLECULE_H_
