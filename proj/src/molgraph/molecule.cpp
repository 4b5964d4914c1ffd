//
// MolChord desk pipeline - Copyright 2026 The MolChord Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molchord/molgraph/molecule.h"

#include <algorithm>
#include <numeric>
#include <utility>

#include "molchord/molgraph/element.h"

namespace molchord {

int Molecule::add_atom(Atom atom) {
  atom.index = static_cast<int>(atoms_.size());
  atoms_.push_back(std::move(atom));
  adjacency_.emplace_back();
  return atoms_.back().index;
}

int Molecule::add_bond(int a, int b, BondOrder order, bool explicit_symbol) {
  if (a == b || find_bond(a, b) >= 0)
    return -1;
  const int idx = static_cast<int>(bonds_.size());
  bonds_.push_back({ a, b, order, explicit_symbol });
  adjacency_[a].push_back({ b, idx });
  adjacency_[b].push_back({ a, idx });
  return idx;
}

int Molecule::find_bond(int a, int b) const {
  for (const auto &nb: adjacency_[a])
    if (nb.atom == b)
      return nb.bond;
  return -1;
}

int Molecule::num_components() const {
  std::vector<int> parent(atoms_.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x)
      x = parent[x] = parent[parent[x]];
    return x;
  };

  int components = static_cast<int>(atoms_.size());
  for (const auto &b: bonds_) {
    int ra = find(b.begin), rb = find(b.end);
    if (ra != rb) {
      parent[ra] = rb;
      --components;
    }
  }
  return components;
}

int Molecule::cyclomatic_number() const {
  return static_cast<int>(bonds_.size()) - static_cast<int>(atoms_.size())
         + num_components();
}

int bond_order_sum(const Molecule &mol, int atom) {
  int sum = 0;
  bool has_multiple = false;
  for (const auto &nb: mol.neighbors(atom)) {
    switch (mol.bond(nb.bond).order) {
    case BondOrder::kSingle:
    case BondOrder::kAromatic:
      sum += 1;
      break;
    case BondOrder::kDouble:
      sum += 2;
      has_multiple = true;
      break;
    case BondOrder::kTriple:
      sum += 3;
      has_multiple = true;
      break;
    }
  }

  const Atom &a = mol.atom(atom);
  if (a.aromatic && !has_multiple
      && (a.atomic_number == 6 || a.atomic_number == 5))
    sum += 1;
  return sum;
}

int implied_hydrogens(const Molecule &mol, int atom) {
  const Atom &a = mol.atom(atom);
  if (a.aromatic && a.atomic_number != 6 && a.atomic_number != 5)
    return 0;

  const int sum = bond_order_sum(mol, atom);
  for (int v: normal_valences(a.atomic_number))
    if (v >= sum)
      return v - sum;
  return 0;
}

std::vector<ValenceViolation> validate_valence(const Molecule &mol) {
  std::vector<ValenceViolation> out;
  for (int i = 0; i < static_cast<int>(mol.num_atoms()); ++i) {
    const Atom &a = mol.atom(i);
    auto allowed = max_valence(a.atomic_number, a.formal_charge);
    if (!allowed)
      continue;
    const int valence = bond_order_sum(mol, i) + a.total_h();
    if (valence > *allowed)
      out.push_back({ i, valence, *allowed });
  }
  return out;
}

Molecule permute_atoms(const Molecule &mol, std::span<const int> perm) {
  std::vector<int> new_index(mol.num_atoms());
  for (int i = 0; i < static_cast<int>(perm.size()); ++i)
    new_index[perm[i]] = i;

  Molecule out;
  for (int old: perm)
    out.add_atom(mol.atom(old));

  // Bond insertion order follows the new atom order so adjacency lists are
  // permuted as well.
  std::vector<std::pair<std::pair<int, int>, int>> order;
  order.reserve(mol.num_bonds());
  for (int b = 0; b < static_cast<int>(mol.num_bonds()); ++b) {
    const Bond &bond = mol.bond(b);
    int x = new_index[bond.begin], y = new_index[bond.end];
    order.push_back({ { std::min(x, y), std::max(x, y) }, b });
  }
  std::sort(order.begin(), order.end());
  for (const auto &[pair, b]: order) {
    const Bond &bond = mol.bond(b);
    out.add_bond(pair.first, pair.second, bond.order, bond.explicit_symbol);
  }

  out.set_source(mol.source());
  perceive_rings(out);
  return out;
}

}  // namespace molchord
