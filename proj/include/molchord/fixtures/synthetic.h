//
// MolChord desk pipeline - Copyright 2026 The MolChord Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLCHORD_FIXTURES_SYNTHETIC_H_
#define MOLCHORD_FIXTURES_SYNTHETIC_H_

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "molchord/curation/curation.h"
#include "molchord/molgraph/molecule.h"
#include "molchord/util/rng.h"

namespace molchord {

struct SyntheticMoleculeOptions {
  int max_heavy_atoms = 32;
  // Number of ring systems drawn uniformly from [min_rings, max_rings].
  int min_ring_systems = 0;
  int max_ring_systems = 3;
  // Upper bound on substituents decorating the scaffold.
  int max_substituents = 4;
};

// Random valid molecule assembled from ring templates (aromatic, saturated,
// fused, spiro, bridged), linkers and substituents. Returned as canonical
// SMILES.
std::string random_molecule_smiles(Rng &rng,
                                   const SyntheticMoleculeOptions &opts = {});

// Short molecules for desk-scale language-model training.
std::string random_short_smiles(Rng &rng, int max_heavy_atoms = 14);

// Marketed-drug SMILES used as realistic fixtures.
std::span<const std::string_view> reference_drug_smiles();

// Random amino-acid residue string.
std::string random_pocket_sequence(Rng &rng, int length);

// Deterministic stand-in for a docking score (kcal/mol, lower is better):
// -(2 + 0.35 * heavy atoms + 0.4 * SSSR rings).
double surrogate_vina(const Molecule &mol);
double surrogate_vina(std::string_view smiles);

struct FixtureOptions {
  int pockets = 50;
  int eval_pockets = 10;
  // Ligands per training pocket are drawn uniformly from [1, max_ligands].
  int max_ligands = 4;
  int min_residues = 8;
  int max_residues = 20;
  std::uint64_t seed = 0;
};

struct FixtureSet {
  std::vector<ComplexRecord> complexes;
  // Held-out pockets with one reference ligand, its surrogate score and an
  // alternating homology label.
  std::vector<ComplexRecord> eval_complexes;
};

// Ligand SMILES are canonical and distinct within a pocket.
FixtureSet make_fixture(const FixtureOptions &opts);

}  // namespace molchord

#endif  // MOLCHORD_FIXTURES_SYNTHETIC_H_
