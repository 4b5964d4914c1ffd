//
// MolChord desk pipeline - Copyright 2026 The MolChord Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molchord/fixtures/synthetic.h"

#include <array>
#include <cstdio>
#include <set>
#include <string>
#include <vector>

#include "molchord/error.h"

namespace molchord {
namespace {
  constexpr std::array<std::string_view, 24> kRingTemplates = {
    "c1ccccc1",                  // benzene
    "c1ccccc1",                  //
    "c1ccncc1",                  // pyridine
    "c1cc[nH]c1",                // pyrrole
    "c1ccsc1",                   // thiophene
    "c1ccoc1",                   // furan
    "c1cnc[nH]1",                // imidazole
    "C1CCCCC1",                  // cyclohexane
    "C1CCCC1",                   // cyclopentane
    "C1CC1",                     // cyclopropane
    "C1CCNCC1",                  // piperidine
    "C1COCCN1",                  // morpholine
    "C1CNCCN1",                  // piperazine
    "c1ccc2ccccc2c1",            // naphthalene
    "c1ccc2[nH]ccc2c1",          // indole
    "c1ccc2ncccc2c1",            // quinoline
    "C1CCC2CCCCC2C1",            // decalin
    "C1CCC2(CC1)CCCC2",          // spiro
    "C1CC2CCC1C2",               // norbornane
    "C1CC2CC3CC1CC(C2)C3",       // adamantane
    "c1ccc2cc3ccccc3cc2c1",      // anthracene
    "c1cc2ccc3cccc4ccc(c1)c2c34",  // pyrene
    "C1CC2CCC3CCCC4CCC(C1)C2C34",  // saturated tetracycle
    "c1ccc2c(c1)-c1ccccc1-2",      // biphenylene
  };

  struct Substituent {
    std::string_view smiles;
    // Bond order used to attach atom 0.
    BondOrder order;
  };

  constexpr std::array<Substituent, 14> kSubstituents = { {
      { "F", BondOrder::kSingle },
      { "Cl", BondOrder::kSingle },
      { "Br", BondOrder::kSingle },
      { "O", BondOrder::kSingle },
      { "N", BondOrder::kSingle },
      { "C", BondOrder::kSingle },
      { "CC", BondOrder::kSingle },
      { "OC", BondOrder::kSingle },
      { "C#N", BondOrder::kSingle },
      { "C(=O)O", BondOrder::kSingle },
      { "C(F)(F)F", BondOrder::kSingle },
      { "C(=O)N", BondOrder::kSingle },
      { "S(=O)(=O)N", BondOrder::kSingle },
      { "O", BondOrder::kDouble },
  } };

  constexpr std::array<std::string_view, 8> kChainAtoms = {
    "C", "C", "C", "C", "C", "N", "O", "S",
  };

  constexpr std::array<std::string_view, 24> kDrugs = {
    "CC(=O)Oc1ccccc1C(=O)O",
    "CC(C)Cc1ccc(cc1)C(C)C(=O)O",
    "Cn1cnc2c1c(=O)n(C)c(=O)n2C",
    "CC(=O)Nc1ccc(O)cc1",
    "CN1CCCC1c1cccnc1",
    "CN1C(=O)CN=C(c2ccccc2)c2cc(Cl)ccc21",
    "Cc1ccc(NC(=O)c2ccc(CN3CCN(C)CC3)cc2)cc1Nc1nccc(-c2cccnc2)n1",
    "CCCc1nn(C)c2c(=O)[nH]c(-c3cc(S(=O)(=O)N4CCN(C)CC4)ccc3OCC)nc12",
    "CN(C)C(=N)NC(=N)N",
    "CC(=O)CC(c1ccccc1)c1c(O)c2ccccc2oc1=O",
    "Cc1ccc(-c2cc(C(F)(F)F)nn2-c2ccc(S(N)(=O)=O)cc2)cc1",
    "C[C@]12CC[C@H]3[C@@H](CCC4=CC(=O)CC[C@@]34C)[C@@H]1CC[C@@H]2O",
    "CN1CC[C@]23c4c5ccc(O)c4O[C@H]2[C@@H](O)C=C[C@H]3[C@H]1C5",
    "COc1ccc2[nH]cc(CCN(C)C)c2c1",
    "OC(=O)CCCc1ccc(N(CCCl)CCCl)cc1",
    "CC(C)NCC(O)COc1cccc2ccccc12",
    "Clc1ccc(cc1)C(c1ccccc1)N1CCN(CC1)CCOCC(=O)O",
    "CN1CCN(CC1)C1=Nc2cc(Cl)ccc2Nc2ccccc21",
    "O=C(O)c1cn(C2CC2)c2cc(N3CCNCC3)c(F)cc2c1=O",
    "CC1(C)SC2C(NC(=O)Cc3ccccc3)C(=O)N2C1C(=O)O",
    "NC(=O)c1cccnc1",
    "OCC1OC(O)C(O)C(O)C1O",
    "c1ccc2c(c1)ccc1ccccc12",
    "FC(F)(F)c1ccc(OC(CCNC)c2ccccc2)cc1",
  };

  class Builder {
  public:
    int size() const { return static_cast<int>(mol_.num_atoms()); }

    // Appends a fragment; returns the index of its first atom.
    int append(std::string_view smiles) {
      const Molecule frag = parse_smiles(smiles);
      const int offset = size();
      for (Atom atom: frag.atoms()) {
        atom.implicit_h = 0;
        mol_.add_atom(std::move(atom));
      }
      for (const auto &b: frag.bonds())
        mol_.add_bond(b.begin + offset, b.end + offset, b.order,
                      b.explicit_symbol);
      return offset;
    }

    int free_valence(int a) const {
      const Atom &atom = mol_.atom(a);
      if (atom.bracket)
        return 0;
      return implied_hydrogens(mol_, a);
    }

    // Random atom in [lo, hi) that can take `need` more bond order.
    int pick_site(Rng &rng, int lo, int hi, int need,
                  bool allow_aromatic = true, bool carbon_only = false) const {
      std::vector<int> sites;
      for (int a = lo; a < hi; ++a) {
        if (!allow_aromatic && mol_.atom(a).aromatic)
          continue;
        if (carbon_only && mol_.atom(a).atomic_number != 6)
          continue;
        if (free_valence(a) >= need)
          sites.push_back(a);
      }
      if (sites.empty())
        return -1;
      return sites[rng.below(sites.size())];
    }

    bool connect(int a, int b, BondOrder order) {
      return mol_.add_bond(a, b, order, order != BondOrder::kSingle) >= 0;
    }

    std::string finish() {
      perceive_rings(mol_);
      for (auto &atom: mol_.atoms())
        if (!atom.bracket)
          atom.implicit_h = implied_hydrogens(mol_, atom.index);
      if (!validate_valence(mol_).empty())
        throw Error(Errc::kValenceViolation,
                    "synthetic builder produced an invalid molecule");
      return canonical_smiles(mol_);
    }

  private:
    Molecule mol_;
  };

  int uniform_int(Rng &rng, int lo, int hi) {
    return lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(hi - lo + 1)));
  }

  // Linear chain of 1..max_len atoms.
  void add_chain(Builder &b, Rng &rng, int max_len) {
    const int len = uniform_int(rng, 1, max_len);
    int prev = -1;
    for (int i = 0; i < len; ++i) {
      const int idx = b.append(kChainAtoms[rng.below(kChainAtoms.size())]);
      if (prev >= 0)
        b.connect(prev, idx, BondOrder::kSingle);
      prev = idx;
    }
  }

  std::string build(Rng &rng, const SyntheticMoleculeOptions &opts,
                    bool short_only) {
    Builder b;
    const int systems = uniform_int(rng, opts.min_ring_systems,
                                    opts.max_ring_systems);
    if (systems == 0)
      add_chain(b, rng, short_only ? 6 : 8);

    // Short molecules only draw from the small monocyclic templates.
    const std::size_t template_limit = short_only ? 13 : kRingTemplates.size();
    for (int s = 0; s < systems; ++s) {
      const auto tmpl = kRingTemplates[rng.below(template_limit)];
      if (b.size() == 0) {
        b.append(tmpl);
        continue;
      }
      if (b.size() + 10 > opts.max_heavy_atoms)
        break;

      const int existing = b.size();
      int anchor = b.pick_site(rng, 0, existing, 1);
      if (anchor < 0)
        break;
      // Optional linker of up to two atoms.
      const int linker = static_cast<int>(rng.below(3));
      for (int i = 0; i < linker; ++i) {
        const int idx = b.append(rng.below(4) == 0 ? "N" : "C");
        b.connect(anchor, idx, BondOrder::kSingle);
        anchor = idx;
      }
      const int start = b.size();
      b.append(tmpl);
      const int site = b.pick_site(rng, start, b.size(), 1);
      if (site < 0 || !b.connect(anchor, site, BondOrder::kSingle))
        break;
    }

    const int subs = uniform_int(rng, 0, opts.max_substituents);
    for (int s = 0; s < subs; ++s) {
      const auto &sub = kSubstituents[rng.below(kSubstituents.size())];
      if (b.size() + 4 > opts.max_heavy_atoms)
        break;
      const int need = sub.order == BondOrder::kDouble ? 2 : 1;
      const int site = b.pick_site(rng, 0, b.size(), need,
                                   sub.order != BondOrder::kDouble, true);
      if (site < 0)
        continue;
      const int idx = b.append(sub.smiles);
      b.connect(site, idx, sub.order);
    }
    return b.finish();
  }
}  // namespace

std::string random_molecule_smiles(Rng &rng,
                                   const SyntheticMoleculeOptions &opts) {
  return build(rng, opts, false);
}

std::string random_short_smiles(Rng &rng, int max_heavy_atoms) {
  SyntheticMoleculeOptions opts;
  opts.max_heavy_atoms = max_heavy_atoms;
  opts.min_ring_systems = 0;
  opts.max_ring_systems = 1;
  opts.max_substituents = 3;
  return build(rng, opts, true);
}

std::span<const std::string_view> reference_drug_smiles() { return kDrugs; }

std::string random_pocket_sequence(Rng &rng, int length) {
  static constexpr std::string_view kResidues = "ACDEFGHIKLMNPQRSTVWY";
  std::string out;
  out.reserve(static_cast<std::size_t>(length));
  for (int i = 0; i < length; ++i)
    out.push_back(kResidues[rng.below(kResidues.size())]);
  return out;
}

double surrogate_vina(const Molecule &mol) {
  int heavy = 0;
  for (const auto &a: mol.atoms())
    heavy += a.element != "H";
  return -(2.0 + 0.35 * heavy + 0.4 * static_cast<double>(mol.rings().size()));
}

double surrogate_vina(std::string_view smiles) {
  return surrogate_vina(parse_smiles(smiles));
}

FixtureSet make_fixture(const FixtureOptions &opts) {
  FixtureSet out;
  auto pocket = [&](const std::string &id, std::uint64_t key, int ligands) {
    Rng rng(stream_seed(opts.seed, id, key));
    ComplexRecord rec;
    rec.pocket_id = id;
    const int residues = opts.min_residues
                         + static_cast<int>(rng.below(static_cast<std::uint64_t>(
                             opts.max_residues - opts.min_residues + 1)));
    rec.pocket_sequence = random_pocket_sequence(rng, residues);
    std::set<std::string> seen;
    for (int attempt = 0; static_cast<int>(rec.ligand_smiles.size()) < ligands
                          && attempt < 100;
         ++attempt) {
      auto smi = random_short_smiles(rng, 12);
      if (seen.insert(smi).second)
        rec.ligand_smiles.push_back(std::move(smi));
    }
    rec.reference_vina = surrogate_vina(rec.ligand_smiles.front());
    return rec;
  };

  Rng counts(stream_seed(opts.seed, "fixture-ligand-counts", 0));
  for (int i = 0; i < opts.pockets; ++i) {
    char id[32];
    std::snprintf(id, sizeof(id), "pocket-%05d", i);
    const int n = 1 + static_cast<int>(counts.below(
                          static_cast<std::uint64_t>(opts.max_ligands)));
    out.complexes.push_back(pocket(id, 0, n));
  }
  for (int i = 0; i < opts.eval_pockets; ++i) {
    char id[32];
    std::snprintf(id, sizeof(id), "test-%03d", i);
    auto rec = pocket(id, 1, 1);
    rec.homology = i % 2 == 0 ? Homology::kHomologous : Homology::kNonHomologous;
    out.eval_complexes.push_back(std::move(rec));
  }
  return out;
}

}  // namespace molchord
