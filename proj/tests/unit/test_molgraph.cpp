//
// MolChord desk pipeline - Copyright 2026 The MolChord Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include <doctest.h>

#include "molchord/error.h"
#include "molchord/fixtures/synthetic.h"
#include "molchord/molgraph/fingerprint.h"
#include "molchord/molgraph/molecule.h"
#include "oracles.h"

using namespace molchord;

namespace {
Errc parse_error(const std::string &smiles, std::size_t *offset = nullptr) {
  try {
    parse_smiles(smiles);
  } catch (const SmilesError &e) {
    if (offset)
      *offset = e.offset();
    return e.code();
  }
  FAIL("expected a parse error for " << smiles);
  return Errc::kEmptyInput;
}

std::vector<int> ring_sizes(const Molecule &m) {
  std::vector<int> s;
  for (const auto &r: m.rings())
    s.push_back(static_cast<int>(r.size()));
  std::sort(s.begin(), s.end());
  return s;
}
}  // namespace

TEST_CASE("parse_smiles: benzene") {
  auto m = parse_smiles("c1ccccc1");
  CHECK(m.num_atoms() == 6);
  CHECK(m.num_bonds() == 6);
  CHECK(m.rings().size() == 1);
  for (const auto &a: m.atoms()) {
    CHECK(a.aromatic);
    CHECK(a.total_h() == 1);
  }
}

TEST_CASE("parse_smiles: naphthalene counts") {
  auto m = parse_smiles("c1ccc2ccccc2c1");
  CHECK(m.num_atoms() == 10);
  CHECK(m.num_bonds() == 11);
  CHECK(m.rings().size() == 2);
  CHECK(ring_sizes(m) == std::vector<int> { 6, 6 });

  // Cross-check against exhaustive cycle enumeration.
  auto basis = oracle::minimum_cycle_basis(oracle::to_graph(m));
  CHECK(basis.size() == 2);
  CHECK(basis[0].size() == 6);
  CHECK(basis[1].size() == 6);
  CHECK(oracle::all_simple_cycles(oracle::to_graph(m)).size() == 3);
}

TEST_CASE("parse_smiles: error kinds and offsets") {
  std::size_t off = 0;
  CHECK(parse_error("C(", &off) == Errc::kUnclosedBranch);
  CHECK(off == 1);
  CHECK(parse_error("", &off) == Errc::kEmptyInput);
  CHECK(off == 0);
  CHECK(parse_error("C1CC", &off) == Errc::kUnmatchedRingBond);
  CHECK(off == 1);
  CHECK(parse_error("CC[Xx]", &off) == Errc::kUnknownElement);
  CHECK(off == 3);
  CHECK(parse_error("CCX") == Errc::kUnknownElement);
  CHECK(parse_error("C(C)(C)(C)(C)C", &off) == Errc::kValenceViolation);
  CHECK(off == 0);
  CHECK(parse_error("C)") == Errc::kSyntaxError);
  CHECK(parse_error("C=") == Errc::kSyntaxError);
  CHECK(parse_error("C-1CC=1") == Errc::kUnmatchedRingBond);
  CHECK(parse_error("C11") == Errc::kUnmatchedRingBond);
  CHECK(parse_error("cc") == Errc::kSyntaxError);  // aromatic outside ring
  CHECK(parse_error(std::string(4097, 'C')) == Errc::kInputTooLong);
}

TEST_CASE("parse_smiles: grammar coverage") {
  SUBCASE("branches and bond symbols") {
    auto m = parse_smiles("CC(=O)O");
    CHECK(m.num_atoms() == 4);
    CHECK(m.bond(m.find_bond(1, 2)).order == BondOrder::kDouble);
    CHECK(m.atom(3).total_h() == 1);
  }
  SUBCASE("percent ring closures") {
    auto m = parse_smiles("C%12CCCCC%12");
    CHECK(m.rings().size() == 1);
    CHECK(m.rings()[0].size() == 6);
  }
  SUBCASE("bracket atoms") {
    auto m = parse_smiles("[NH4+].[O-]C(=O)C");
    CHECK(m.atom(0).formal_charge == 1);
    CHECK(m.atom(0).total_h() == 4);
    CHECK(m.atom(1).formal_charge == -1);
    CHECK(m.num_components() == 2);
    auto iso = parse_smiles("[13CH4]");
    CHECK(iso.atom(0).isotope == 13);
    CHECK(parse_smiles("[Fe++]").atom(0).formal_charge == 2);
    CHECK(parse_smiles("[O-2]").atom(0).formal_charge == -2);
  }
  SUBCASE("two-letter organic atoms") {
    auto m = parse_smiles("ClCBr");
    CHECK(m.atom(0).element == "Cl");
    CHECK(m.atom(2).element == "Br");
  }
  SUBCASE("stereo is dropped with a warning") {
    auto m = parse_smiles("F/C=C/F");
    CHECK(m.num_atoms() == 4);
    CHECK_FALSE(m.warnings().empty());
    auto c = parse_smiles("N[C@@H](C)C(=O)O");
    CHECK(c.atom(1).total_h() == 1);
    CHECK_FALSE(c.warnings().empty());
  }
  SUBCASE("biphenyl link is single") {
    auto m = parse_smiles("c1ccccc1c1ccccc1");
    CHECK(m.bond(m.find_bond(5, 6)).order == BondOrder::kSingle);
  }
  SUBCASE("heteroaromatics") {
    CHECK_NOTHROW(parse_smiles("c1ccncc1"));
    CHECK_NOTHROW(parse_smiles("c1cc[nH]c1"));
    CHECK_NOTHROW(parse_smiles("c1ccoc1"));
    CHECK_NOTHROW(parse_smiles("c1ccsc1"));
    CHECK_NOTHROW(parse_smiles("O=c1cccc[nH]1"));
  }
}

TEST_CASE("validate_valence") {
  CHECK(validate_valence(parse_smiles("C")).empty());
  CHECK(validate_valence(parse_smiles("O=C=O")).empty());
  CHECK(validate_valence(parse_smiles("C[N+](C)(C)C")).empty());

  // Build the 5-coordinate carbon directly since the parser rejects it.
  Molecule m;
  for (int i = 0; i < 6; ++i) {
    Atom a;
    a.element = "C";
    a.atomic_number = 6;
    m.add_atom(a);
  }
  for (int i = 1; i < 6; ++i)
    m.add_bond(0, i, BondOrder::kSingle);
  auto v = validate_valence(m);
  REQUIRE(v.size() == 1);
  CHECK(v[0].atom == 0);
  CHECK(v[0].valence == 5);
  CHECK(v[0].allowed == 4);
}

TEST_CASE("perceive_rings") {
  CHECK(ring_sizes(parse_smiles("c1ccccc1")) == std::vector<int> { 6 });
  CHECK(parse_smiles("CCO").rings().empty());

  auto naph = parse_smiles("c1ccc2ccccc2c1");
  // Two rings share exactly one bond.
  const auto &r = naph.rings();
  std::set<std::pair<int, int>> e0, e1;
  auto edges = [](const std::vector<int> &ring) {
    std::set<std::pair<int, int>> s;
    for (std::size_t i = 0; i < ring.size(); ++i) {
      int a = ring[i], b = ring[(i + 1) % ring.size()];
      s.insert({ std::min(a, b), std::max(a, b) });
    }
    return s;
  };
  e0 = edges(r[0]);
  e1 = edges(r[1]);
  std::vector<std::pair<int, int>> common;
  std::set_intersection(e0.begin(), e0.end(), e1.begin(), e1.end(),
                        std::back_inserter(common));
  CHECK(common.size() == 1);

  CHECK(ring_sizes(parse_smiles("C1CC2CCC1C2")) == std::vector<int> { 5, 5 });
  CHECK(ring_sizes(parse_smiles("C12C3C4C1C5C2C3C45"))
        == std::vector<int> { 4, 4, 4, 4, 4 });
}

TEST_CASE("count_fused_rings") {
  CHECK(count_fused_rings(parse_smiles("c1ccccc1")) == 0);
  CHECK(count_fused_rings(parse_smiles("c1ccc2ccccc2c1")) == 2);
  CHECK(count_fused_rings(parse_smiles("c1ccc(-c2ccccc2)cc1")) == 0);
  CHECK(count_fused_rings(parse_smiles("C1CCC2(CC1)CCCC2")) == 0);  // spiro
  CHECK(count_fused_rings(parse_smiles("c1ccc2cc3ccccc3cc2c1")) == 3);

  for (const char *s: { "c1ccccc1", "c1ccc2ccccc2c1", "c1ccc(-c2ccccc2)cc1",
                        "C1CC2CC3CC1CC(C2)C3", "C1CCC2(CC1)CCCC2" }) {
    auto m = parse_smiles(s);
    CHECK(count_fused_rings(m)
          == oracle::fused_ring_count(oracle::to_graph(m)));
  }
}

TEST_CASE("canonical_smiles") {
  CHECK(canonicalize("OCC") == canonicalize("CCO"));
  CHECK(canonicalize("C1=CC=CC=C1") != canonicalize("c1ccccc1"));
  CHECK(canonicalize("[CH4]") == canonicalize("C"));
  CHECK(canonicalize("c1ccccc1O") == canonicalize("Oc1ccccc1"));
  CHECK(canonicalize("C(C)(C)C") == canonicalize("CC(C)C"));
  CHECK(canonicalize("CCO") != canonicalize("COC"));

  for (auto s: reference_drug_smiles()) {
    CAPTURE(s);
    const std::string c = canonicalize(s);
    CHECK(canonicalize(c) == c);
  }
}

TEST_CASE("canonical_smiles: permutation invariance on a 20-atom fixture") {
  const auto base = parse_smiles("CC(C)Cc1ccc(cc1)C(C)C(=O)NCCc1ccncc1");
  REQUIRE(base.num_atoms() >= 20);
  const std::string expected = canonical_smiles(base);

  Rng rng(7);
  std::vector<int> perm(base.num_atoms());
  std::iota(perm.begin(), perm.end(), 0);
  for (int trial = 0; trial < 100; ++trial) {
    for (std::size_t i = perm.size() - 1; i > 0; --i)
      std::swap(perm[i], perm[rng.below(i + 1)]);
    CHECK(canonical_smiles(permute_atoms(base, perm)) == expected);
  }
}

TEST_CASE("canonical_smiles: class function on small graphs") {
  // Pairs of small molecules: equal strings iff isomorphic.
  Rng rng(11);
  std::vector<Molecule> mols;
  SyntheticMoleculeOptions opts;
  opts.max_heavy_atoms = 10;
  opts.max_ring_systems = 1;
  while (mols.size() < 60) {
    auto m = parse_smiles(random_molecule_smiles(rng, opts));
    if (m.num_atoms() <= 10)
      mols.push_back(std::move(m));
  }
  for (std::size_t i = 0; i < mols.size(); ++i) {
    for (std::size_t j = i + 1; j < mols.size(); ++j) {
      const bool same = canonical_smiles(mols[i]) == canonical_smiles(mols[j]);
      CHECK(same == oracle::isomorphic(mols[i], mols[j]));
    }
  }
}

TEST_CASE("round trip preserves graph statistics") {
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const auto smi = random_molecule_smiles(rng);
    const auto m = parse_smiles(smi);
    const auto again = parse_smiles(canonical_smiles(m));
    CAPTURE(smi);
    CHECK(again.num_atoms() == m.num_atoms());
    CHECK(again.num_bonds() == m.num_bonds());
    CHECK(again.rings().size() == m.rings().size());
    CHECK(count_fused_rings(again) == count_fused_rings(m));
    CHECK(static_cast<int>(m.rings().size()) == m.cyclomatic_number());
  }
}

TEST_CASE("morgan_fingerprint") {
  auto a = morgan_fingerprint(parse_smiles("CCO"));
  auto b = morgan_fingerprint(parse_smiles("OCC"));
  CHECK(a == b);
  CHECK(a.nbits() == 2048);

  auto c = morgan_fingerprint(parse_smiles("C"), 0, 2048);
  auto o = morgan_fingerprint(parse_smiles("O"), 0, 2048);
  CHECK(c.popcount() == 1);
  CHECK(o.popcount() == 1);
  CHECK_FALSE(c == o);

  // Radius 0: benzene has one environment; naphthalene has CH and fusion C.
  auto benz = morgan_fingerprint(parse_smiles("c1ccccc1"), 0, 2048);
  auto naph = morgan_fingerprint(parse_smiles("c1ccc2ccccc2c1"), 0, 2048);
  CHECK(benz.popcount() == 1);
  CHECK(naph.popcount() == 2);
  int shared = 0;
  for (int i = 0; i < 2048; ++i)
    shared += benz.test(i) && naph.test(i);
  CHECK(shared == 1);

  CHECK_THROWS_AS(morgan_fingerprint(parse_smiles("C"), 2, 100), Error);
  CHECK_THROWS_AS(morgan_fingerprint(parse_smiles("C"), 2, 32), Error);
}

TEST_CASE("tanimoto") {
  Fingerprint x(64), y(64), empty(64);
  for (int b: { 1, 2, 3 })
    x.set(b);
  for (int b: { 2, 3, 4 })
    y.set(b);
  CHECK(tanimoto(x, y) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(tanimoto(x, x) == 1.0);
  CHECK(tanimoto(empty, empty) == 1.0);

  Fingerprint d(64);
  d.set(10);
  CHECK(tanimoto(x, d) == 0.0);

  CHECK_THROWS_AS(tanimoto(Fingerprint(64), Fingerprint(128)), Error);
  try {
    tanimoto(Fingerprint(64), Fingerprint(128));
  } catch (const Error &e) {
    CHECK(e.code() == Errc::kWidthMismatch);
  }
}

TEST_CASE("tanimoto properties on random fingerprints") {
  Rng rng(5);
  for (int t = 0; t < 200; ++t) {
    Fingerprint a(256), b(256);
    for (int i = 0; i < 40; ++i) {
      a.set(static_cast<int>(rng.below(256)));
      b.set(static_cast<int>(rng.below(256)));
    }
    const double s = tanimoto(a, b);
    CHECK(s >= 0.0);
    CHECK(s <= 1.0);
    CHECK(s == tanimoto(b, a));
    CHECK(tanimoto(a, a) == 1.0);
    CHECK(s == doctest::Approx(oracle::tanimoto_bits(a, b)).epsilon(1e-15));
  }
}
