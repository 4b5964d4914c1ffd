//
// MolChord desk pipeline - Copyright 2026 The MolChord Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <cmath>
#include <random>

#include <doctest.h>

#include "molchord/error.h"
#include "molchord/fixtures/synthetic.h"
#include "molchord/metrics/metrics.h"
#include "molchord/molgraph/molecule.h"
#include "oracles.h"

namespace mc = molchord;

namespace {
mc::Fingerprint from_bits(std::initializer_list<int> bits) {
  mc::Fingerprint fp(64, 2);
  for (int b: bits)
    fp.set(b);
  return fp;
}

mc::Generation gen(std::string smiles, double vina,
                   std::optional<double> qed = std::nullopt,
                   std::optional<double> sa_origin = std::nullopt) {
  return { mc::canonicalize(smiles), vina, qed, sa_origin };
}
}  // namespace

TEST_CASE("diversity examples") {
  const auto a = from_bits({ 1, 2, 3 });
  CHECK(mc::diversity({ a, a, a, a }) == 0.0);
  CHECK(mc::diversity({ from_bits({ 1 }), from_bits({ 2 }) }) == 1.0);

  // Regions chosen so the pairwise similarities are 0.2, 0.4 and 0.6.
  const auto x = from_bits({ 0, 3, 4, 9, 10 });
  const auto y = from_bits({ 1, 5, 6, 7, 8, 9, 10 });
  const auto z = from_bits({ 2, 3, 4, 5, 6, 7, 8, 9, 10 });
  CHECK(mc::tanimoto(x, y) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(mc::tanimoto(x, z) == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(mc::tanimoto(y, z) == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(mc::diversity({ x, y, z }) == doctest::Approx(0.6).epsilon(1e-12));

  CHECK_THROWS_AS(mc::diversity({ a }), mc::Error);
  try {
    mc::diversity({});
  } catch (const mc::Error &e) {
    CHECK(e.code() == mc::Errc::kTooFewItems);
  }
}

TEST_CASE("diversity matches the double-loop oracle") {
  mc::Rng rng(7);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(30));
    std::vector<mc::Fingerprint> fps;
    for (int i = 0; i < n; ++i) {
      mc::SyntheticMoleculeOptions opts;
      fps.push_back(mc::morgan_fingerprint(
          mc::parse_smiles(mc::random_molecule_smiles(rng, opts))));
    }
    CHECK(std::abs(mc::diversity(fps) - mc::oracle::diversity_double_loop(fps))
          <= 1e-12);
  }
}

TEST_CASE("sa_normalize") {
  CHECK(mc::sa_normalize(10) == 0.0);
  CHECK(mc::sa_normalize(1) == 1.0);
  CHECK(mc::sa_normalize(5.5) == doctest::Approx(0.5).epsilon(1e-12));
  double prev = 2;
  for (double s = 1; s <= 10; s += 0.25) {
    CHECK(mc::sa_normalize(s) < prev);
    prev = mc::sa_normalize(s);
  }
  CHECK_THROWS_AS(mc::sa_normalize(0.5), mc::Error);
  CHECK_THROWS_AS(mc::sa_normalize(10.5), mc::Error);
  CHECK_THROWS_AS(mc::sa_normalize(std::nan("")), mc::Error);
}

TEST_CASE("success_gate is strict on every threshold") {
  CHECK(mc::success_gate(0.30, 0.60, -9.0));
  CHECK_FALSE(mc::success_gate(0.25, 0.60, -9.0));
  CHECK_FALSE(mc::success_gate(0.30, 0.59, -9.0));
  CHECK_FALSE(mc::success_gate(0.30, 0.60, -8.18));
}

TEST_CASE("high_affinity_fraction") {
  CHECK(mc::high_affinity_fraction({ -9, -8, -7 }, -8.0)
        == doctest::Approx(2.0 / 3.0));
  CHECK(mc::high_affinity_fraction({ -8, -8 }, -8.0) == 1.0);
  CHECK(mc::high_affinity_fraction({ -1, -2 }, -8.0) == 0.0);
  try {
    mc::high_affinity_fraction({ -1 }, std::nullopt);
    FAIL("expected MissingReference");
  } catch (const mc::Error &e) {
    CHECK(e.code() == mc::Errc::kMissingReference);
  }
}

TEST_CASE("evaluate on hand-computed fixtures") {
  mc::PocketEval p;
  p.pocket_id = "p1";
  p.reference_vina = -8.0;
  // sa_origin chosen so normalized SA is 0.6 and 0.7.
  p.generations = { gen("CCO", -9.0, 0.3, 4.6),
                    gen("c1ccccc1", -7.0, 0.2, 3.7) };

  const auto one = mc::evaluate({ p });
  REQUIRE(one.high_affinity);
  CHECK(*one.high_affinity == doctest::Approx(0.5));
  REQUIRE(one.success_rate);
  CHECK(*one.success_rate == doctest::Approx(0.5));
  CHECK(one.mean_vina == doctest::Approx(-8.0));
  CHECK(*one.mean_qed == doctest::Approx(0.25));
  CHECK(*one.mean_sa == doctest::Approx(0.65));
  REQUIRE(one.diversity);
  CHECK_FALSE(one.ood);

  mc::PocketEval q = p;
  q.pocket_id = "p2";
  const auto two = mc::evaluate({ p, q });
  CHECK(two.mean_vina == doctest::Approx(one.mean_vina));
  CHECK(*two.high_affinity == doctest::Approx(*one.high_affinity));
  CHECK(*two.success_rate == doctest::Approx(*one.success_rate));
  CHECK(*two.diversity == doctest::Approx(*one.diversity));

  // Missing reference: excluded from the mean rather than counted as 0.
  mc::PocketEval r = p;
  r.pocket_id = "p3";
  r.reference_vina.reset();
  r.generations = { gen("CCO", -9.0, 0.3, 4.6), gen("CCN", -9.0, 0.3, 4.6) };
  const auto mixed = mc::evaluate({ p, r });
  CHECK_FALSE(mixed.per_pocket[1].high_affinity);
  CHECK(*mixed.high_affinity == doctest::Approx(0.5));

  // No QED or SA anywhere: the columns are absent, not zero.
  mc::PocketEval bare;
  bare.pocket_id = "bare";
  bare.generations = { gen("CCO", -5.0), gen("CCC", -6.0) };
  const auto b = mc::evaluate({ bare });
  CHECK_FALSE(b.mean_qed);
  CHECK_FALSE(b.mean_sa);
  CHECK_FALSE(b.success_rate);
  CHECK_FALSE(b.high_affinity);
}

TEST_CASE("evaluate errors") {
  CHECK_THROWS_AS(mc::evaluate({}), mc::Error);
  mc::PocketEval p;
  p.pocket_id = "gap";
  p.generations = { gen("CCO", -5.0) };
  p.generations[0].vina.reset();
  try {
    mc::evaluate({ p });
    FAIL("expected ScoreCoverageGap");
  } catch (const mc::Error &e) {
    CHECK(e.code() == mc::Errc::kScoreCoverageGap);
    CHECK(std::string(e.what()).find("gap") != std::string::npos);
    CHECK(std::string(e.what()).find("CCO") != std::string::npos);
  }
}

TEST_CASE("evaluate is permutation invariant and thread-count invariant") {
  mc::Rng rng(11);
  std::vector<mc::PocketEval> pockets;
  for (int i = 0; i < 8; ++i) {
    mc::PocketEval p;
    p.pocket_id = "p" + std::to_string(i);
    p.reference_vina = -6 - rng.uniform() * 4;
    for (int g = 0; g < 6; ++g)
      p.generations.push_back(gen(mc::random_short_smiles(rng),
                                  -4 - rng.uniform() * 6, rng.uniform(),
                                  1 + 9 * rng.uniform()));
    pockets.push_back(p);
  }
  const auto base = mc::evaluate(pockets, 1);
  const auto threaded = mc::evaluate(pockets, 4);
  CHECK(base.mean_vina == threaded.mean_vina);
  CHECK(*base.success_rate == *threaded.success_rate);

  auto shuffled = pockets;
  std::mt19937 g(3);
  std::shuffle(shuffled.begin(), shuffled.end(), g);
  for (auto &p: shuffled)
    std::shuffle(p.generations.begin(), p.generations.end(), g);
  const auto s = mc::evaluate(shuffled);
  CHECK(s.mean_vina == doctest::Approx(base.mean_vina).epsilon(1e-12));
  CHECK(*s.diversity == doctest::Approx(*base.diversity).epsilon(1e-12));
  CHECK(*s.high_affinity == doctest::Approx(*base.high_affinity));
  CHECK(*s.success_rate == doctest::Approx(*base.success_rate));
  CHECK(s.fused_ring_mean == doctest::Approx(base.fused_ring_mean));
}

TEST_CASE("fused_ring_report") {
  auto pocket_of = [](std::vector<std::string> smiles) {
    mc::PocketEval p;
    p.pocket_id = "p";
    double v = -10;
    for (auto &s: smiles)
      p.generations.push_back(gen(s, v += 0.1));
    return p;
  };
  CHECK(mc::fused_ring_report({ pocket_of(std::vector<std::string>(
                                   10, "c1ccccc1")) },
                              10)
            .mean
        == 0.0);
  CHECK(mc::fused_ring_report({ pocket_of(std::vector<std::string>(
                                   10, "c1ccc2ccccc2c1")) },
                              10)
            .mean
        == 2.0);

  std::vector<std::string> mixed(5, "c1ccccc1");
  mixed.insert(mixed.end(), 5, "c1ccc2ccccc2c1");
  const auto rep = mc::fused_ring_report({ pocket_of(mixed) }, 10);
  CHECK(rep.mean == 1.0);
  CHECK(rep.histogram.at(0) == 5);
  CHECK(rep.histogram.at(2) == 5);
  // The five best scores are the benzene rows.
  CHECK(mc::fused_ring_report({ pocket_of(mixed) }, 5).mean == 0.0);

  // top_k = all equals the unfiltered per-pocket mean.
  mc::PocketEval p = pocket_of(mixed);
  CHECK(mc::fused_ring_report({ p }, 10).mean
        == doctest::Approx(mc::evaluate_pocket(p).fused_ring_mean));

  try {
    mc::fused_ring_report({ pocket_of(mixed) }, 11);
    FAIL("expected TooFewGenerations");
  } catch (const mc::Error &e) {
    CHECK(e.code() == mc::Errc::kTooFewGenerations);
  }
}

TEST_CASE("ood_report") {
  auto pocket = [](std::string id, double vina, mc::Homology h) {
    mc::PocketEval p;
    p.pocket_id = std::move(id);
    p.homology = h;
    p.generations = { gen("CCO", vina) };
    return p;
  };
  const auto r = mc::ood_report(
      { pocket("a", -8.49, mc::Homology::kHomologous),
        pocket("b", -8.66, mc::Homology::kNonHomologous) });
  CHECK(r.delta == doctest::Approx(0.17).epsilon(1e-9));
  CHECK(r.delta > 0);

  const auto same = mc::ood_report(
      { pocket("a", -8, mc::Homology::kHomologous),
        pocket("b", -8, mc::Homology::kNonHomologous) });
  CHECK(same.delta == 0.0);

  try {
    mc::ood_report({ pocket("a", -8, mc::Homology::kHomologous) });
    FAIL("expected EmptyGroup");
  } catch (const mc::Error &e) {
    CHECK(e.code() == mc::Errc::kEmptyGroup);
  }
  try {
    mc::ood_report({ pocket("a", -8, mc::Homology::kUnknown) });
    FAIL("expected UnlabeledPocket");
  } catch (const mc::Error &e) {
    CHECK(e.code() == mc::Errc::kUnlabeledPocket);
  }
}
