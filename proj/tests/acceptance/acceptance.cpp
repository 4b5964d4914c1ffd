//
// MolChord desk pipeline - Copyright 2026 The MolChord Authors.
// SPDX-License-Identifier: Apache-2.0
//

// Acceptance suite. Prints one PASS or FAIL line per criterion with the
// measured value, the pinned tolerance and the runtime against its budget.
// Arguments select criteria by number; no arguments runs all of them.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "model_fixtures.h"
#include "molchord/cli/commands.h"
#include "molchord/curation/curation.h"
#include "molchord/error.h"
#include "molchord/fixtures/synthetic.h"
#include "molchord/genmodel/templates.h"
#include "molchord/metrics/metrics.h"
#include "molchord/molgraph/fingerprint.h"
#include "molchord/molgraph/molecule.h"
#include "molchord/scorers/records.h"
#include "molchord/training/training.h"
#include "molchord/util/io.h"
#include "molchord/util/numfmt.h"
#include "oracles.h"

namespace mc = molchord;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances and budgets.
constexpr double kConstantTol = 1e-9;
constexpr double kDiversityTol = 1e-12;
constexpr double kGradRelTol = 1e-3;
constexpr double kKlTol = 1e-6;
constexpr double kSigmaBound = 3.0;
constexpr double kDpoPocketFraction = 0.80;

constexpr double kBudget1 = 1;
constexpr double kBudget2 = 30;
constexpr double kBudget3 = 120;
constexpr double kBudget4 = 10;
constexpr double kBudget5 = 60;
constexpr double kBudget6 = 600;
constexpr double kBudget7 = 60;
constexpr double kBudget8 = 600;

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects sub-checks; the first few failures are kept for the report.
class Checks {
public:
  void expect(bool ok, const std::string &what) {
    ++total_;
    if (ok)
      return;
    ++failed_;
    if (failures_.size() < 3)
      failures_.push_back(what);
  }
  void note(const std::string &s) { notes_.push_back(s); }

  Outcome outcome() const {
    Outcome o;
    o.pass = failed_ == 0;
    std::ostringstream out;
    out << (total_ - failed_) << "/" << total_ << " checks";
    for (const auto &n: notes_)
      out << "; " << n;
    for (const auto &f: failures_)
      out << "; failed: " << f;
    o.detail = out.str();
    return o;
  }

private:
  int total_ = 0, failed_ = 0;
  std::vector<std::string> failures_, notes_;
};

std::string fmt(double v) { return mc::format_double(v); }

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

// ---------------------------------------------------------------------------
// 1. Constants.

Outcome constants() {
  Checks c;
  c.expect(near(mc::sa_normalize(10), 0.0, kConstantTol), "sa_normalize(10)");
  c.expect(near(mc::sa_normalize(1), 1.0, kConstantTol), "sa_normalize(1)");

  // Each threshold is strict: sitting on any one of them fails the gate.
  c.expect(!mc::success_gate(0.25, 0.59, -8.18), "gate at all boundaries");
  c.expect(!mc::success_gate(0.25, 0.9, -9.0), "gate at qed boundary");
  c.expect(!mc::success_gate(0.9, 0.59, -9.0), "gate at sa boundary");
  c.expect(!mc::success_gate(0.9, 0.9, -8.18), "gate at vina boundary");
  c.expect(mc::success_gate(0.25 + 1e-9, 0.59 + 1e-9, -8.18 - 1e-9),
           "gate just inside");

  c.expect(near(mc::reward(-8.0, 4, 0.5), 7.0, kConstantTol), "reward");

  const auto p = mc::test::small_params(1);
  mc::DpoExample pair;
  pair.features = mc::test::toy_pocket("c1", 16, 1, 6);
  pair.template_id = "sbdd/0";
  pair.chosen = mc::Vocabulary::standard().encode_smiles("CCO");
  pair.rejected = mc::Vocabulary::standard().encode_smiles("c1ccccc1");
  pair.complex = mc::complex_features(
      *pair.features, mc::ligand_features(mc::parse_smiles("CCN"), 16));
  mc::Rng rng(2);
  pair.z = mc::test::normal_vector(rng, 16);
  const double at_ref = mc::dpo_loss(p, p, pair, 0.1, 0.0).loss;
  c.expect(near(at_ref, std::log(2.0), kConstantTol), "dpo at reference");

  const std::vector<double> zero(16, 0.0);
  c.expect(near(mc::kl_gaussian(zero, zero), 0.0, kConstantTol), "kl(0, 0)");

  auto pocket = [](std::string id, double vina, mc::Homology h) {
    mc::PocketEval e;
    e.pocket_id = std::move(id);
    e.homology = h;
    e.generations = { { "CCO", vina, std::nullopt, std::nullopt } };
    return e;
  };
  const auto ood = mc::ood_report({
      pocket("h", -8.49, mc::Homology::kHomologous),
      pocket("n", -8.66, mc::Homology::kNonHomologous),
  });
  c.expect(near(ood.delta, 0.17, kConstantTol) && ood.delta > 0, "ood delta");
  c.note("ood delta " + fmt(ood.delta));
  return c.outcome();
}

// ---------------------------------------------------------------------------
// 2. Fused-ring count against simple-cycle enumeration.

// Induced subgraph on `atoms`, keeping element and bond order.
mc::Molecule induced(const mc::Molecule &m, const std::vector<int> &atoms) {
  mc::Molecule sub;
  std::map<int, int> map;
  for (int a: atoms) {
    mc::Atom at = m.atom(a);
    map[a] = sub.add_atom(at);
  }
  for (const auto &b: m.bonds())
    if (map.count(b.begin) && map.count(b.end))
      sub.add_bond(map[b.begin], map[b.end], b.order);
  return sub;
}

// Edge-list key in the subgraph's own labeling.
std::string graph_key(const mc::Molecule &m) {
  std::vector<std::pair<int, int>> e;
  for (const auto &b: m.bonds())
    e.push_back({ std::min(b.begin, b.end), std::max(b.begin, b.end) });
  std::sort(e.begin(), e.end());
  std::string k = std::to_string(m.num_atoms()) + ":";
  for (auto [u, v]: e)
    k += std::to_string(u) + "-" + std::to_string(v) + ",";
  return k;
}

Outcome ring_oracle() {
  constexpr int kMolecules = 500;
  constexpr int kMaxAtoms = 12;
  mc::Rng rng(2026);
  mc::SyntheticMoleculeOptions opts;
  opts.max_heavy_atoms = 24;
  opts.min_ring_systems = 1;
  opts.max_ring_systems = 3;

  // Every breadth-first prefix of up to 12 atoms from every start atom of
  // every fixture molecule; all are connected by construction.
  std::set<std::string> seen;
  std::size_t graphs = 0, mismatches = 0, with_fused = 0;
  std::string first_bad;
  for (int i = 0; i < kMolecules; ++i) {
    const auto mol = mc::parse_smiles(mc::random_molecule_smiles(rng, opts));
    const int n = static_cast<int>(mol.num_atoms());
    for (int start = 0; start < n; ++start) {
      std::vector<int> order { start };
      std::vector<char> in(n, 0);
      in[start] = 1;
      for (std::size_t head = 0; head < order.size(); ++head)
        for (const auto &nb: mol.neighbors(order[head]))
          if (!in[nb.atom]) {
            in[nb.atom] = 1;
            order.push_back(nb.atom);
          }
      for (int size = 1; size <= std::min(n, kMaxAtoms); ++size) {
        auto sub = induced(
            mol, std::vector<int>(order.begin(), order.begin() + size));
        if (!seen.insert(graph_key(sub)).second)
          continue;
        ++graphs;
        mc::perceive_rings(sub);
        const int got = mc::count_fused_rings(sub);
        const int want =
            mc::oracle::fused_ring_count(mc::oracle::to_graph(sub));
        with_fused += want > 0;
        if (got != want && ++mismatches == 1)
          first_bad = graph_key(sub) + " got " + std::to_string(got)
                      + " want " + std::to_string(want);
      }
    }
  }
  Outcome o;
  o.pass = mismatches == 0 && graphs > 0;
  o.detail = std::to_string(graphs - mismatches) + "/" + std::to_string(graphs)
             + " connected graphs agree (" + std::to_string(with_fused)
             + " with fused rings)";
  if (!first_bad.empty())
    o.detail += "; first mismatch " + first_bad;
  return o;
}

// ---------------------------------------------------------------------------
// 3. Canonicalization.

Outcome canonicalization() {
  constexpr int kMolecules = 1000;
  constexpr int kPermutations = 100;
  mc::Rng rng(31);
  Checks c;
  std::size_t non_unique = 0, lossy = 0;
  for (int i = 0; i < kMolecules; ++i) {
    const auto smi = mc::random_molecule_smiles(rng);
    const auto mol = mc::parse_smiles(smi);
    const std::string canon = mc::canonical_smiles(mol);
    std::set<std::string> outputs { canon };
    std::vector<int> perm(mol.num_atoms());
    std::iota(perm.begin(), perm.end(), 0);
    for (int t = 0; t < kPermutations; ++t) {
      for (std::size_t k = perm.size() - 1; k > 0; --k)
        std::swap(perm[k], perm[rng.below(k + 1)]);
      outputs.insert(mc::canonical_smiles(mc::permute_atoms(mol, perm)));
    }
    non_unique += outputs.size() != 1;

    const auto back = mc::parse_smiles(canon);
    const bool same = back.num_atoms() == mol.num_atoms()
                      && back.num_bonds() == mol.num_bonds()
                      && back.rings().size() == mol.rings().size()
                      && mc::count_fused_rings(back)
                             == mc::count_fused_rings(mol)
                      && mc::canonical_smiles(back) == canon;
    lossy += !same;
  }
  Outcome o;
  o.pass = non_unique == 0 && lossy == 0;
  o.detail = std::to_string(kMolecules) + " molecules x "
             + std::to_string(kPermutations) + " permutations: "
             + std::to_string(non_unique) + " with several outputs, "
             + std::to_string(lossy) + " lossy round trips";
  return o;
}

// ---------------------------------------------------------------------------
// 4. Tanimoto and diversity against double loops.

Outcome diversity_oracle() {
  constexpr int kSets = 200;
  constexpr double kThreshold = 0.8;
  mc::Rng rng(44);
  double worst = 0;
  int disagreements = 0, kept = 0;
  for (int s = 0; s < kSets; ++s) {
    const int n = 2 + static_cast<int>(rng.below(19));
    std::vector<std::string> smiles;
    std::vector<mc::Fingerprint> fps;
    // Mix distinct and repeated molecules so decisions land on both sides.
    for (int i = 0; i < n; ++i) {
      std::string smi = (i > 0 && rng.uniform() < 0.3)
                            ? smiles[rng.below(smiles.size())]
                            : mc::random_short_smiles(rng, 10);
      fps.push_back(mc::morgan_fingerprint(mc::parse_smiles(smi)));
      smiles.push_back(std::move(smi));
    }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        worst = std::max(worst,
                         std::abs(mc::tanimoto(fps[i], fps[j])
                                  - mc::oracle::tanimoto_bits(fps[i], fps[j])));
    const double want = mc::oracle::diversity_double_loop(fps);
    worst = std::max(worst, std::abs(mc::diversity(fps) - want));
    const auto d = mc::diversity_filter(smiles, kThreshold);
    worst = std::max(worst, std::abs(d.diversity - want));
    disagreements += d.keep != (want > kThreshold);
    kept += d.keep;
  }
  Outcome o;
  o.pass = worst <= kDiversityTol && disagreements == 0;
  o.detail = "max |module - oracle| " + fmt(worst) + " (tol "
             + fmt(kDiversityTol) + "); filter decisions disagree on "
             + std::to_string(disagreements) + "/" + std::to_string(kSets)
             + " sets (" + std::to_string(kept) + " kept)";
  return o;
}

// ---------------------------------------------------------------------------
// 5. Gradient checks.

// Central differences at a stratified sample of coordinates: the same
// number from every parameter block, restricted to `mask` when given.
double max_rel_error(const mc::LossThunk &loss, const mc::ModelParams &p,
                     std::uint64_t seed, const std::vector<char> &mask = {}) {
  constexpr double kStep = 1e-5;
  constexpr int kPerBlock = 12;
  auto grad = p.zeros_like();
  loss(p, &grad);
  mc::Rng rng(seed);
  double worst = 0;
  auto q = p;
  for (int b = 0; b < mc::kNumParamBlocks; ++b) {
    const auto block = static_cast<mc::ParamBlock>(b);
    const std::size_t off = p.offset(block);
    const std::size_t len = p.block(block).size();
    std::vector<std::size_t> idx;
    for (std::size_t i = off; i < off + len; ++i)
      if (mask.empty() || mask[i])
        idx.push_back(i);
    for (int k = 0; k < kPerBlock && !idx.empty(); ++k) {
      const std::size_t i = idx[rng.below(idx.size())];
      const double x = q.values()[i];
      q.values()[i] = x + kStep;
      const double up = loss(q, nullptr);
      q.values()[i] = x - kStep;
      const double down = loss(q, nullptr);
      q.values()[i] = x;
      const double numeric = (up - down) / (2 * kStep);
      const double a = grad.values()[i];
      worst = std::max(worst, std::abs(a - numeric)
                                  / std::max({ 1.0, std::abs(a),
                                               std::abs(numeric) }));
    }
  }
  return worst;
}

// KL of N(mu, exp(lv)) against N(0, 1) by Simpson quadrature of
// p log(p / q), one dimension at a time.
double kl_quadrature(const std::vector<double> &mu,
                     const std::vector<double> &lv) {
  constexpr int kIntervals = 20000;
  double total = 0;
  for (std::size_t d = 0; d < mu.size(); ++d) {
    const double s = std::exp(0.5 * lv[d]);
    const double lo = mu[d] - 14 * s, hi = mu[d] + 14 * s;
    const double h = (hi - lo) / kIntervals;
    auto f = [&](double x) {
      const double lp = -0.5 * std::pow((x - mu[d]) / s, 2) - std::log(s)
                        - 0.5 * std::log(2 * M_PI);
      const double lq = -0.5 * x * x - 0.5 * std::log(2 * M_PI);
      return std::exp(lp) * (lp - lq);
    };
    double acc = f(lo) + f(hi);
    for (int i = 1; i < kIntervals; ++i)
      acc += f(lo + i * h) * (i % 2 ? 4 : 2);
    total += acc * h / 3;
  }
  return total;
}

Outcome gradient_checks() {
  constexpr int kPoints = 20;
  constexpr int kD = 16;
  const auto &vocab = mc::Vocabulary::standard();
  mc::Rng data(5);

  std::vector<mc::SftExample> batch;
  std::vector<mc::InterleavedSequence> seqs;
  for (int i = 0; i < 3; ++i) {
    auto f = mc::test::toy_pocket("g" + std::to_string(i), kD, 5, 4 + i);
    const auto smi = mc::random_short_smiles(data, 5);
    batch.push_back(mc::make_sft_example(f, smi, "sbdd/0"));
    seqs.push_back(
        mc::build_interleaved("sbdd/0", f, vocab.encode_smiles(smi)));
  }
  std::vector<std::vector<double>> z;
  for (int i = 0; i < 3; ++i)
    z.push_back(mc::test::normal_vector(data, kD));

  mc::DpoExample pair;
  pair.features = mc::test::toy_pocket("gd", kD, 6, 5);
  pair.template_id = "sbdd/0";
  pair.chosen = vocab.encode_smiles("CCO");
  pair.rejected = vocab.encode_smiles("C1CC1N");
  pair.complex = mc::complex_features(
      *pair.features, mc::ligand_features(mc::parse_smiles("CCN"), kD));
  pair.z = mc::test::normal_vector(data, kD);

  double worst_align = 0, worst_sft = 0, worst_dpo = 0, worst_kl = 0;
  for (int point = 0; point < kPoints; ++point) {
    const auto ref = mc::test::small_params(100 + point, kD);
    const auto p = mc::test::jitter(ref, 200 + point, 0.05);

    worst_align = std::max(
        worst_align,
        max_rel_error(
            [&](const mc::ModelParams &q, mc::ModelParams *g) {
              return mc::alignment_loss(q, seqs, g);
            },
            p, 300 + point, p.mask({ mc::ParamGroup::kAdapter })));
    worst_sft = std::max(
        worst_sft, max_rel_error(
                       [&](const mc::ModelParams &q, mc::ModelParams *g) {
                         return mc::sft_loss(q, batch, z, 0.1, g);
                       },
                       p, 400 + point));
    const auto cached = mc::reference_logprobs(ref, pair);
    worst_dpo = std::max(
        worst_dpo, max_rel_error(
                       [&](const mc::ModelParams &q, mc::ModelParams *g) {
                         return mc::dpo_loss(q, cached, pair, 0.1, 0.1, g).loss;
                       },
                       p, 500 + point));

    // KL closed form: value against quadrature, gradient against central
    // differences of the value.
    mc::Rng kr(600 + point);
    std::vector<double> mu(4), lv(4);
    for (int i = 0; i < 4; ++i) {
      mu[i] = 0.8 * kr.normal();
      lv[i] = 0.6 * kr.normal();
    }
    worst_kl = std::max(worst_kl,
                        std::abs(mc::kl_gaussian(mu, lv) - kl_quadrature(mu, lv)));
    std::vector<double> dmu(4), dlv(4);
    mc::kl_gaussian_grad(mu, lv, dmu, dlv);
    for (int i = 0; i < 4; ++i) {
      for (auto *vec: { &mu, &lv }) {
        const double h = 1e-5, x = (*vec)[i];
        (*vec)[i] = x + h;
        const double up = mc::kl_gaussian(mu, lv);
        (*vec)[i] = x - h;
        const double down = mc::kl_gaussian(mu, lv);
        (*vec)[i] = x;
        const double a = vec == &mu ? dmu[i] : dlv[i];
        worst_kl = std::max(worst_kl, std::abs(a - (up - down) / (2 * h)));
      }
    }
  }
  Outcome o;
  o.pass = worst_align < kGradRelTol && worst_sft < kGradRelTol
           && worst_dpo < kGradRelTol && worst_kl < kKlTol;
  o.detail = std::to_string(kPoints) + " points, d=16: max rel error alignment "
             + fmt(worst_align) + ", sft " + fmt(worst_sft) + ", dpo "
             + fmt(worst_dpo) + " (tol " + fmt(kGradRelTol)
             + "); kl max abs error " + fmt(worst_kl) + " (tol " + fmt(kKlTol)
             + ")";
  return o;
}

// ---------------------------------------------------------------------------
// 6. DPO desk experiment.

double toy_reward(const std::string &smiles) {
  const auto mol = mc::parse_smiles(smiles);
  return mc::reward(mc::surrogate_vina(mol), mc::count_fused_rings(mol), 0.5);
}

mc::ModelConfig desk_config() {
  mc::ModelConfig c;
  c.d = 32;
  c.d_feat = 32;
  c.adapter_hidden = 32;
  c.hidden = 64;
  c.window = 8;
  return c;
}

// Mean reward over the first `n` valid draws. Draw i of a pocket uses the
// same seed for every model, so models are compared on common noise.
std::optional<double> mean_reward(const mc::ModelParams &params,
                                  std::shared_ptr<const mc::PocketFeatures> f,
                                  const mc::SampleOptions &so, int n,
                                  std::uint64_t seed) {
  constexpr int kMaxDraws = 4000;
  double total = 0;
  int valid = 0;
  for (int i = 0; i < kMaxDraws && valid < n; ++i) {
    mc::Rng rng(mc::stream_seed(seed, f->pocket_id, i));
    const auto r = mc::sample(params, f, so, rng);
    if (!r.terminated)
      continue;
    try {
      total += toy_reward(mc::canonicalize(r.smiles));
      ++valid;
    } catch (const mc::Error &) {
    }
  }
  if (valid < n)
    return std::nullopt;
  return total / n;
}

Outcome dpo_experiment() {
  constexpr int kPockets = 200;
  constexpr int kHeldOut = 50;
  constexpr int kSftPerPocket = 50;  // 10k SMILES
  constexpr int kCandidates = 20;
  constexpr int kEvalSamples = 100;
  constexpr double kBetaDpo = 0.1;
  constexpr int kBatch = 8;
  constexpr std::uint64_t kSeed = 6;
  const auto config = desk_config();

  mc::FixtureOptions fo;
  fo.pockets = kPockets + kHeldOut;
  fo.eval_pockets = 0;
  fo.seed = kSeed;
  const auto fixture = mc::make_fixture(fo);
  std::vector<std::shared_ptr<const mc::PocketFeatures>> features;
  for (const auto &r: fixture.complexes)
    features.push_back(std::make_shared<const mc::PocketFeatures>(
        mc::featurize_pocket(r, config.d_feat, kSeed)));

  mc::Rng smiles_rng(kSeed);
  std::vector<mc::SftExample> sft_data;
  for (int p = 0; p < kPockets; ++p)
    for (int i = 0; i < kSftPerPocket; ++i)
      sft_data.push_back(mc::make_sft_example(
          features[p], mc::random_short_smiles(smiles_rng, 10), "sbdd/0"));

  mc::ModelParams init(config);
  mc::init_params(init, kSeed);
  mc::TrainConfig sft_cfg;
  sft_cfg.learning_rate = mc::kDefaultSftLearningRate;
  sft_cfg.batch_size = 8;
  sft_cfg.epochs = 1;
  sft_cfg.eval_every = 250;
  sft_cfg.seed = kSeed;
  const auto sft = mc::train_sft(sft_data, init, sft_cfg).checkpoint.params;

  mc::SampleOptions so;
  so.temperature = 1.0;
  so.top_p = 1.0;

  // One pair per pocket from scored SFT candidates.
  auto pair_for = [&](int p) -> std::optional<mc::DpoExample> {
    std::vector<mc::ScoredCandidate> scored;
    for (int i = 0; i < kCandidates; ++i) {
      mc::Rng rng(mc::stream_seed(kSeed, "candidates:" + features[p]->pocket_id, i));
      const auto r = mc::sample(sft, features[p], so, rng);
      if (!r.terminated)
        continue;
      try {
        const auto canon = mc::canonicalize(r.smiles);
        const auto mol = mc::parse_smiles(canon);
        scored.push_back({ canon, mc::surrogate_vina(mol),
                           mc::count_fused_rings(mol) });
      } catch (const mc::Error &) {
      }
    }
    mc::PreferencePair pp;
    try {
      pp = mc::build_preference_pairs(features[p]->pocket_id, scored, 0.5);
    } catch (const mc::Error &) {
      return std::nullopt;
    }
    const auto &vocab = mc::Vocabulary::standard();
    mc::DpoExample ex;
    ex.features = features[p];
    ex.template_id = "sbdd/0";
    ex.chosen = vocab.encode_smiles(pp.chosen);
    ex.rejected = vocab.encode_smiles(pp.rejected);
    ex.complex = mc::complex_features(
        *features[p],
        mc::ligand_features(
            mc::parse_smiles(fixture.complexes[p].ligand_smiles.front()),
            config.d_feat));
    mc::Rng zr(mc::stream_seed(kSeed, "z:" + features[p]->pocket_id, 0));
    ex.z = mc::test::normal_vector(zr, config.d_feat);
    return ex;
  };
  std::vector<mc::DpoExample> train_pairs, held_out;
  for (int p = 0; p < kPockets + kHeldOut; ++p)
    if (auto ex = pair_for(p))
      (p < kPockets ? train_pairs : held_out).push_back(std::move(*ex));

  mc::TrainConfig dpo_cfg;
  dpo_cfg.learning_rate = mc::kDefaultDpoLearningRate;
  dpo_cfg.batch_size = kBatch;
  dpo_cfg.epochs = 1;
  dpo_cfg.beta_dpo = kBetaDpo;
  dpo_cfg.beta_vae = mc::kDefaultBetaVae;
  dpo_cfg.seed = kSeed;
  const auto dpo = mc::train_dpo(train_pairs, sft, dpo_cfg).checkpoint.params;

  double margin = 0;
  for (const auto &ex: held_out)
    margin += mc::implied_margin(dpo, sft, ex, kBetaDpo);
  margin /= std::max<std::size_t>(1, held_out.size());

  int improved = 0, compared = 0;
  double sft_total = 0, dpo_total = 0;
  for (int p = 0; p < kPockets; ++p) {
    const auto before = mean_reward(sft, features[p], so, kEvalSamples, kSeed);
    const auto after = mean_reward(dpo, features[p], so, kEvalSamples, kSeed);
    ++compared;
    if (before && after) {
      improved += *after > *before;
      sft_total += *before;
      dpo_total += *after;
    }
  }
  const double fraction = static_cast<double>(improved) / compared;
  Outcome o;
  o.pass = fraction >= kDpoPocketFraction && margin > 0
           && held_out.size() >= kHeldOut;
  o.detail = "reward improved on " + std::to_string(improved) + "/"
             + std::to_string(compared) + " pockets (need >= "
             + fmt(kDpoPocketFraction) + "), mean reward sft "
             + mc::format_fixed(sft_total / compared, 4) + " -> dpo "
             + mc::format_fixed(dpo_total / compared, 4)
             + "; held-out margin " + fmt(margin) + " over "
             + std::to_string(held_out.size()) + " pairs; "
             + std::to_string(train_pairs.size()) + " training pairs";
  return o;
}

// ---------------------------------------------------------------------------
// 7. Sampling contract.

// Logits for the first target token, from lm_logits with the window built
// here from the template layout.
std::vector<double> first_token_probs(const mc::ModelParams &params,
                                      std::shared_ptr<const mc::PocketFeatures> f,
                                      const std::vector<double> &eps) {
  const auto &cfg = params.config();
  const auto seq = mc::build_interleaved("sbdd/0", f, {});
  const auto emb = params.block(mc::ParamBlock::kTokenEmbedding);
  auto row = [&](int id) {
    return std::vector<double>(emb.begin() + id * cfg.d,
                               emb.begin() + (id + 1) * cfg.d);
  };
  std::vector<std::vector<double>> elems;
  for (int t: seq.prefix)
    elems.push_back(row(t));
  for (const auto &x: f->vectors)
    elems.push_back(mc::adapter_apply(params, x));
  // Everything up to and including BOS; the EOS target is dropped.
  for (std::size_t i = 0; i + 1 < seq.suffix.size(); ++i)
    elems.push_back(row(seq.suffix[i]));
  auto pooled = f->pooled;
  for (std::size_t i = 0; i < pooled.size(); ++i)
    pooled[i] += eps[i];
  const auto u = mc::adapter_apply(params, pooled);
  const int p = static_cast<int>(elems.size());
  std::vector<double> window;
  for (int q = p - cfg.window; q < p; ++q) {
    const auto e = q < 0 ? row(mc::Vocabulary::kPad) : elems[q];
    window.insert(window.end(), e.begin(), e.end());
  }
  return mc::softmax(mc::lm_logits(params, window, u, eps));
}

Outcome sampling_contract() {
  constexpr int kDraws = 100000;
  constexpr int kMaxLen = mc::kDefaultMaxLen;
  Checks c;
  auto params = mc::test::small_params(70);
  const auto f = mc::test::toy_pocket("s7", 16, 70, 6);
  const auto &cfg = params.config();

  // Remove the pooled and noise inputs of the first dense layer so the
  // next-token distribution does not depend on the per-draw epsilon, then
  // concentrate mass on a dozen tokens with a spread of weights.
  auto w1 = params.block(mc::ParamBlock::kW1);
  const int cols = cfg.lm_input();
  for (int r = 0; r < cfg.hidden; ++r)
    for (int k = cfg.window * cfg.d; k < cols; ++k)
      w1[r * cols + k] = 0.0;
  auto bo = params.block(mc::ParamBlock::kBo);
  const int vocab = cfg.vocab_size;
  for (int t = 0; t < vocab; ++t)
    bo[t] = (t % 12 == 5) ? 20.0 + 0.15 * (t % 7) : 0.0;

  const auto probs =
      first_token_probs(params, f, std::vector<double>(cfg.d_feat, 0.0));
  mc::SampleOptions one;
  one.temperature = 1.0;
  one.top_p = 1.0;
  one.max_len = 1;
  std::vector<int> counts(vocab, 0);
  mc::Rng rng(7);
  for (int i = 0; i < kDraws; ++i) {
    const auto r = mc::sample(params, f, one, rng);
    ++counts[r.tokens.empty() ? mc::Vocabulary::kEos : r.tokens.front()];
  }
  double worst_z = 0;
  int outside = 0;
  for (int t = 0; t < vocab; ++t) {
    const double mean = kDraws * probs[t];
    const double sd = std::sqrt(kDraws * probs[t] * (1 - probs[t]));
    const double dev = std::abs(counts[t] - mean);
    if (dev > kSigmaBound * sd)
      ++outside;
    if (sd > 0)
      worst_z = std::max(worst_z, dev / sd);
  }
  c.expect(outside == 0, std::to_string(outside) + " tokens outside 3 sigma");
  c.note("max |z| " + mc::format_fixed(worst_z, 3) + " over "
         + std::to_string(vocab) + " tokens");

  // Seeded runs are byte-identical.
  const auto base = mc::test::small_params(71);
  auto transcript = [&](std::uint64_t seed) {
    mc::SampleOptions so;
    mc::Rng r(seed);
    std::string out;
    for (int i = 0; i < 200; ++i) {
      const auto s = mc::sample(base, f, so, r);
      out += s.smiles + " " + mc::format_double(s.logprob) + "\n";
    }
    return out;
  };
  c.expect(transcript(9) == transcript(9), "seeded transcripts differ");

  // No output exceeds max_len, including from a model that never stops.
  auto endless = base;
  endless.block(mc::ParamBlock::kBo)[mc::Vocabulary::kEos] = -60.0;
  mc::SampleOptions capped;
  capped.max_len = kMaxLen;
  std::size_t longest = 0;
  int hit_cap = 0;
  mc::Rng lr(11);
  for (int i = 0; i < 300; ++i) {
    const auto &model = i % 3 == 0 ? endless : base;
    const auto s = mc::sample(model, f, capped, lr);
    longest = std::max(longest, s.tokens.size());
    hit_cap += !s.terminated;
    c.expect(s.tokens.size() <= static_cast<std::size_t>(kMaxLen),
             "sample longer than max_len");
    c.expect(s.terminated || s.tokens.size() == kMaxLen,
             "unterminated sample shorter than max_len");
  }
  c.note("longest " + std::to_string(longest) + " tokens, "
         + std::to_string(hit_cap) + " draws stopped at max_len "
         + std::to_string(kMaxLen));
  return c.outcome();
}

// ---------------------------------------------------------------------------
// 8. Partition rule and pipeline determinism.

std::pair<long, long> python_partition_counts(const fs::path &file) {
  const fs::path script = file.parent_path() / "count.py";
  mc::write_text_file(
      script,
      "import json, sys\n"
      "rows = [json.loads(l) for l in open(sys.argv[1]) if l.strip()]\n"
      "sft = sum(len(set(r['ligand_smiles'])) > 2 for r in rows)\n"
      "print(sft, len(rows) - sft)\n");
  const std::string cmd =
      "python3 '" + script.string() + "' '" + file.string() + "'";
  FILE *pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr)
    return { -1, -1 };
  long sft = -1, dpo = -1;
  if (std::fscanf(pipe, "%ld %ld", &sft, &dpo) != 2)
    sft = dpo = -1;
  pclose(pipe);
  return { sft, dpo };
}

std::map<std::string, std::string> artifact_digests(const fs::path &out) {
  std::map<std::string, std::string> files;
  for (const auto &e: fs::recursive_directory_iterator(out)) {
    if (!e.is_regular_file())
      continue;
    const auto rel = fs::relative(e.path(), out).string();
    if (rel.starts_with("cache/") || rel.ends_with(".timings.json"))
      continue;
    files[rel] = mc::read_text_file(e.path());
  }
  return files;
}

Outcome pipeline() {
  Checks c;
  const fs::path root = fs::temp_directory_path() / "molchord-acceptance-8";
  fs::remove_all(root);
  fs::create_directories(root);

  // Partition rule on 10k records, with exact repeats mixed into the ligand
  // lists so distinct counting matters.
  mc::FixtureOptions big;
  big.pockets = 10000;
  big.eval_pockets = 0;
  big.max_ligands = 5;
  big.seed = 8;
  auto records = mc::make_fixture(big).complexes;
  mc::Rng dup(8);
  for (auto &r: records)
    if (dup.uniform() < 0.4)
      r.ligand_smiles.push_back(r.ligand_smiles[dup.below(r.ligand_smiles.size())]);
  const fs::path complexes = root / "big" / "complexes.jsonl";
  mc::write_text_file(complexes, mc::serialize_complexes(records));
  mc::RunConfig pc;
  pc.paths.complexes = complexes;
  pc.paths.out = root / "big" / "run";
  mc::cmd_partition(pc);
  const auto part = nlohmann::json::parse(
      mc::read_text_file(pc.paths.out / mc::artifact::kPartition));
  const long sft = part["counts"]["sft"], dpo = part["counts"]["dpo"];
  const auto [want_sft, want_dpo] = python_partition_counts(complexes);
  c.expect(sft == want_sft && dpo == want_dpo, "partition counts");
  c.note("partition sft/dpo " + std::to_string(sft) + "/" + std::to_string(dpo)
         + ", script " + std::to_string(want_sft) + "/"
         + std::to_string(want_dpo));

  // Full fixture pipeline twice, the second time with two workers.
  mc::FixtureOptions small;
  small.seed = 88;
  mc::cmd_make_fixture(root / "fx", small);
  mc::CommandOptions opts;
  opts.self_exe = MOLCHORD_BINARY;
  std::vector<std::map<std::string, std::string>> runs;
  for (int jobs: { 1, 2 }) {
    auto cfg = mc::load_run_config(root / "fx" / "config.ini");
    cfg.paths.out = root / "fx" / ("run-" + std::to_string(jobs));
    cfg.jobs = jobs;
    int rc = 0;
    rc |= mc::cmd_partition(cfg);
    rc |= mc::cmd_train_sft(cfg);
    rc |= mc::cmd_curate(cfg, opts);
    rc |= mc::cmd_train_dpo(cfg);
    rc |= mc::cmd_sample(cfg, opts);
    rc |= mc::cmd_dock(cfg, opts);
    rc |= mc::cmd_evaluate(cfg, opts);
    rc |= mc::cmd_report(cfg, opts);
    c.expect(rc == 0, "pipeline exit codes with jobs=" + std::to_string(jobs));
    c.expect(mc::cmd_verify(cfg.paths.out) == 0, "verify");
    runs.push_back(artifact_digests(cfg.paths.out));
  }
  c.expect(runs[0].size() >= 20, "artifact count");
  c.expect(runs[0] == runs[1], "artifacts differ between runs");
  int differing = 0;
  for (const auto &[name, bytes]: runs[0])
    differing += !runs[1].count(name) || runs[1].at(name) != bytes;
  c.note(std::to_string(runs[0].size()) + " artifacts compared, "
         + std::to_string(differing) + " differ");
  fs::remove_all(root);
  return c.outcome();
}

struct Criterion {
  int id;
  const char *name;
  double budget;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char **argv) {
  const std::vector<Criterion> all = {
    { 1, "constant suite", kBudget1, constants },
    { 2, "fused-ring oracle equivalence", kBudget2, ring_oracle },
    { 3, "canonicalization", kBudget3, canonicalization },
    { 4, "diversity and tanimoto oracle", kBudget4, diversity_oracle },
    { 5, "gradient checks", kBudget5, gradient_checks },
    { 6, "dpo desk experiment", kBudget6, dpo_experiment },
    { 7, "sampling contract", kBudget7, sampling_contract },
    { 8, "partition rule and pipeline determinism", kBudget8, pipeline },
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i)
    wanted.insert(std::stoi(argv[i]));

  int failures = 0;
  for (const auto &crit: all) {
    if (!wanted.empty() && !wanted.count(crit.id))
      continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = crit.run();
    } catch (const std::exception &e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - start)
                            .count();
    const bool in_time = secs < crit.budget;
    const bool pass = o.pass && in_time;
    failures += !pass;
    std::cout << (pass ? "PASS" : "FAIL") << " criterion " << crit.id << " ("
              << crit.name << "): " << o.detail << " ["
              << mc::format_fixed(secs, 2) << " s, budget "
              << mc::format_fixed(crit.budget, 0) << " s"
              << (in_time ? "" : ", over budget") << "]" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
