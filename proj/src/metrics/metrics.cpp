//
// MolChord desk pipeline - Copyright 2026 The MolChord Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molchord/metrics/metrics.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "molchord/error.h"
#include "molchord/molgraph/molecule.h"
#include "molchord/util/numfmt.h"
#include "molchord/util/parallel.h"

namespace molchord {
namespace {
  double mean_of(const std::vector<double> &xs) {
    double sum = 0;
    for (double x: xs)
      sum += x;
    return sum / static_cast<double>(xs.size());
  }

  // Mean of the present values; absent if there are none.
  std::optional<double>
  mean_present(const std::vector<std::optional<double>> &xs) {
    std::vector<double> present;
    for (const auto &x: xs)
      if (x)
        present.push_back(*x);
    if (present.empty())
      return std::nullopt;
    return mean_of(present);
  }

  void check_coverage(const PocketEval &pocket) {
    if (pocket.generations.empty())
      throw Error(Errc::kEmptyInput,
                  "pocket " + pocket.pocket_id + " has no generations");
    for (const auto &g: pocket.generations) {
      if (!g.vina || !std::isfinite(*g.vina))
        throw Error(Errc::kScoreCoverageGap,
                    "pocket " + pocket.pocket_id + " generation " + g.smiles
                        + " has no vina score");
      if (g.qed && (*g.qed < 0 || *g.qed > 1))
        throw Error(Errc::kOutOfRange, "qed " + format_double(*g.qed)
                                           + " outside [0, 1] for "
                                           + g.smiles);
    }
  }
}  // namespace

std::string_view homology_name(Homology h) noexcept {
  switch (h) {
  case Homology::kHomologous:
    return "homologous";
  case Homology::kNonHomologous:
    return "non_homologous";
  case Homology::kUnknown:
    break;
  }
  return "unknown";
}

std::optional<Homology> parse_homology(std::string_view text) noexcept {
  if (text == "homologous")
    return Homology::kHomologous;
  if (text == "non_homologous")
    return Homology::kNonHomologous;
  if (text == "unknown")
    return Homology::kUnknown;
  return std::nullopt;
}

double diversity(const std::vector<Fingerprint> &fps) {
  const std::size_t n = fps.size();
  if (n < 2)
    throw Error(Errc::kTooFewItems,
                "diversity needs at least 2 fingerprints, got "
                    + std::to_string(n));
  double sum = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      sum += tanimoto(fps[i], fps[j]);
  const double z = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  return 1.0 - sum / z;
}

double diversity_of_smiles(const std::vector<std::string> &smiles) {
  std::vector<Fingerprint> fps;
  fps.reserve(smiles.size());
  for (const auto &s: smiles)
    fps.push_back(morgan_fingerprint(parse_smiles(s)));
  return diversity(fps);
}

double sa_normalize(double sa_origin) {
  if (!(sa_origin >= 1.0 && sa_origin <= 10.0))
    throw Error(Errc::kOutOfRange,
                "SA score " + format_double(sa_origin) + " outside [1, 10]");
  return (10.0 - sa_origin) / 9.0;
}

bool success_gate(double qed, double sa, double vina) {
  return qed > kSuccessQedMin && sa > kSuccessSaMin && vina < kSuccessVinaMax;
}

double high_affinity_fraction(const std::vector<double> &gen_vina,
                              std::optional<double> ref_vina) {
  if (!ref_vina)
    throw Error(Errc::kMissingReference, "no reference vina score");
  if (gen_vina.empty())
    throw Error(Errc::kEmptyInput, "no generated vina scores");
  const auto hits = std::count_if(gen_vina.begin(), gen_vina.end(),
                                  [&](double v) { return v <= *ref_vina; });
  return static_cast<double>(hits) / static_cast<double>(gen_vina.size());
}

PocketRow evaluate_pocket(const PocketEval &pocket) {
  check_coverage(pocket);

  PocketRow row;
  row.pocket_id = pocket.pocket_id;
  row.num_generations = static_cast<int>(pocket.generations.size());

  std::vector<double> vinas;
  std::vector<std::optional<double>> qeds, sas;
  std::vector<Fingerprint> fps;
  std::vector<double> fused;
  int successes = 0;
  bool success_defined = true;

  for (const auto &g: pocket.generations) {
    vinas.push_back(*g.vina);
    qeds.push_back(g.qed);
    std::optional<double> sa;
    if (g.sa_origin)
      sa = sa_normalize(*g.sa_origin);
    sas.push_back(sa);

    if (g.qed && sa)
      successes += success_gate(*g.qed, *sa, *g.vina) ? 1 : 0;
    else
      success_defined = false;

    const Molecule mol = parse_smiles(g.smiles);
    fps.push_back(morgan_fingerprint(mol));
    fused.push_back(count_fused_rings(mol));
  }

  row.mean_vina = mean_of(vinas);
  if (pocket.reference_vina)
    row.high_affinity = high_affinity_fraction(vinas, pocket.reference_vina);
  row.mean_qed = mean_present(qeds);
  row.mean_sa = mean_present(sas);
  if (fps.size() >= 2)
    row.diversity = diversity(fps);
  if (success_defined)
    row.success_rate = static_cast<double>(successes)
                       / static_cast<double>(row.num_generations);
  row.fused_ring_mean = mean_of(fused);
  return row;
}

MetricReport evaluate(const std::vector<PocketEval> &pockets, int jobs) {
  if (pockets.empty())
    throw Error(Errc::kEmptyInput, "no pockets to evaluate");

  MetricReport report;
  report.per_pocket.resize(pockets.size());
  parallel_for(pockets.size(), jobs, [&](std::size_t i) {
    report.per_pocket[i] = evaluate_pocket(pockets[i]);
  });

  std::vector<double> vina, fused;
  std::vector<std::optional<double>> ha, qed, sa, div, success;
  for (const auto &row: report.per_pocket) {
    vina.push_back(row.mean_vina);
    fused.push_back(row.fused_ring_mean);
    ha.push_back(row.high_affinity);
    qed.push_back(row.mean_qed);
    sa.push_back(row.mean_sa);
    div.push_back(row.diversity);
    success.push_back(row.success_rate);
  }
  report.mean_vina = mean_of(vina);
  report.fused_ring_mean = mean_of(fused);
  report.high_affinity = mean_present(ha);
  report.mean_qed = mean_present(qed);
  report.mean_sa = mean_present(sa);
  report.diversity = mean_present(div);
  report.success_rate = mean_present(success);

  const bool labeled = std::all_of(
      pockets.begin(), pockets.end(),
      [](const PocketEval &p) { return p.homology != Homology::kUnknown; });
  if (labeled) {
    try {
      report.ood = ood_report(pockets);
    } catch (const Error &e) {
      if (e.code() != Errc::kEmptyGroup)
        throw;
    }
  }
  return report;
}

FusedRingReport fused_ring_report(const std::vector<PocketEval> &pockets,
                                  int top_k) {
  if (pockets.empty())
    throw Error(Errc::kEmptyInput, "no pockets for fused-ring report");
  if (top_k < 1)
    throw Error(Errc::kOutOfRange, "top_k must be >= 1");

  FusedRingReport report;
  long total = 0;
  for (const auto &pocket: pockets) {
    check_coverage(pocket);
    if (static_cast<int>(pocket.generations.size()) < top_k)
      throw Error(Errc::kTooFewGenerations,
                  "pocket " + pocket.pocket_id + " has "
                      + std::to_string(pocket.generations.size())
                      + " generations, top_k is " + std::to_string(top_k));

    // Lowest vina first; equal scores fall back to SMILES order so the
    // selection does not depend on input order.
    std::vector<const Generation *> order;
    for (const auto &g: pocket.generations)
      order.push_back(&g);
    std::sort(order.begin(), order.end(),
              [](const Generation *a, const Generation *b) {
                if (*a->vina != *b->vina)
                  return *a->vina < *b->vina;
                return a->smiles < b->smiles;
              });

    for (int i = 0; i < top_k; ++i) {
      const int fused = count_fused_rings(parse_smiles(order[i]->smiles));
      ++report.histogram[fused];
      total += fused;
      ++report.num_compounds;
    }
  }
  report.mean = static_cast<double>(total)
                / static_cast<double>(report.num_compounds);
  return report;
}

OodReport ood_report(const std::vector<PocketEval> &pockets) {
  std::vector<double> homo, non_homo;
  for (const auto &pocket: pockets) {
    if (pocket.homology == Homology::kUnknown)
      throw Error(Errc::kUnlabeledPocket,
                  "pocket " + pocket.pocket_id + " has no homology label");
    check_coverage(pocket);
    std::vector<double> vinas;
    for (const auto &g: pocket.generations)
      vinas.push_back(*g.vina);
    (pocket.homology == Homology::kHomologous ? homo : non_homo)
        .push_back(mean_of(vinas));
  }
  if (homo.empty() || non_homo.empty())
    throw Error(Errc::kEmptyGroup,
                homo.empty() ? "no homologous pockets"
                             : "no non-homologous pockets");

  OodReport report;
  report.homologous_mean = mean_of(homo);
  report.non_homologous_mean = mean_of(non_homo);
  report.delta = report.homologous_mean - report.non_homologous_mean;
  report.homologous_pockets = static_cast<int>(homo.size());
  report.non_homologous_pockets = static_cast<int>(non_homo.size());
  return report;
}

}  // namespace molchord
