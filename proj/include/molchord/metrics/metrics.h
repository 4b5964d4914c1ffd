//
// MolChord desk pipeline - Copyright 2026 The MolChord Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLCHORD_METRICS_METRICS_H_
#define MOLCHORD_METRICS_METRICS_H_

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "molchord/molgraph/fingerprint.h"

namespace molchord {

// Thresholds of the success gate. All comparisons are strict.
inline constexpr double kSuccessQedMin = 0.25;
inline constexpr double kSuccessSaMin = 0.59;
inline constexpr double kSuccessVinaMax = -8.18;

enum class Homology {
  kUnknown,
  kHomologous,
  kNonHomologous,
};

std::string_view homology_name(Homology h) noexcept;
// Accepts "homologous", "non_homologous" and "unknown".
std::optional<Homology> parse_homology(std::string_view text) noexcept;

struct Generation {
  std::string smiles;          // canonical
  std::optional<double> vina;  // kcal/mol, lower is better
  std::optional<double> qed;   // [0, 1]
  std::optional<double> sa_origin;  // [1, 10]
};

struct PocketEval {
  std::string pocket_id;
  std::vector<Generation> generations;
  std::optional<double> reference_vina;
  Homology homology = Homology::kUnknown;
};

struct PocketRow {
  std::string pocket_id;
  int num_generations = 0;
  double mean_vina = 0;
  std::optional<double> high_affinity;
  std::optional<double> mean_qed;
  std::optional<double> mean_sa;
  // Absent for pockets with a single generation.
  std::optional<double> diversity;
  std::optional<double> success_rate;
  double fused_ring_mean = 0;
};

struct OodReport {
  double homologous_mean = 0;
  double non_homologous_mean = 0;
  double delta = 0;
  int homologous_pockets = 0;
  int non_homologous_pockets = 0;
};

// Aggregates are unweighted means of the per-pocket rows. An optional
// aggregate is absent when no pocket reports that column.
struct MetricReport {
  double mean_vina = 0;
  std::optional<double> high_affinity;
  std::optional<double> mean_qed;
  std::optional<double> mean_sa;
  std::optional<double> diversity;
  std::optional<double> success_rate;
  double fused_ring_mean = 0;
  std::vector<PocketRow> per_pocket;
  std::optional<OodReport> ood;
};

struct FusedRingReport {
  double mean = 0;
  int num_compounds = 0;
  std::map<int, int> histogram;  // fused-ring count -> compounds
};

// 1 - mean pairwise Tanimoto similarity over all unordered pairs.
double diversity(const std::vector<Fingerprint> &fps);

// Parses every SMILES and computes diversity over default fingerprints.
double diversity_of_smiles(const std::vector<std::string> &smiles);

// (10 - sa_origin) / 9, so higher is easier to synthesize.
double sa_normalize(double sa_origin);

bool success_gate(double qed, double sa, double vina);

// Fraction of generations with vina <= ref_vina.
double high_affinity_fraction(const std::vector<double> &gen_vina,
                              std::optional<double> ref_vina);

PocketRow evaluate_pocket(const PocketEval &pocket);

// Pockets are evaluated independently on up to `jobs` threads and merged
// in input order. The OOD sub-report is attached when every pocket carries
// a homology label.
MetricReport evaluate(const std::vector<PocketEval> &pockets, int jobs = 1);

FusedRingReport fused_ring_report(const std::vector<PocketEval> &pockets,
                                  int top_k);

OodReport ood_report(const std::vector<PocketEval> &pockets);

}  // namespace molchord

#endif  // MOLCHORD_METRICS_METRICS_H_
