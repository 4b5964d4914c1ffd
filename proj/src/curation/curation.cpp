//
// MolChord desk pipeline - Copyright 2026 The MolChord Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molchord/curation/curation.h"

#include <algorithm>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "molchord/error.h"
#include "molchord/molgraph/molecule.h"
#include "molchord/util/parallel.h"

namespace molchord {

int distinct_ligand_count(const ComplexRecord &record) {
  std::set<std::string> distinct;
  for (const auto &s: record.ligand_smiles)
    distinct.insert(canonicalize(s));
  return static_cast<int>(distinct.size());
}

Partition partition_dataset(const std::vector<ComplexRecord> &records) {
  std::unordered_set<std::string> seen;
  Partition part;
  for (const auto &rec: records) {
    if (!seen.insert(rec.pocket_id).second)
      throw Error(Errc::kDuplicatePocketId,
                  "pocket id " + rec.pocket_id + " appears more than once");
    if (distinct_ligand_count(rec) > kSftLigandThreshold)
      part.sft_pool.push_back(rec.pocket_id);
    else
      part.dpo_pool.push_back(rec.pocket_id);
  }
  std::sort(part.sft_pool.begin(), part.sft_pool.end());
  std::sort(part.dpo_pool.begin(), part.dpo_pool.end());
  return part;
}

FilterDecision diversity_filter(const std::vector<std::string> &candidates,
                                double threshold) {
  if (candidates.size() < 2)
    throw Error(Errc::kTooFewCandidates,
                "diversity filter needs at least 2 candidates, got "
                    + std::to_string(candidates.size()));
  FilterDecision d;
  d.diversity = diversity_of_smiles(candidates);
  d.keep = d.diversity > threshold;
  return d;
}

double reward(double vina, int fused_count, double lambda) {
  const int excess = std::max(0, fused_count - 2);
  return -(vina + lambda * excess);
}

PreferencePair
build_preference_pairs(const std::string &pocket_id,
                       const std::vector<ScoredCandidate> &scored,
                       double lambda) {
  struct Item {
    const ScoredCandidate *c;
    double r;
  };
  std::vector<Item> items;
  std::unordered_map<std::string, const ScoredCandidate *> seen;
  for (const auto &c: scored) {
    auto [it, fresh] = seen.emplace(c.smiles, &c);
    if (fresh) {
      items.push_back({ &c, reward(c.vina, c.fused_count, lambda) });
    } else if (it->second->vina != c.vina
               || it->second->fused_count != c.fused_count) {
      throw Error(Errc::kConflictingScore,
                  "pocket " + pocket_id + " scores " + c.smiles
                      + " twice with different values");
    }
  }

  if (items.size() < 2)
    throw Error(Errc::kDegeneratePool,
                "pocket " + pocket_id
                    + " has fewer than 2 distinct scored molecules");

  const Item *best = &items[0];
  for (const auto &it: items)
    if (it.r > best->r || (it.r == best->r && it.c->smiles < best->c->smiles))
      best = &it;

  const Item *worst = nullptr;
  for (const auto &it: items) {
    if (&it == best)
      continue;
    if (worst == nullptr || it.r < worst->r
        || (it.r == worst->r && it.c->smiles < worst->c->smiles))
      worst = &it;
  }

  return { pocket_id, best->c->smiles, worst->c->smiles, best->r, worst->r };
}

std::vector<std::string>
select_for_docking(const std::vector<std::string> &candidates, int count) {
  std::vector<std::string> out;
  for (const auto &raw: candidates) {
    if (static_cast<int>(out.size()) >= count)
      break;
    try {
      out.push_back(canonicalize(raw));
    } catch (const Error &) {
      // Invalid strings are skipped.
    }
  }
  return out;
}

CurationResult curate_dpo_set(const std::vector<std::string> &pockets,
                              const Sampler &sampler,
                              const CurationOptions &opts) {
  CurationResult result;
  result.audit.resize(pockets.size());

  std::vector<std::vector<std::string>> raw(pockets.size());
  std::vector<std::string> sampler_error(pockets.size());
  auto draw = [&](std::size_t i) {
    try {
      raw[i] = sampler(pockets[i], opts.n_samples);
    } catch (const std::exception &e) {
      sampler_error[i] = e.what();
    }
  };
  parallel_for(pockets.size(), opts.serial_sampler ? 1 : opts.jobs, draw);

  parallel_for(pockets.size(), opts.jobs, [&](std::size_t i) {
    CurationAudit &row = result.audit[i];
    row.pocket_id = pockets[i];
    if (!sampler_error[i].empty()) {
      row.reason = "sampler error: " + sampler_error[i];
      return;
    }
    std::vector<std::string> valid;
    for (const auto &s: raw[i]) {
      try {
        valid.push_back(canonicalize(s));
      } catch (const Error &) {
      }
    }
    row.valid = static_cast<int>(valid.size());
    if (valid.size() < 2) {
      row.reason = "fewer than 2 valid candidates";
      return;
    }
    const FilterDecision d = diversity_filter(valid, opts.threshold);
    row.diversity = d.diversity;
    row.kept = d.keep;
    if (!d.keep)
      row.reason = "diversity not above threshold";
  });

  for (const auto &row: result.audit)
    if (row.kept)
      result.selected.push_back(row.pocket_id);
  return result;
}

}  // namespace molchord
