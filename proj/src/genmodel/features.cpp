//
// MolChord desk pipeline - Copyright 2026 The MolChord Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <cmath>
#include <string_view>

#include "molchord/error.h"
#include "molchord/genmodel/model.h"
#include "molchord/molgraph/fingerprint.h"

namespace molchord {
namespace {
  constexpr std::string_view kResidues = "ACDEFGHIKLMNPQRSTVWY";
  constexpr int kPositional = 8;
  constexpr int kResidueInput = 21 + kPositional;  // one-hot + unknown + pos

  std::vector<double> residue_input(char aa, int position) {
    std::vector<double> in(kResidueInput, 0.0);
    const auto idx = kResidues.find(aa);
    in[idx == std::string_view::npos ? 20 : idx] = 1.0;
    for (int j = 0; j < kPositional / 2; ++j) {
      const double freq = std::pow(100.0, -2.0 * j / kPositional);
      in[21 + 2 * j] = std::sin(position * freq);
      in[21 + 2 * j + 1] = std::cos(position * freq);
    }
    return in;
  }
}  // namespace

PocketFeatures make_features(std::string pocket_id,
                             std::vector<std::vector<double>> vectors) {
  if (vectors.empty())
    throw Error(Errc::kShapeMismatch, "pocket features need N_tok >= 1");
  PocketFeatures f;
  f.pocket_id = std::move(pocket_id);
  const std::size_t dim = vectors.front().size();
  f.pooled.assign(dim, 0.0);
  for (const auto &v: vectors) {
    if (v.size() != dim)
      throw Error(Errc::kShapeMismatch, "feature vectors differ in width");
    for (std::size_t i = 0; i < dim; ++i) {
      if (!std::isfinite(v[i]))
        throw Error(Errc::kOutOfRange, "non-finite pocket feature");
      f.pooled[i] += v[i];
    }
  }
  for (double &x: f.pooled)
    x /= static_cast<double>(vectors.size());
  f.vectors = std::move(vectors);
  return f;
}

PocketFeatures featurize_pocket(const ComplexRecord &record, int d_feat,
                                std::uint64_t seed) {
  std::vector<std::vector<double>> vectors;
  if (record.pocket_sequence && !record.pocket_sequence->empty()) {
    // One projection shared by every pocket, like a frozen encoder.
    Rng proj_rng(stream_seed(seed, "residue-projection", d_feat));
    std::vector<double> proj(static_cast<std::size_t>(d_feat) * kResidueInput);
    for (double &w: proj)
      w = proj_rng.normal() / std::sqrt(3.0);

    const auto &seq = *record.pocket_sequence;
    for (std::size_t i = 0; i < seq.size(); ++i) {
      const auto in = residue_input(seq[i], static_cast<int>(i));
      std::vector<double> v(d_feat, 0.0);
      for (int r = 0; r < d_feat; ++r)
        for (int c = 0; c < kResidueInput; ++c)
          v[r] += proj[static_cast<std::size_t>(r) * kResidueInput + c] * in[c];
      vectors.push_back(std::move(v));
    }
  } else {
    Rng rng(stream_seed(seed, record.pocket_id, 0));
    for (int j = 0; j < kPseudoResidues; ++j) {
      std::vector<double> v(d_feat);
      for (double &x: v)
        x = rng.normal();
      vectors.push_back(std::move(v));
    }
  }
  return make_features(record.pocket_id, std::move(vectors));
}

std::vector<double> ligand_features(const Molecule &mol, int d_feat) {
  const Fingerprint fp = morgan_fingerprint(mol);
  std::vector<double> v(d_feat, 0.0);
  for (int b = 0; b < fp.nbits(); ++b)
    if (fp.test(b))
      v[b % d_feat] += 1.0;
  const double norm = std::sqrt(std::max(1, fp.popcount()));
  for (double &x: v)
    x /= norm;
  return v;
}

std::vector<double> complex_features(const PocketFeatures &pocket,
                                     const std::vector<double> &ligand) {
  std::vector<double> v(pocket.pooled);
  v.insert(v.end(), ligand.begin(), ligand.end());
  return v;
}

}  // namespace molchord
