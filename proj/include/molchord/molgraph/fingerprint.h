//
// MolChord desk pipeline - Copyright 2026 The MolChord Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLCHORD_MOLGRAPH_FINGERPRINT_H_
#define MOLCHORD_MOLGRAPH_FINGERPRINT_H_

#include <cstdint>
#include <vector>

#include "molchord/molgraph/molecule.h"

namespace molchord {

inline constexpr int kDefaultFingerprintRadius = 2;
inline constexpr int kDefaultFingerprintBits = 2048;

class Fingerprint {
public:
  Fingerprint() = default;
  explicit Fingerprint(int nbits, int radius = kDefaultFingerprintRadius);

  int nbits() const noexcept { return nbits_; }
  int radius() const noexcept { return radius_; }

  void set(int bit);
  bool test(int bit) const;
  int popcount() const noexcept;

  const std::vector<std::uint64_t> &words() const noexcept { return words_; }

  bool operator==(const Fingerprint &) const = default;

private:
  int nbits_ = 0;
  int radius_ = 0;
  std::vector<std::uint64_t> words_;
};

// ECFP-style circular fingerprint: every atom contributes one bit per
// radius 0..radius, hashed from its sorted neighborhood identifiers.
// Requires perceived rings. nbits must be a power of two >= 64.
Fingerprint morgan_fingerprint(const Molecule &mol,
                               int radius = kDefaultFingerprintRadius,
                               int nbits = kDefaultFingerprintBits);

// |A & B| / |A | B|; 1.0 when both are empty. Throws WidthMismatch.
double tanimoto(const Fingerprint &a, const Fingerprint &b);

}  // namespace molchord

#endif  // MOLCHORD_MOLGRAPH_FINGERPRINT_H_
