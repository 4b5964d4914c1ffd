//
// MolChord desk pipeline - Copyright 2026 The MolChord Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molchord/molgraph/fingerprint.h"

#include <algorithm>
#include <bit>
#include <string>

#include "molchord/error.h"
#include "molchord/util/hash.h"

namespace molchord {

Fingerprint::Fingerprint(int nbits, int radius)
    : nbits_(nbits), radius_(radius),
      words_(static_cast<std::size_t>((nbits + 63) / 64), 0) {
  if (nbits < 64 || !std::has_single_bit(static_cast<unsigned>(nbits)))
    throw Error(Errc::kOutOfRange,
                "fingerprint width must be a power of two >= 64, got "
                    + std::to_string(nbits));
  if (radius < 0)
    throw Error(Errc::kOutOfRange, "fingerprint radius must be >= 0");
}

void Fingerprint::set(int bit) {
  words_[bit / 64] |= std::uint64_t { 1 } << (bit % 64);
}

bool Fingerprint::test(int bit) const {
  return (words_[bit / 64] >> (bit % 64)) & 1U;
}

int Fingerprint::popcount() const noexcept {
  int n = 0;
  for (auto w: words_)
    n += std::popcount(w);
  return n;
}

Fingerprint morgan_fingerprint(const Molecule &mol, int radius, int nbits) {
  Fingerprint fp(nbits, radius);
  const int n = static_cast<int>(mol.num_atoms());

  std::vector<bool> in_ring(n, false);
  for (const auto &ring: mol.rings())
    for (int a: ring)
      in_ring[a] = true;

  std::vector<std::uint64_t> ids(n);
  for (int a = 0; a < n; ++a) {
    const Atom &atom = mol.atom(a);
    ids[a] = hash_values({
        static_cast<std::uint64_t>(atom.atomic_number),
        static_cast<std::uint64_t>(mol.degree(a)),
        static_cast<std::uint64_t>(atom.total_h()),
        static_cast<std::uint64_t>(atom.formal_charge + 16),
        in_ring[a] ? 1ULL : 0ULL,
        atom.aromatic ? 1ULL : 0ULL,
    });
  }

  const auto mask = static_cast<std::uint64_t>(nbits - 1);
  for (int a = 0; a < n; ++a)
    fp.set(static_cast<int>(ids[a] & mask));

  std::vector<std::uint64_t> next(n);
  std::vector<std::uint64_t> env;
  for (int r = 1; r <= radius; ++r) {
    for (int a = 0; a < n; ++a) {
      env.clear();
      for (const auto &nb: mol.neighbors(a))
        env.push_back(hash_combine(
            static_cast<std::uint64_t>(mol.bond(nb.bond).order), ids[nb.atom]));
      std::sort(env.begin(), env.end());
      std::uint64_t h = hash_combine(static_cast<std::uint64_t>(r), ids[a]);
      for (auto e: env)
        h = hash_combine(h, e);
      next[a] = h;
    }
    ids.swap(next);
    for (int a = 0; a < n; ++a)
      fp.set(static_cast<int>(ids[a] & mask));
  }
  return fp;
}

double tanimoto(const Fingerprint &a, const Fingerprint &b) {
  if (a.nbits() != b.nbits())
    throw Error(Errc::kWidthMismatch,
                "fingerprint widths differ: " + std::to_string(a.nbits())
                    + " vs " + std::to_string(b.nbits()));
  int inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.words().size(); ++i) {
    inter += std::popcount(a.words()[i] & b.words()[i]);
    uni += std::popcount(a.words()[i] | b.words()[i]);
  }
  if (uni == 0)
    return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace molchord
