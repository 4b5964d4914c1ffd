//
// MolChord desk pipeline - Copyright 2026 The MolChord Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "molchord/molgraph/element.h"
#include "molchord/molgraph/molecule.h"

namespace molchord {
namespace {
  // Upper bound on explored search leaves. Reached only by highly symmetric
  // graphs that twin pruning cannot collapse.
  constexpr int kMaxLeaves = 20000;

  int order_code(BondOrder o) { return static_cast<int>(o); }

  // Dense ranks from per-atom sort keys.
  template <class Key>
  int rank_by(const std::vector<Key> &keys, std::vector<int> &ranks) {
    const int n = static_cast<int>(keys.size());
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](int a, int b) { return keys[a] < keys[b]; });
    ranks.assign(n, 0);
    int r = 0;
    for (int i = 0; i < n; ++i) {
      if (i > 0 && keys[idx[i]] != keys[idx[i - 1]])
        ++r;
      ranks[idx[i]] = r;
    }
    return n == 0 ? 0 : r + 1;
  }

  int count_classes(const std::vector<int> &cls) {
    return cls.empty() ? 0
                       : *std::max_element(cls.begin(), cls.end()) + 1;
  }

  class Canonicalizer {
  public:
    explicit Canonicalizer(const Molecule &mol)
        : mol_(mol), n_(static_cast<int>(mol.num_atoms())) { }

    std::string run();

  private:
    std::vector<int> initial_classes() const;
    void refine(std::vector<int> &cls) const;
    void search(std::vector<int> cls);
    std::vector<int> twin_representatives(const std::vector<int> &cell) const;

    std::string write(const std::vector<int> &rank) const;
    std::string atom_text(int a) const;
    std::string bond_text(int bond) const;

    const Molecule &mol_;
    int n_;
    std::optional<std::string> best_;
    int leaves_ = 0;
  };

  std::vector<int> Canonicalizer::initial_classes() const {
    using Key = std::tuple<int, int, int, int, int, int>;
    std::vector<Key> keys(n_);
    for (int a = 0; a < n_; ++a) {
      const Atom &atom = mol_.atom(a);
      keys[a] = { mol_.degree(a),       atom.atomic_number,
                  atom.isotope,         atom.aromatic ? 1 : 0,
                  atom.formal_charge,   atom.total_h() };
    }
    std::vector<int> cls;
    rank_by(keys, cls);
    return cls;
  }

  // Iterated neighborhood refinement of an ordered partition. The class of
  // each atom stays the leading key, so the order between existing cells is
  // preserved and only ties are split.
  void Canonicalizer::refine(std::vector<int> &cls) const {
    int classes = count_classes(cls);
    std::vector<std::vector<int>> keys(n_);
    while (classes < n_) {
      for (int a = 0; a < n_; ++a) {
        auto &k = keys[a];
        k.clear();
        k.push_back(cls[a]);
        const std::size_t head = k.size();
        for (const auto &nb: mol_.neighbors(a))
          k.push_back(cls[nb.atom] * 8 + order_code(mol_.bond(nb.bond).order));
        std::sort(k.begin() + static_cast<std::ptrdiff_t>(head), k.end());
      }
      std::vector<int> next;
      const int next_classes = rank_by(keys, next);
      cls.swap(next);
      if (next_classes == classes)
        break;
      classes = next_classes;
    }
  }

  // Two cell members with identical bonded neighborhoods (ignoring each
  // other) are exchanged by an automorphism; branching on one suffices.
  std::vector<int>
  Canonicalizer::twin_representatives(const std::vector<int> &cell) const {
    auto signature = [&](int a, int other) {
      std::vector<std::pair<int, int>> sig;
      for (const auto &nb: mol_.neighbors(a))
        if (nb.atom != other)
          sig.push_back({ nb.atom, order_code(mol_.bond(nb.bond).order) });
      std::sort(sig.begin(), sig.end());
      return sig;
    };

    std::vector<int> reps;
    for (int a: cell) {
      bool twin = false;
      for (int r: reps) {
        if (signature(a, r) == signature(r, a)) {
          twin = true;
          break;
        }
      }
      if (!twin)
        reps.push_back(a);
    }
    return reps;
  }

  void Canonicalizer::search(std::vector<int> cls) {
    refine(cls);
    const int classes = count_classes(cls);
    if (classes == n_) {
      ++leaves_;
      std::string s = write(cls);
      if (!best_ || s < *best_)
        best_ = std::move(s);
      return;
    }

    // First non-singleton cell in class order.
    std::vector<int> size(classes, 0);
    for (int c: cls)
      ++size[c];
    int target = 0;
    while (size[target] == 1)
      ++target;
    std::vector<int> cell;
    for (int a = 0; a < n_; ++a)
      if (cls[a] == target)
        cell.push_back(a);

    for (int v: twin_representatives(cell)) {
      if (leaves_ >= kMaxLeaves && best_)
        return;
      std::vector<int> child(n_);
      for (int a = 0; a < n_; ++a)
        child[a] = cls[a] * 2 + (cls[a] == target && a != v ? 1 : 0);
      std::vector<int> dense;
      rank_by(child, dense);
      search(std::move(dense));
    }
  }

  std::string Canonicalizer::atom_text(int a) const {
    const Atom &atom = mol_.atom(a);
    const bool organic_ok =
        is_organic_subset(atom.atomic_number) && atom.isotope == 0
        && atom.formal_charge == 0
        && (!atom.aromatic
            || (atom.atomic_number != 9 && atom.atomic_number != 17
                && atom.atomic_number != 35 && atom.atomic_number != 53))
        && implied_hydrogens(mol_, a) == atom.total_h();

    std::string symbol = atom.element;
    if (atom.aromatic)
      symbol[0] = static_cast<char>(
          std::tolower(static_cast<unsigned char>(symbol[0])));
    if (organic_ok)
      return symbol;

    std::string out = "[";
    if (atom.isotope > 0)
      out += std::to_string(atom.isotope);
    out += symbol;
    const int h = atom.total_h();
    if (h > 0) {
      out += 'H';
      if (h > 1)
        out += std::to_string(h);
    }
    if (atom.formal_charge != 0) {
      out += atom.formal_charge > 0 ? '+' : '-';
      const int mag = std::abs(atom.formal_charge);
      if (mag > 1)
        out += std::to_string(mag);
    }
    out += ']';
    return out;
  }

  std::string Canonicalizer::bond_text(int bond) const {
    const Bond &b = mol_.bond(bond);
    const bool both_aromatic =
        mol_.atom(b.begin).aromatic && mol_.atom(b.end).aromatic;
    switch (b.order) {
    case BondOrder::kSingle:
      return both_aromatic ? "-" : "";
    case BondOrder::kDouble:
      return "=";
    case BondOrder::kTriple:
      return "#";
    case BondOrder::kAromatic:
      return both_aromatic ? "" : ":";
    }
    return "";
  }

  std::string Canonicalizer::write(const std::vector<int> &rank) const {
    // Neighbors of every atom sorted by rank.
    std::vector<std::vector<Neighbor>> nbrs(n_);
    for (int a = 0; a < n_; ++a) {
      nbrs[a].assign(mol_.neighbors(a).begin(), mol_.neighbors(a).end());
      std::sort(nbrs[a].begin(), nbrs[a].end(),
                [&](const Neighbor &x, const Neighbor &y) {
                  return rank[x.atom] < rank[y.atom];
                });
    }

    std::vector<int> by_rank(n_);
    for (int a = 0; a < n_; ++a)
      by_rank[rank[a]] = a;

    // Pass 1: DFS to classify tree edges and ring closures.
    std::vector<int> parent(n_, -1);
    std::vector<bool> visited(n_, false);
    std::vector<std::vector<int>> children(n_);
    std::vector<bool> closure_bond(mol_.num_bonds(), false);
    // Ring closure bonds per atom, in discovery order.
    std::vector<std::vector<int>> ring_bonds(n_);
    std::vector<int> roots;

    for (int start: by_rank) {
      if (visited[start])
        continue;
      roots.push_back(start);
      std::vector<std::pair<int, std::size_t>> stack { { start, 0 } };
      visited[start] = true;
      while (!stack.empty()) {
        auto &[a, i] = stack.back();
        if (i == nbrs[a].size()) {
          stack.pop_back();
          continue;
        }
        const Neighbor nb = nbrs[a][i++];
        if (nb.atom == parent[a] && !closure_bond[nb.bond]
            && mol_.find_bond(a, parent[a]) == nb.bond)
          continue;
        if (visited[nb.atom]) {
          if (!closure_bond[nb.bond]) {
            closure_bond[nb.bond] = true;
            ring_bonds[nb.atom].push_back(nb.bond);  // opening (ancestor)
            ring_bonds[a].push_back(nb.bond);        // closing
          }
          continue;
        }
        visited[nb.atom] = true;
        parent[nb.atom] = a;
        children[a].push_back(nb.atom);
        stack.push_back({ nb.atom, 0 });
      }
    }

    // Pass 2: emit text.
    std::string out;
    std::vector<int> digit_of_bond(mol_.num_bonds(), 0);
    std::vector<bool> digit_used(100, false);
    std::vector<bool> written(n_, false);

    auto digit_text = [](int d) {
      return d < 10 ? std::string(1, static_cast<char>('0' + d))
                    : "%" + std::to_string(d);
    };

    auto emit_atom = [&](int a) {
      out += atom_text(a);
      written[a] = true;

      // Closings first: their partner was written earlier.
      std::vector<int> closings, openings;
      for (int b: ring_bonds[a]) {
        const int other = mol_.bond(b).other(a);
        (written[other] ? closings : openings).push_back(b);
      }
      auto by_partner_rank = [&](int x, int y) {
        return rank[mol_.bond(x).other(a)] < rank[mol_.bond(y).other(a)];
      };
      std::sort(closings.begin(), closings.end(), by_partner_rank);
      std::sort(openings.begin(), openings.end(), by_partner_rank);

      std::vector<int> released;
      for (int b: closings) {
        out += digit_text(digit_of_bond[b]);
        released.push_back(digit_of_bond[b]);
      }
      for (int b: openings) {
        int d = 1;
        while (digit_used[d])
          ++d;
        digit_used[d] = true;
        digit_of_bond[b] = d;
        out += bond_text(b);
        out += digit_text(d);
      }
      for (int d: released)
        digit_used[d] = false;
    };

    for (std::size_t r = 0; r < roots.size(); ++r) {
      if (r > 0)
        out += '.';
      // Iterative pre-order walk; the last child continues the main chain.
      struct Frame {
        int atom;
        std::size_t next_child;
      };
      std::vector<Frame> stack { { roots[r], 0 } };
      emit_atom(roots[r]);
      while (!stack.empty()) {
        Frame &f = stack.back();
        const auto &kids = children[f.atom];
        if (f.next_child == kids.size()) {
          stack.pop_back();
          if (!stack.empty()) {
            Frame &up = stack.back();
            // Close the branch unless this was the parent's last child.
            if (up.next_child < children[up.atom].size())
              out += ')';
          }
          continue;
        }
        const int child = kids[f.next_child++];
        const bool last = f.next_child == kids.size();
        if (!last)
          out += '(';
        out += bond_text(mol_.find_bond(f.atom, child));
        emit_atom(child);
        stack.push_back({ child, 0 });
      }
    }
    return out;
  }

  std::string Canonicalizer::run() {
    if (n_ == 0)
      return {};
    search(initial_classes());
    return *best_;
  }
}  // namespace

std::string canonical_smiles(const Molecule &mol) {
  return Canonicalizer(mol).run();
}

}  // namespace molchord
