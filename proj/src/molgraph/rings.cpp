//
// MolChord desk pipeline - Copyright 2026 The MolChord Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <cstdint>
#include <queue>
#include <vector>

#include "molchord/molgraph/molecule.h"

namespace molchord {
namespace {
  using EdgeSet = std::vector<std::uint64_t>;

  struct Candidate {
    std::vector<int> cycle;  // ordered atoms
    std::vector<int> key;    // sorted atoms, tie-break
    EdgeSet edges;
  };

  bool edge_set_empty(const EdgeSet &s) {
    return std::all_of(s.begin(), s.end(),
                       [](std::uint64_t w) { return w == 0; });
  }

  int lowest_bit(const EdgeSet &s) {
    for (std::size_t w = 0; w < s.size(); ++w)
      if (s[w] != 0)
        return static_cast<int>(w * 64) + __builtin_ctzll(s[w]);
    return -1;
  }

  bool test_bit(const EdgeSet &s, int bit) {
    return (s[bit / 64] >> (bit % 64)) & 1U;
  }

  // Incremental GF(2) elimination with one pivot per stored row.
  class CycleSpaceBasis {
  public:
    // Returns true and stores the vector if it is independent.
    bool insert(EdgeSet v) {
      for (std::size_t i = 0; i < rows_.size(); ++i) {
        if (test_bit(v, pivots_[i]))
          for (std::size_t w = 0; w < v.size(); ++w)
            v[w] ^= rows_[i][w];
      }
      if (edge_set_empty(v))
        return false;
      const int pivot = lowest_bit(v);
      // Keep rows reduced against the new pivot.
      for (auto &row: rows_)
        if (test_bit(row, pivot))
          for (std::size_t w = 0; w < row.size(); ++w)
            row[w] ^= v[w];
      rows_.push_back(std::move(v));
      pivots_.push_back(pivot);
      return true;
    }

  private:
    std::vector<EdgeSet> rows_;
    std::vector<int> pivots_;
  };

  // Rotate so the smallest atom comes first, then walk toward its smaller
  // ring neighbor.
  std::vector<int> normalize_cycle(std::vector<int> cycle) {
    auto it = std::min_element(cycle.begin(), cycle.end());
    std::rotate(cycle.begin(), it, cycle.end());
    if (cycle.size() > 2 && cycle.back() < cycle[1])
      std::reverse(cycle.begin() + 1, cycle.end());
    return cycle;
  }

  // Marks atoms of the 2-core (repeatedly strip degree <= 1 atoms).
  std::vector<bool> two_core(const Molecule &mol) {
    const int n = static_cast<int>(mol.num_atoms());
    std::vector<int> deg(n);
    std::vector<bool> alive(n, true);
    std::vector<int> stack;
    for (int i = 0; i < n; ++i) {
      deg[i] = mol.degree(i);
      if (deg[i] <= 1)
        stack.push_back(i);
    }
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      if (!alive[v])
        continue;
      alive[v] = false;
      for (const auto &nb: mol.neighbors(v))
        if (alive[nb.atom] && --deg[nb.atom] <= 1)
          stack.push_back(nb.atom);
    }
    return alive;
  }
}  // namespace

void perceive_rings(Molecule &mol) {
  const int target = mol.cyclomatic_number();
  if (target <= 0) {
    mol.set_rings({});
    return;
  }

  const int n = static_cast<int>(mol.num_atoms());
  const std::size_t words = (mol.num_bonds() + 63) / 64;
  const auto core = two_core(mol);

  // Horton candidates: for each root v and each edge (x, y) in the core,
  // P(v, x) + (x, y) + P(y, v) when the two shortest paths meet only at v.
  // This family always contains a minimum cycle basis.
  std::vector<Candidate> candidates;
  std::vector<int> parent(n), parent_bond(n), dist(n);
  for (int root = 0; root < n; ++root) {
    if (!core[root])
      continue;

    std::fill(dist.begin(), dist.end(), -1);
    std::fill(parent.begin(), parent.end(), -1);
    std::fill(parent_bond.begin(), parent_bond.end(), -1);
    std::queue<int> queue;
    dist[root] = 0;
    queue.push(root);
    while (!queue.empty()) {
      int v = queue.front();
      queue.pop();
      // Neighbors visited in ascending index order for determinism.
      std::vector<Neighbor> nbs(mol.neighbors(v).begin(),
                                mol.neighbors(v).end());
      std::sort(nbs.begin(), nbs.end(),
                [](const Neighbor &a, const Neighbor &b) {
                  return a.atom < b.atom;
                });
      for (const auto &nb: nbs) {
        if (!core[nb.atom] || dist[nb.atom] >= 0)
          continue;
        dist[nb.atom] = dist[v] + 1;
        parent[nb.atom] = v;
        parent_bond[nb.atom] = nb.bond;
        queue.push(nb.atom);
      }
    }

    auto path_to_root = [&](int v) {
      std::vector<int> path;
      for (; v != -1; v = parent[v])
        path.push_back(v);
      return path;  // v ... root
    };

    for (int b = 0; b < static_cast<int>(mol.num_bonds()); ++b) {
      const Bond &bond = mol.bond(b);
      const int x = bond.begin, y = bond.end;
      if (!core[x] || !core[y] || dist[x] < 0 || dist[y] < 0)
        continue;
      if (parent_bond[x] == b || parent_bond[y] == b)
        continue;
      if (std::abs(dist[x] - dist[y]) > 1)
        continue;

      auto px = path_to_root(x);
      auto py = path_to_root(y);
      // Paths must be disjoint except for the root.
      std::vector<bool> seen(n, false);
      bool simple = true;
      for (std::size_t i = 0; i + 1 < px.size(); ++i)
        seen[px[i]] = true;
      for (std::size_t i = 0; i + 1 < py.size(); ++i)
        if (seen[py[i]]) {
          simple = false;
          break;
        }
      if (!simple)
        continue;

      Candidate cand;
      cand.cycle.assign(px.rbegin(), px.rend());  // root ... x
      for (std::size_t i = 0; i + 1 < py.size(); ++i)
        cand.cycle.push_back(py[i]);  // y ... (before root)
      if (cand.cycle.size() < 3)
        continue;

      cand.edges.assign(words, 0);
      for (std::size_t i = 0; i < cand.cycle.size(); ++i) {
        const int e = mol.find_bond(cand.cycle[i],
                                    cand.cycle[(i + 1) % cand.cycle.size()]);
        cand.edges[e / 64] |= std::uint64_t { 1 } << (e % 64);
      }
      cand.cycle = normalize_cycle(std::move(cand.cycle));
      cand.key = cand.cycle;
      std::sort(cand.key.begin(), cand.key.end());
      candidates.push_back(std::move(cand));
    }
  }

  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate &a, const Candidate &b) {
              if (a.cycle.size() != b.cycle.size())
                return a.cycle.size() < b.cycle.size();
              if (a.key != b.key)
                return a.key < b.key;
              return a.cycle < b.cycle;
            });

  std::vector<std::vector<int>> rings;
  CycleSpaceBasis basis;
  for (auto &cand: candidates) {
    if (static_cast<int>(rings.size()) == target)
      break;
    if (basis.insert(cand.edges))
      rings.push_back(std::move(cand.cycle));
  }
  mol.set_rings(std::move(rings));
}

int count_fused_rings(const Molecule &mol) {
  const auto &rings = mol.rings();
  std::vector<std::vector<int>> ring_bonds(rings.size());
  for (std::size_t r = 0; r < rings.size(); ++r) {
    for (std::size_t i = 0; i < rings[r].size(); ++i)
      ring_bonds[r].push_back(
          mol.find_bond(rings[r][i], rings[r][(i + 1) % rings[r].size()]));
    std::sort(ring_bonds[r].begin(), ring_bonds[r].end());
  }

  int fused = 0;
  for (std::size_t r = 0; r < rings.size(); ++r) {
    for (std::size_t s = 0; s < rings.size(); ++s) {
      if (r == s)
        continue;
      std::vector<int> common;
      std::set_intersection(ring_bonds[r].begin(), ring_bonds[r].end(),
                            ring_bonds[s].begin(), ring_bonds[s].end(),
                            std::back_inserter(common));
      if (!common.empty()) {
        ++fused;
        break;
      }
    }
  }
  return fused;
}

}  // namespace molchord
