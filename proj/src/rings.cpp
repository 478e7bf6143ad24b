#include <algorithm>
#include <deque>
#include <vector>

#include "fp2mol/molgraph.hpp"

namespace fp2mol {

namespace {

// Shortest cycle through bond (u,v), as a bond-membership bitmask over all
// bonds, found by BFS from u to v with the bond itself removed.
std::vector<bool> shortest_cycle_through(const Molecule& mol, int bond_idx,
                                         std::vector<int>* atom_cycle) {
  const int u = mol.bond(bond_idx).a;
  const int v = mol.bond(bond_idx).b;
  const int n = mol.atom_count();
  std::vector<int> prev_atom(n, -1), prev_bond(n, -1);
  std::deque<int> queue;
  queue.push_back(u);
  prev_atom[u] = u;
  while (!queue.empty()) {
    int cur = queue.front();
    queue.pop_front();
    if (cur == v) break;
    for (const auto& [nbr, bidx] : mol.neighbors(cur)) {
      if (bidx == bond_idx || prev_atom[nbr] >= 0) continue;
      prev_atom[nbr] = cur;
      prev_bond[nbr] = bidx;
      queue.push_back(nbr);
    }
  }
  if (prev_atom[v] < 0) return {};
  std::vector<bool> mask(mol.bond_count(), false);
  mask[bond_idx] = true;
  atom_cycle->clear();
  for (int cur = v; cur != u; cur = prev_atom[cur]) {
    atom_cycle->push_back(cur);
    mask[prev_bond[cur]] = true;
  }
  atom_cycle->push_back(u);
  return mask;
}

bool gf2_insert(std::vector<std::vector<bool>>& basis, std::vector<bool> row) {
  for (const auto& pivot : basis) {
    // Reduce by the existing row if they share the pivot position.
    size_t p = 0;
    while (p < pivot.size() && !pivot[p]) ++p;
    if (p < row.size() && row[p]) {
      for (size_t i = 0; i < row.size(); ++i) row[i] = row[i] != pivot[i];
    }
  }
  if (std::none_of(row.begin(), row.end(), [](bool b) { return b; })) return false;
  // Keep the basis in echelon form ordered by pivot position.
  size_t p = 0;
  while (!row[p]) ++p;
  auto it = basis.begin();
  while (it != basis.end()) {
    size_t q = 0;
    while (q < it->size() && !(*it)[q]) ++q;
    if (q > p) break;
    ++it;
  }
  basis.insert(it, std::move(row));
  return true;
}

}  // namespace

std::vector<std::vector<int>> perceive_rings(const Molecule& mol) {
  const int target =
      mol.bond_count() - mol.atom_count() + mol.component_count();
  if (target <= 0) return {};

  struct Candidate {
    std::vector<bool> mask;
    std::vector<int> atoms;
    int bond_low;  // deterministic tiebreak: lowest member bond index
  };
  std::vector<Candidate> candidates;
  for (int b = 0; b < mol.bond_count(); ++b) {
    if (!mol.bond_in_ring(b)) continue;
    std::vector<int> cycle_atoms;
    auto mask = shortest_cycle_through(mol, b, &cycle_atoms);
    if (mask.empty()) continue;
    int low = 0;
    while (!mask[low]) ++low;
    candidates.push_back({std::move(mask), std::move(cycle_atoms), low});
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& x, const Candidate& y) {
                     if (x.atoms.size() != y.atoms.size())
                       return x.atoms.size() < y.atoms.size();
                     return x.bond_low < y.bond_low;
                   });

  std::vector<std::vector<bool>> basis;
  std::vector<std::vector<int>> rings;
  for (auto& cand : candidates) {
    if (static_cast<int>(rings.size()) == target) break;
    if (gf2_insert(basis, cand.mask)) rings.push_back(std::move(cand.atoms));
  }

  if (static_cast<int>(rings.size()) < target) {
    // Shortest per-edge cycles did not span the cycle space (possible on
    // unusually regular graphs); complete the basis with fundamental cycles
    // of a BFS forest.
    const int n = mol.atom_count();
    std::vector<int> parent_atom(n, -1), parent_bond(n, -1), depth(n, 0);
    std::vector<bool> visited(n, false), tree_bond(mol.bond_count(), false);
    for (int root = 0; root < n && static_cast<int>(rings.size()) < target; ++root) {
      if (visited[root]) continue;
      std::deque<int> queue{root};
      visited[root] = true;
      while (!queue.empty()) {
        int cur = queue.front();
        queue.pop_front();
        for (const auto& [nbr, bidx] : mol.neighbors(cur)) {
          if (visited[nbr]) continue;
          visited[nbr] = true;
          parent_atom[nbr] = cur;
          parent_bond[nbr] = bidx;
          depth[nbr] = depth[cur] + 1;
          tree_bond[bidx] = true;
          queue.push_back(nbr);
        }
      }
    }
    for (int b = 0; b < mol.bond_count() && static_cast<int>(rings.size()) < target; ++b) {
      if (tree_bond[b] || !mol.bond_in_ring(b)) continue;
      std::vector<bool> mask(mol.bond_count(), false);
      mask[b] = true;
      int u = mol.bond(b).a, v = mol.bond(b).b;
      std::vector<int> left{u}, right{v};
      while (u != v) {
        if (depth[u] >= depth[v]) {
          mask[parent_bond[u]] = true;
          u = parent_atom[u];
          left.push_back(u);
        } else {
          mask[parent_bond[v]] = true;
          v = parent_atom[v];
          right.push_back(v);
        }
      }
      left.pop_back();  // shared ancestor appears in both walks
      std::vector<int> cycle_atoms(left);
      cycle_atoms.insert(cycle_atoms.end(), right.rbegin(), right.rend());
      if (gf2_insert(basis, mask)) rings.push_back(std::move(cycle_atoms));
    }
  }
  return rings;
}

}  // namespace fp2mol
