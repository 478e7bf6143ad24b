#include <algorithm>
#include <bit>
#include <map>
#include <queue>
#include <stdexcept>

#include "fp2mol/fingerprint.hpp"
#include "fp2mol/hash.hpp"

namespace fp2mol {
namespace {

std::uint64_t atom_invariant(const Molecule& mol, int index) {
  const Atom& atom = mol.atom(index);
  Fnv1a64 h;
  h.update_i32(atom.element);
  h.update_i32(mol.heavy_degree(index));
  h.update_i32(atom.formal_charge);
  h.update_i32(mol.total_h(index));
  h.update_i32(atom.aromatic ? 1 : 0);
  h.update_i32(mol.atom_in_ring(index) ? 1 : 0);
  return h.digest();
}

// Bonds with an endpoint within `radius - 1` steps of the root: the edge set
// a walk of `radius` bonds from the root can cover.
std::vector<int> environment_bonds(const Molecule& mol, const std::vector<int>& dist,
                                   int radius) {
  std::vector<int> bonds;
  for (int i = 0; i < mol.bond_count(); ++i) {
    const Bond& bond = mol.bond(i);
    const int nearest = std::min(dist[bond.a], dist[bond.b]);
    if (nearest >= 0 && nearest <= radius - 1) bonds.push_back(i);
  }
  return bonds;
}

std::vector<int> bfs_distances(const Molecule& mol, int source) {
  std::vector<int> dist(mol.atom_count(), -1);
  std::queue<int> queue;
  dist[source] = 0;
  queue.push(source);
  while (!queue.empty()) {
    const int atom = queue.front();
    queue.pop();
    for (const auto& [nbr, bond] : mol.neighbors(atom)) {
      if (dist[nbr] >= 0) continue;
      dist[nbr] = dist[atom] + 1;
      queue.push(nbr);
    }
  }
  return dist;
}

}  // namespace

int Fingerprint::popcount() const {
  int total = 0;
  for (std::uint64_t block : blocks) total += std::popcount(block);
  return total;
}

std::vector<std::uint64_t> morgan_environment_ids(const Molecule& mol, int radius) {
  const int n = mol.atom_count();
  std::vector<std::uint64_t> ids;
  std::vector<std::uint64_t> inv(n);
  for (int i = 0; i < n; ++i) {
    inv[i] = atom_invariant(mol, i);
    // Radius-0 environments stand for bare atom types; they all share the
    // empty bond set, so the dedup rule exempts them.
    ids.push_back(inv[i]);
  }

  std::vector<std::vector<int>> dist(n);
  for (int i = 0; i < n; ++i) dist[i] = bfs_distances(mol, i);

  // Larger environments collapse when they cover identical bond sets; the
  // numerically smallest identifier represents the set.
  std::map<std::vector<int>, std::uint64_t> by_bond_set;
  std::vector<std::vector<int>> prev_env(n);
  std::vector<bool> stopped(n, false);

  for (int r = 1; r <= radius; ++r) {
    std::vector<std::uint64_t> next(n);
    for (int i = 0; i < n; ++i) {
      std::vector<std::pair<int, std::uint64_t>> nbrs;
      for (const auto& [nbr, bond] : mol.neighbors(i)) {
        nbrs.push_back({static_cast<int>(mol.bond(bond).order), inv[nbr]});
      }
      std::sort(nbrs.begin(), nbrs.end());
      Fnv1a64 h;
      h.update_i32(r);
      h.update_u64(inv[i]);
      for (const auto& [code, nbr_inv] : nbrs) {
        h.update_i32(code);
        h.update_u64(nbr_inv);
      }
      next[i] = h.digest();
    }
    for (int i = 0; i < n; ++i) {
      if (stopped[i]) continue;
      std::vector<int> env = environment_bonds(mol, dist[i], r);
      if (env == prev_env[i]) {
        stopped[i] = true;
        continue;
      }
      auto [it, inserted] = by_bond_set.emplace(env, next[i]);
      if (!inserted) it->second = std::min(it->second, next[i]);
      prev_env[i] = std::move(env);
    }
    inv = std::move(next);
  }

  for (const auto& [bonds, id] : by_bond_set) ids.push_back(id);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

Fingerprint morgan_fingerprint(const Molecule& mol, int radius, int width) {
  if (width <= 0) throw std::invalid_argument("fingerprint width must be positive");
  Fingerprint fp(width);
  for (std::uint64_t id : morgan_environment_ids(mol, radius)) {
    fp.set(static_cast<int>(id % static_cast<std::uint64_t>(width)));
  }
  return fp;
}

double tanimoto(const Fingerprint& a, const Fingerprint& b) {
  if (a.width != b.width) throw std::invalid_argument("fingerprint width mismatch");
  int inter = 0;
  int uni = 0;
  for (size_t i = 0; i < a.blocks.size(); ++i) {
    inter += std::popcount(a.blocks[i] & b.blocks[i]);
    uni += std::popcount(a.blocks[i] | b.blocks[i]);
  }
  // Two empty bit sets score 0, not 1: an empty prediction earns nothing.
  if (uni == 0) return 0.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

OnBitSequence threshold_onbits(const ProbFingerprint& fp, double threshold) {
  if (static_cast<int>(fp.probs.size()) != fp.width) {
    throw std::invalid_argument("probability vector length does not match width");
  }
  OnBitSequence bits;
  for (int i = 0; i < fp.width; ++i) {
    if (fp.probs[static_cast<size_t>(i)] >= threshold) bits.push_back(i);
  }
  return bits;
}

OnBitSequence fingerprint_to_onbits(const Fingerprint& fp) {
  OnBitSequence bits;
  for (int i = 0; i < fp.width; ++i) {
    if (fp.test(i)) bits.push_back(i);
  }
  return bits;
}

Fingerprint onbits_to_fingerprint(const OnBitSequence& onbits, int width) {
  Fingerprint fp(width);
  for (int bit : onbits) {
    if (bit < 0 || bit >= width) throw std::invalid_argument("on-bit index out of range");
    fp.set(bit);
  }
  return fp;
}

}  // namespace fp2mol
