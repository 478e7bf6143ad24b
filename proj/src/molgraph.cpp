#include "fp2mol/molgraph.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "fp2mol/elements.hpp"

namespace fp2mol {

double bond_order_value(BondOrder order) {
  switch (order) {
    case BondOrder::Single: return 1.0;
    case BondOrder::Double: return 2.0;
    case BondOrder::Triple: return 3.0;
    case BondOrder::Aromatic: return 1.5;
  }
  return 1.0;
}

namespace {

int implicit_h_from_scratch(const Atom& atom, double order_sum) {
  if (atom.h_specified || !is_organic_subset(atom.element)) return 0;
  const int occupied = static_cast<int>(std::floor(order_sum)) + atom.explicit_h;
  const int valence = smallest_valence_at_least(atom.element, atom.formal_charge,
                                                static_cast<double>(occupied));
  if (valence < 0) return 0;  // over-valent; caller flags the molecule
  return std::max(0, valence - occupied);
}

// Pi-electron contribution of a ring atom for Hueckel counting, or -1 when
// the atom cannot take part in an aromatic system.
int pi_contribution(const Molecule& mol, int idx, const std::vector<int>& ring_set) {
  const Atom& atom = mol.atom(idx);
  bool has_double_in_ring = false;
  bool has_double_to_ring_atom = false;
  bool has_double_exocyclic = false;
  bool has_aromatic = false;
  for (const auto& [nbr, bidx] : mol.neighbors(idx)) {
    const BondOrder order = mol.bond(bidx).order;
    if (order == BondOrder::Triple) return -1;
    if (order == BondOrder::Aromatic) has_aromatic = true;
    if (order == BondOrder::Double) {
      if (std::find(ring_set.begin(), ring_set.end(), nbr) != ring_set.end()) {
        has_double_in_ring = true;
      } else if (mol.atom_in_ring(nbr)) {
        has_double_to_ring_atom = true;
      } else {
        has_double_exocyclic = true;
      }
    }
  }
  if (has_aromatic || has_double_in_ring || has_double_to_ring_atom) return 1;
  if (has_double_exocyclic) return 0;
  // No multiple bond: lone-pair donors contribute 2, empty orbitals 0.
  if (atom.formal_charge < 0) return 2;
  if (atom.formal_charge > 0) {
    return atom.element == 6 ? 0 : -1;
  }
  switch (atom.element) {
    case 7:
    case 8:
    case 15:
    case 16:
    case 33:
    case 34:
      return 2;
    case 5:
      return 0;
    default:
      return -1;
  }
}

}  // namespace

Molecule Molecule::from_parts(std::vector<Atom> atoms, std::vector<Bond> bonds,
                              bool perceive_aromatic) {
  Molecule mol;
  const int n = static_cast<int>(atoms.size());
  std::set<std::pair<int, int>> seen;
  for (const Bond& b : bonds) {
    if (b.a < 0 || b.a >= n || b.b < 0 || b.b >= n)
      throw std::invalid_argument("bond endpoint out of range");
    if (b.a == b.b) throw std::invalid_argument("self-loop bond");
    auto key = std::minmax(b.a, b.b);
    if (!seen.insert(key).second) throw std::invalid_argument("duplicate bond");
  }
  for (const Atom& a : atoms) {
    if (a.element < 1 || a.element > kMaxElement)
      throw std::invalid_argument("unknown element " + std::to_string(a.element));
    if (a.aromatic && !aromatic_allowed(a.element))
      throw std::invalid_argument("aromatic flag not allowed for element " +
                                  element_symbol(a.element));
    if (a.explicit_h < 0) throw std::invalid_argument("negative hydrogen count");
    if (a.isotope < 0) throw std::invalid_argument("negative isotope");
  }
  for (const Bond& b : bonds) {
    if (b.order == BondOrder::Aromatic &&
        (!atoms[b.a].aromatic || !atoms[b.b].aromatic))
      throw std::invalid_argument("aromatic bond requires aromatic endpoints");
  }
  mol.atoms_ = std::move(atoms);
  mol.bonds_ = std::move(bonds);
  mol.finalize(perceive_aromatic);
  return mol;
}

void Molecule::finalize(bool perceive_aromatic) {
  const int n = atom_count();
  const int m = bond_count();
  adjacency_.assign(n, {});
  for (int i = 0; i < m; ++i) {
    adjacency_[bonds_[i].a].emplace_back(bonds_[i].b, i);
    adjacency_[bonds_[i].b].emplace_back(bonds_[i].a, i);
  }

  heavy_degree_.assign(n, 0);
  bond_order_sum_.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (const auto& [nbr, bidx] : adjacency_[i]) {
      if (atoms_[nbr].element != 1) ++heavy_degree_[i];
      bond_order_sum_[i] += bond_order_value(bonds_[bidx].order);
    }
  }

  // Hydrogen counts are fixed from the orders the molecule was written with;
  // later aromatic perception must not change them.
  implicit_h_.assign(n, 0);
  for (int i = 0; i < n; ++i) {
    implicit_h_[i] = implicit_h_from_scratch(atoms_[i], bond_order_sum_[i]);
  }

  component_of_.assign(n, -1);
  component_count_ = 0;
  std::vector<int> stack;
  for (int i = 0; i < n; ++i) {
    if (component_of_[i] >= 0) continue;
    int comp = component_count_++;
    stack.push_back(i);
    component_of_[i] = comp;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (const auto& [nbr, bidx] : adjacency_[v]) {
        if (component_of_[nbr] < 0) {
          component_of_[nbr] = comp;
          stack.push_back(nbr);
        }
      }
    }
  }

  // Ring membership: a bond is in a ring iff it is not a bridge.
  bond_in_ring_.assign(m, true);
  atom_in_ring_.assign(n, false);
  {
    std::vector<int> disc(n, -1), low(n, 0);
    int timer = 0;
    // Iterative DFS; frames are (vertex, parent bond, next adjacency slot).
    struct Frame { int v; int parent_bond; size_t slot; };
    std::vector<Frame> frames;
    for (int root = 0; root < n; ++root) {
      if (disc[root] >= 0) continue;
      frames.push_back({root, -1, 0});
      disc[root] = low[root] = timer++;
      while (!frames.empty()) {
        Frame& f = frames.back();
        if (f.slot < adjacency_[f.v].size()) {
          auto [nbr, bidx] = adjacency_[f.v][f.slot++];
          if (bidx == f.parent_bond) continue;
          if (disc[nbr] < 0) {
            disc[nbr] = low[nbr] = timer++;
            frames.push_back({nbr, bidx, 0});
          } else {
            low[f.v] = std::min(low[f.v], disc[nbr]);
          }
        } else {
          int v = f.v;
          int pb = f.parent_bond;
          frames.pop_back();
          if (pb >= 0) {
            int parent = bonds_[pb].a == v ? bonds_[pb].b : bonds_[pb].a;
            low[parent] = std::min(low[parent], low[v]);
            if (low[v] > disc[parent]) bond_in_ring_[pb] = false;
          }
        }
      }
    }
  }
  for (int i = 0; i < m; ++i) {
    if (bond_in_ring_[i]) {
      atom_in_ring_[bonds_[i].a] = true;
      atom_in_ring_[bonds_[i].b] = true;
    }
  }

  sssr_ = perceive_rings(*this);

  if (perceive_aromatic) {
    // Upgrade Kekule rings that pass the Hueckel count.  Iterated because a
    // ring may qualify only once a fused neighbour has been marked.
    bool changed = true;
    std::vector<bool> ring_done(sssr_.size(), false);
    while (changed) {
      changed = false;
      for (size_t r = 0; r < sssr_.size(); ++r) {
        if (ring_done[r]) continue;
        const std::vector<int>& ring = sssr_[r];
        bool eligible = true;
        int pi_total = 0;
        for (int idx : ring) {
          const Atom& atom = atoms_[idx];
          if (!aromatic_allowed(atom.element) ||
              heavy_degree_[idx] + atoms_[idx].explicit_h + implicit_h_[idx] > 3) {
            eligible = false;
            break;
          }
          int pi = pi_contribution(*this, idx, ring);
          if (pi < 0) {
            eligible = false;
            break;
          }
          pi_total += pi;
        }
        if (!eligible) {
          ring_done[r] = true;
          continue;
        }
        if (pi_total % 4 != 2) continue;  // retry later; fused marks may help
        for (int idx : ring) atoms_[idx].aromatic = true;
        const int len = static_cast<int>(ring.size());
        for (int k = 0; k < len; ++k) {
          int bidx = bond_between(ring[k], ring[(k + 1) % len]);
          if (bidx >= 0) bonds_[bidx].order = BondOrder::Aromatic;
        }
        ring_done[r] = true;
        changed = true;
      }
    }
    // Orders may have changed.
    for (int i = 0; i < n; ++i) {
      bond_order_sum_[i] = 0.0;
      for (const auto& [nbr, bidx] : adjacency_[i])
        bond_order_sum_[i] += bond_order_value(bonds_[bidx].order);
    }
  }

  // Over-valence check; aromatic bonds count as sigma bonds here so that
  // lone-pair heteroaromatics ([nH], o, s) stay valid.
  valence_invalid_ = false;
  for (int i = 0; i < n; ++i) {
    const int maxv = max_valence(atoms_[i].element, atoms_[i].formal_charge);
    if (maxv < 0) continue;
    double sigma = 0.0;
    for (const auto& [nbr, bidx] : adjacency_[i]) {
      const BondOrder order = bonds_[bidx].order;
      sigma += order == BondOrder::Aromatic ? 1.0 : bond_order_value(order);
    }
    const int occupied = static_cast<int>(std::floor(sigma)) + total_h(i);
    if (occupied > maxv) {
      valence_invalid_ = true;
      break;
    }
  }
}

int Molecule::bond_between(int a, int b) const {
  for (const auto& [nbr, bidx] : adjacency_[a]) {
    if (nbr == b) return bidx;
  }
  return -1;
}

int implicit_hydrogens(const Molecule& mol, int atom_index) {
  return mol.implicit_h(atom_index);
}

int heavy_atom_count(const Molecule& mol) {
  int count = 0;
  for (const Atom& a : mol.atoms()) {
    if (a.element != 1) ++count;
  }
  return count;
}

Molecule permute_atoms(const Molecule& mol, const std::vector<int>& perm) {
  const int n = mol.atom_count();
  if (static_cast<int>(perm.size()) != n)
    throw std::invalid_argument("permutation size mismatch");
  std::vector<Atom> atoms(n);
  for (int i = 0; i < n; ++i) {
    Atom a = mol.atom(i);
    // Freeze hydrogen counts so the rebuild cannot re-derive them differently.
    a.explicit_h = mol.total_h(i);
    a.h_specified = true;
    atoms[perm[i]] = a;
  }
  std::vector<Bond> bonds;
  bonds.reserve(mol.bond_count());
  for (const Bond& b : mol.bonds()) {
    bonds.push_back({perm[b.a], perm[b.b], b.order});
  }
  return Molecule::from_parts(std::move(atoms), std::move(bonds), false);
}

}  // namespace fp2mol
