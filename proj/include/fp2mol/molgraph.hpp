#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fp2mol {

enum class BondOrder : std::uint8_t {
  Single = 1,
  Double = 2,
  Triple = 3,
  Aromatic = 4,
};

// Fractional order used in valence arithmetic: aromatic bonds count 1.5.
double bond_order_value(BondOrder order);

struct Atom {
  int element = 6;
  int formal_charge = 0;
  // Hydrogens attached to this atom beyond the implicit fill: bracket-atom H
  // counts and folded explicit [H] neighbours both land here.
  int explicit_h = 0;
  // True when the H count is fixed (bracket atom): no implicit fill applies.
  bool h_specified = false;
  bool aromatic = false;
  int isotope = 0;  // 0 = unspecified
};

struct Bond {
  int a = -1;
  int b = -1;
  BondOrder order = BondOrder::Single;
};

// Immutable attributed molecular graph. Adjacency, ring membership, implicit
// hydrogen counts and the valence flag are derived once at construction.
class Molecule {
 public:
  Molecule() = default;

  // Throws std::invalid_argument on self-loops, duplicate bonds, out-of-range
  // endpoints, unknown elements or aromatic flags on ineligible atoms.
  // When perceive_aromatic is set, qualifying Kekule rings are upgraded to
  // aromatic atoms/bonds after hydrogen counts are fixed.
  static Molecule from_parts(std::vector<Atom> atoms, std::vector<Bond> bonds,
                             bool perceive_aromatic = true);

  int atom_count() const { return static_cast<int>(atoms_.size()); }
  int bond_count() const { return static_cast<int>(bonds_.size()); }
  const Atom& atom(int i) const { return atoms_[i]; }
  const Bond& bond(int i) const { return bonds_[i]; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  const std::vector<Bond>& bonds() const { return bonds_; }

  // (neighbour atom index, bond index) pairs in input bond order.
  const std::vector<std::pair<int, int>>& neighbors(int i) const { return adjacency_[i]; }

  int implicit_h(int i) const { return implicit_h_[i]; }
  int total_h(int i) const { return atoms_[i].explicit_h + implicit_h_[i]; }
  // Neighbour count, hydrogen atoms excluded.
  int heavy_degree(int i) const { return heavy_degree_[i]; }
  double bond_order_sum(int i) const { return bond_order_sum_[i]; }

  bool atom_in_ring(int i) const { return atom_in_ring_[i]; }
  bool bond_in_ring(int i) const { return bond_in_ring_[i]; }

  // Smallest set of smallest rings, each ring a cyclic atom-index sequence.
  const std::vector<std::vector<int>>& rings() const { return sssr_; }

  // Set when any atom's floored bond order sum plus hydrogens exceeds the
  // largest table valence for its element/charge.
  bool valence_invalid() const { return valence_invalid_; }

  int component_count() const { return component_count_; }
  // Component id per atom, numbered by first appearance.
  const std::vector<int>& component_of() const { return component_of_; }

  int bond_between(int a, int b) const;  // bond index or -1

 private:
  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
  std::vector<std::vector<std::pair<int, int>>> adjacency_;
  std::vector<int> implicit_h_;
  std::vector<int> heavy_degree_;
  std::vector<double> bond_order_sum_;
  std::vector<bool> atom_in_ring_;
  std::vector<bool> bond_in_ring_;
  std::vector<std::vector<int>> sssr_;
  std::vector<int> component_of_;
  int component_count_ = 0;
  bool valence_invalid_ = false;

  void finalize(bool perceive_aromatic);
};

// Implicit hydrogen top-up for one atom: 0 for fixed-H or non-organic-subset
// atoms, otherwise max(0, smallest fitting table valence - floor(bond order
// sum) - explicit_h) with aromatic bonds counting 1.5.
int implicit_hydrogens(const Molecule& mol, int atom_index);

// SSSR cover: |bonds| - |atoms| + |components| independent smallest cycles.
std::vector<std::vector<int>> perceive_rings(const Molecule& mol);

// Exact isomorphism on element, charge, isotope, aromatic flag, total
// hydrogen count and bond order.
bool graphs_isomorphic(const Molecule& a, const Molecule& b);

int heavy_atom_count(const Molecule& mol);

// Rebuilds the molecule with atom i moved to position perm[i].
Molecule permute_atoms(const Molecule& mol, const std::vector<int>& perm);

}  // namespace fp2mol
