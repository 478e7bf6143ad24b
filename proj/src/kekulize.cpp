#include <algorithm>
#include <cmath>

#include "fp2mol/elements.hpp"
#include "fp2mol/smiles.hpp"

namespace fp2mol {
namespace {

// 1 when the atom must gain a double bond for its valence to close, 0 when
// its sigma bonds and hydrogens already account for everything.
int double_bond_need(const Molecule& mol, int index) {
  const Atom& atom = mol.atom(index);
  double sigma = 0;
  bool any_aromatic = false;
  for (const auto& [nbr, bond] : mol.neighbors(index)) {
    const BondOrder order = mol.bond(bond).order;
    if (order == BondOrder::Aromatic) {
      sigma += 1.0;
      any_aromatic = true;
    } else {
      sigma += bond_order_value(order);
    }
  }
  if (!atom.aromatic && !any_aromatic) return 0;
  const double occupied = sigma + mol.total_h(index);
  const int valence = smallest_valence_at_least(atom.element, atom.formal_charge, occupied);
  if (valence < 0) {
    throw KekulizeError("atom " + std::to_string(index) + " exceeds every table valence");
  }
  const int need = valence - static_cast<int>(std::lround(occupied));
  if (need < 0 || need > 1) {
    throw KekulizeError("atom " + std::to_string(index) + " needs " + std::to_string(need) +
                        " double bonds, cannot kekulize");
  }
  return need;
}

// Perfect matching on the needy atoms restricted to aromatic bonds.
bool match_needy(const Molecule& mol, const std::vector<int>& need, std::vector<int>& mate,
                 std::vector<bool>& bond_double, int from) {
  int atom = -1;
  for (int i = from; i < mol.atom_count(); ++i) {
    if (need[i] == 1 && mate[i] < 0) {
      atom = i;
      break;
    }
  }
  if (atom < 0) return true;
  for (const auto& [nbr, bond] : mol.neighbors(atom)) {
    if (mol.bond(bond).order != BondOrder::Aromatic) continue;
    if (need[nbr] != 1 || mate[nbr] >= 0) continue;
    mate[atom] = nbr;
    mate[nbr] = atom;
    bond_double[bond] = true;
    if (match_needy(mol, need, mate, bond_double, atom + 1)) return true;
    bond_double[bond] = false;
    mate[atom] = -1;
    mate[nbr] = -1;
  }
  return false;
}

}  // namespace

Molecule kekulize(const Molecule& mol) {
  bool any_aromatic_bond = false;
  for (int i = 0; i < mol.bond_count(); ++i) {
    if (mol.bond(i).order == BondOrder::Aromatic) {
      any_aromatic_bond = true;
      break;
    }
  }
  std::vector<int> aromatic_degree(mol.atom_count(), 0);
  for (int i = 0; i < mol.bond_count(); ++i) {
    const Bond& bond = mol.bond(i);
    if (bond.order == BondOrder::Aromatic) {
      aromatic_degree[bond.a]++;
      aromatic_degree[bond.b]++;
    }
  }
  for (int i = 0; i < mol.atom_count(); ++i) {
    if (mol.atom(i).aromatic && aromatic_degree[i] == 0) {
      throw KekulizeError("aromatic atom " + std::to_string(i) +
                          " has no aromatic bonds, cannot kekulize");
    }
  }
  // Aromatic atoms without aromatic bonds were rejected above, so nothing is
  // left to rewrite.
  if (!any_aromatic_bond) return mol;

  std::vector<int> need(mol.atom_count(), 0);
  for (int i = 0; i < mol.atom_count(); ++i) need[i] = double_bond_need(mol, i);

  std::vector<int> mate(mol.atom_count(), -1);
  std::vector<bool> bond_double(mol.bond_count(), false);
  if (!match_needy(mol, need, mate, bond_double, 0)) {
    throw KekulizeError("no alternating single/double assignment exists");
  }

  std::vector<Atom> atoms;
  atoms.reserve(mol.atom_count());
  for (int i = 0; i < mol.atom_count(); ++i) {
    Atom atom = mol.atom(i);
    atom.aromatic = false;
    atom.explicit_h = mol.total_h(i);
    atom.h_specified = true;
    atoms.push_back(atom);
  }
  std::vector<Bond> bonds;
  bonds.reserve(mol.bond_count());
  for (int i = 0; i < mol.bond_count(); ++i) {
    Bond bond = mol.bond(i);
    if (bond.order == BondOrder::Aromatic) {
      bond.order = bond_double[i] ? BondOrder::Double : BondOrder::Single;
    }
    bonds.push_back(bond);
  }
  return Molecule::from_parts(std::move(atoms), std::move(bonds), false);
}

}  // namespace fp2mol
