#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>
#include <set>

#include "fp2mol/elements.hpp"
#include "fp2mol/smiles.hpp"
#include "smiles_internal.hpp"

namespace fp2mol {
namespace {

bool lowercase_writable(int element) {
  return element == 5 || element == 6 || element == 7 || element == 8 || element == 15 ||
         element == 16;
}

// What a reader would assign to this atom written bare, given the bond
// orders that will appear in the output.
int reader_implicit_h(const Molecule& mol, int index) {
  const int occupied = static_cast<int>(std::floor(mol.bond_order_sum(index)));
  const int valence = smallest_valence_at_least(mol.atom(index).element, 0, occupied);
  if (valence < 0) return 0;
  return std::max(0, valence - occupied);
}

bool needs_bracket(const Molecule& mol, int index) {
  const Atom& atom = mol.atom(index);
  if (!is_organic_subset(atom.element)) return true;
  if (atom.isotope != 0 || atom.formal_charge != 0) return true;
  if (atom.aromatic && !lowercase_writable(atom.element)) return true;
  if (reader_implicit_h(mol, index) != mol.total_h(index)) return true;
  return false;
}

std::string atom_token(const Molecule& mol, int index) {
  const Atom& atom = mol.atom(index);
  std::string symbol = element_symbol(atom.element);
  if (atom.aromatic) {
    for (char& c : symbol) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  if (!needs_bracket(mol, index)) return symbol;

  std::string out = "[";
  if (atom.isotope != 0) out += std::to_string(atom.isotope);
  out += symbol;
  const int h = mol.total_h(index);
  if (h > 0) {
    out += 'H';
    if (h > 1) out += std::to_string(h);
  }
  const int q = atom.formal_charge;
  if (q != 0) {
    out += q > 0 ? '+' : '-';
    if (std::abs(q) > 1) out += std::to_string(std::abs(q));
  }
  out += ']';
  return out;
}

// Empty when the reader's default (aromatic between two aromatic atoms,
// single otherwise) already reproduces the order.
std::string bond_token(const Molecule& mol, int bond_index) {
  const Bond& bond = mol.bond(bond_index);
  const bool both_aromatic = mol.atom(bond.a).aromatic && mol.atom(bond.b).aromatic;
  const BondOrder fallback = both_aromatic ? BondOrder::Aromatic : BondOrder::Single;
  if (bond.order == fallback) return "";
  switch (bond.order) {
    case BondOrder::Single:
      return "-";
    case BondOrder::Double:
      return "=";
    case BondOrder::Triple:
      return "#";
    case BondOrder::Aromatic:
      return ":";
  }
  return "";
}

struct RingDigit {
  int partner;
  int bond;
  int digit;
};

class Emitter {
 public:
  Emitter(const Molecule& mol, const std::vector<int>& ranks) : mol_(mol), ranks_(ranks) {
    visited_.assign(mol.atom_count(), false);
    visit_pos_.assign(mol.atom_count(), -1);
    parent_.assign(mol.atom_count(), -1);
    parent_bond_.assign(mol.atom_count(), -1);
    children_.assign(mol.atom_count(), {});
    opens_.assign(mol.atom_count(), {});
    closes_.assign(mol.atom_count(), {});
  }

  std::string fragment(int start) {
    plan(start);
    assign_digits();
    std::string out;
    emit(start, out);
    return out;
  }

 private:
  std::vector<int> ordered_neighbors(int atom) const {
    std::vector<int> order;
    const auto& nbrs = mol_.neighbors(atom);
    order.resize(nbrs.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
      return ranks_[nbrs[x].first] < ranks_[nbrs[y].first];
    });
    return order;
  }

  void plan(int start) {
    order_.clear();
    struct Entry {
      int atom;
      int via_bond;
      int from;
    };
    std::vector<Entry> stack;
    stack.push_back({start, -1, -1});
    while (!stack.empty()) {
      const Entry entry = stack.back();
      stack.pop_back();
      if (visited_[entry.atom]) {
        // The atom was reached through another path after this push; the
        // pushing bond is a ring closure. The pushing side was visited first.
        if (entry.via_bond >= 0 && closure_seen_.insert(entry.via_bond).second) {
          opens_[entry.from].push_back({entry.atom, entry.via_bond, -1});
          closes_[entry.atom].push_back({entry.from, entry.via_bond, -1});
        }
        continue;
      }
      const int atom = entry.atom;
      visited_[atom] = true;
      visit_pos_[atom] = static_cast<int>(order_.size());
      order_.push_back(atom);
      parent_[atom] = entry.from;
      parent_bond_[atom] = entry.via_bond;
      if (parent_[atom] >= 0) children_[parent_[atom]].push_back(atom);

      const auto& nbrs = mol_.neighbors(atom);
      const std::vector<int> by_rank = ordered_neighbors(atom);
      // Push in reverse so the lowest-rank neighbor is visited first.
      for (auto it = by_rank.rbegin(); it != by_rank.rend(); ++it) {
        const int nbr = nbrs[*it].first;
        const int bond = nbrs[*it].second;
        if (bond == parent_bond_[atom]) continue;
        if (visited_[nbr]) {
          if (!closure_seen_.insert(bond).second) continue;
          opens_[nbr].push_back({atom, bond, -1});
          closes_[atom].push_back({nbr, bond, -1});
        } else {
          stack.push_back({nbr, bond, atom});
        }
      }
    }
    for (int atom : order_) {
      auto by_partner = [&](const RingDigit& x, const RingDigit& y) {
        return visit_pos_[x.partner] < visit_pos_[y.partner];
      };
      std::sort(opens_[atom].begin(), opens_[atom].end(), by_partner);
      std::sort(closes_[atom].begin(), closes_[atom].end(), by_partner);
    }
  }

  void assign_digits() {
    std::set<int> free_digits;
    for (int d = 1; d < 100; ++d) free_digits.insert(d);
    std::vector<int> digit_of_bond(mol_.bond_count(), -1);
    for (int atom : order_) {
      for (RingDigit& close : closes_[atom]) {
        close.digit = digit_of_bond[close.bond];
        free_digits.insert(close.digit);
      }
      for (RingDigit& open : opens_[atom]) {
        if (free_digits.empty()) throw std::runtime_error("ring closure digits exhausted");
        open.digit = *free_digits.begin();
        free_digits.erase(free_digits.begin());
        digit_of_bond[open.bond] = open.digit;
      }
    }
  }

  static std::string digit_token(int digit) {
    if (digit < 10) return std::to_string(digit);
    return "%" + std::to_string(digit);
  }

  void emit(int root, std::string& out) {
    struct Frame {
      int atom;
      size_t child = 0;
      bool opened_paren = false;
    };
    std::vector<Frame> stack;
    stack.push_back({root});
    emit_atom(root, out);
    while (!stack.empty()) {
      Frame& frame = stack.back();
      const auto& kids = children_[frame.atom];
      if (frame.child >= kids.size()) {
        stack.pop_back();
        if (frame.opened_paren) out += ')';
        continue;
      }
      const int child = kids[frame.child];
      const bool last = frame.child + 1 == kids.size();
      ++frame.child;
      Frame next{child};
      if (!last) {
        out += '(';
        next.opened_paren = true;
      }
      out += bond_token(mol_, parent_bond_[child]);
      emit_atom(child, out);
      stack.push_back(next);
    }
  }

  void emit_atom(int atom, std::string& out) {
    out += atom_token(mol_, atom);
    for (const RingDigit& close : closes_[atom]) {
      out += digit_token(close.digit);
    }
    for (const RingDigit& open : opens_[atom]) {
      out += bond_token(mol_, open.bond);
      out += digit_token(open.digit);
    }
  }

  const Molecule& mol_;
  const std::vector<int>& ranks_;
  std::vector<bool> visited_;
  std::vector<int> visit_pos_;
  std::vector<int> parent_;
  std::vector<int> parent_bond_;
  std::vector<std::vector<int>> children_;
  std::vector<std::vector<RingDigit>> opens_;
  std::vector<std::vector<RingDigit>> closes_;
  std::vector<int> order_;
  std::set<int> closure_seen_;
};

}  // namespace

namespace detail {

std::string write_in_order(const Molecule& mol, const std::vector<int>& ranks,
                           bool sort_fragments) {
  if (mol.atom_count() == 0) return "";
  Emitter emitter(mol, ranks);
  std::vector<int> starts(mol.component_count(), -1);
  for (int i = 0; i < mol.atom_count(); ++i) {
    int& start = starts[mol.component_of()[i]];
    if (start < 0 || ranks[i] < ranks[start]) start = i;
  }
  std::sort(starts.begin(), starts.end(),
            [&](int x, int y) { return ranks[x] < ranks[y]; });
  std::vector<std::string> fragments;
  fragments.reserve(starts.size());
  for (int start : starts) fragments.push_back(emitter.fragment(start));
  if (sort_fragments) std::sort(fragments.begin(), fragments.end());
  std::string out;
  for (size_t i = 0; i < fragments.size(); ++i) {
    if (i > 0) out += '.';
    out += fragments[i];
  }
  return out;
}

}  // namespace detail

std::string write_smiles(const Molecule& mol, bool canonical) {
  WriteOptions options;
  options.canonical = canonical;
  return write_smiles(mol, options);
}

std::string write_smiles(const Molecule& mol, const WriteOptions& options) {
  if (!options.canonical) {
    std::vector<int> identity(static_cast<size_t>(mol.atom_count()));
    std::iota(identity.begin(), identity.end(), 0);
    const Molecule* source = &mol;
    Molecule kek;
    if (options.kekulize) {
      kek = kekulize(mol);
      source = &kek;
    }
    return detail::write_in_order(*source, identity, false);
  }
  const std::vector<int> ranks = canonical_ranks(mol);
  // Reorder before kekulizing so the double-bond assignment depends only on
  // the canonical form, not on input atom order.
  Molecule ordered = permute_atoms(mol, ranks);
  if (options.kekulize) ordered = kekulize(ordered);
  std::vector<int> identity(static_cast<size_t>(ordered.atom_count()));
  std::iota(identity.begin(), identity.end(), 0);
  return detail::write_in_order(ordered, identity, true);
}

}  // namespace fp2mol
