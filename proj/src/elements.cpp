#include "fp2mol/elements.hpp"

#include <algorithm>
#include <array>
#include <unordered_map>

namespace fp2mol {

namespace {

const std::array<std::string, kMaxElement + 1> kSymbols = {
    "",   "H",  "He", "Li", "Be", "B",  "C",  "N",  "O",  "F",  "Ne", "Na",
    "Mg", "Al", "Si", "P",  "S",  "Cl", "Ar", "K",  "Ca", "Sc", "Ti", "V",
    "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn", "Ga", "Ge", "As", "Se", "Br",
    "Kr", "Rb", "Sr", "Y",  "Zr", "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag",
    "Cd", "In", "Sn", "Sb", "Te", "I",  "Xe", "Cs", "Ba", "La", "Ce", "Pr",
    "Nd", "Pm", "Sm", "Eu", "Gd", "Tb", "Dy", "Ho", "Er", "Tm", "Yb", "Lu",
    "Hf", "Ta", "W",  "Re", "Os", "Ir", "Pt", "Au", "Hg", "Tl", "Pb", "Bi",
    "Po", "At", "Rn", "Fr", "Ra", "Ac", "Th", "Pa", "U",  "Np", "Pu", "Am",
    "Cm", "Bk", "Cf", "Es", "Fm", "Md", "No", "Lr", "Rf", "Db", "Sg", "Bh",
    "Hs", "Mt", "Ds", "Rg", "Cn", "Nh", "Fl", "Mc", "Lv", "Ts", "Og"};

const std::unordered_map<std::string_view, int>& symbol_map() {
  static const std::unordered_map<std::string_view, int> map = [] {
    std::unordered_map<std::string_view, int> m;
    for (int z = 1; z <= kMaxElement; ++z) m.emplace(kSymbols[z], z);
    return m;
  }();
  return map;
}

}  // namespace

int element_from_symbol(std::string_view symbol) {
  auto it = symbol_map().find(symbol);
  return it == symbol_map().end() ? 0 : it->second;
}

const std::string& element_symbol(int atomic_number) {
  static const std::string empty;
  if (atomic_number < 1 || atomic_number > kMaxElement) return empty;
  return kSymbols[atomic_number];
}

bool is_organic_subset(int z) {
  switch (z) {
    case 5:   // B
    case 6:   // C
    case 7:   // N
    case 8:   // O
    case 15:  // P
    case 16:  // S
    case 9:   // F
    case 17:  // Cl
    case 35:  // Br
    case 53:  // I
      return true;
    default:
      return false;
  }
}

bool aromatic_allowed(int z) {
  switch (z) {
    case 5:   // B
    case 6:   // C
    case 7:   // N
    case 8:   // O
    case 15:  // P
    case 16:  // S
    case 34:  // Se
    case 33:  // As
      return true;
    default:
      return false;
  }
}

std::vector<int> default_valences(int z, int charge) {
  std::vector<int> base;
  int shift = 0;
  switch (z) {
    case 5:  // B: anions gain a bond ([BH4-])
      base = {3};
      shift = -charge;
      break;
    case 6:  // C: both C+ and C- are trivalent
      base = {4};
      shift = -std::abs(charge);
      break;
    case 7:
      base = {3};
      shift = charge;
      break;
    case 8:
      base = {2};
      shift = charge;
      break;
    case 15:
      base = {3, 5};
      shift = charge;
      break;
    case 16:
      base = {2, 4, 6};
      shift = charge;
      break;
    case 9:
    case 17:
    case 35:
    case 53:
      base = {1};
      shift = charge;
      break;
    default:
      return {};
  }
  std::vector<int> out;
  for (int v : base) {
    int adjusted = v + shift;
    if (adjusted >= 0) out.push_back(adjusted);
  }
  std::sort(out.begin(), out.end());
  return out;
}

int smallest_valence_at_least(int z, int charge, double bond_order_sum) {
  for (int v : default_valences(z, charge)) {
    if (static_cast<double>(v) >= bond_order_sum) return v;
  }
  return -1;
}

int max_valence(int z, int charge) {
  auto vals = default_valences(z, charge);
  return vals.empty() ? -1 : vals.back();
}

}  // namespace fp2mol
