#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace fp2mol {

// Periodic-table data needed for SMILES handling: symbol lookup,
// organic-subset membership, aromaticity eligibility and default valences.

inline constexpr int kMaxElement = 118;

// Atomic number for an element symbol ("C", "Cl", ...). Returns 0 if unknown.
int element_from_symbol(std::string_view symbol);

// Symbol for an atomic number. Empty string if out of range.
const std::string& element_symbol(int atomic_number);

// B, C, N, O, P, S, F, Cl, Br, I: atoms that may be written bare in SMILES
// and receive implicit hydrogens.
bool is_organic_subset(int atomic_number);

// Elements allowed to carry the aromatic flag: B, C, N, O, P, S, Se, As.
bool aromatic_allowed(int atomic_number);

// Default valence list for an element adjusted by formal charge, smallest
// first. Empty for elements outside the fixed valence table
// {B:3, C:4, N:3, O:2, P:3/5, S:2/4/6, halogens:1}.
std::vector<int> default_valences(int atomic_number, int formal_charge);

// Smallest table valence >= bond_order_sum, or -1 when the element has no
// table entry or every valence is exceeded.
int smallest_valence_at_least(int atomic_number, int formal_charge, double bond_order_sum);

// Largest table valence for the element/charge, or -1 without a table entry.
int max_valence(int atomic_number, int formal_charge);

}  // namespace fp2mol
