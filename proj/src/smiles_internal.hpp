#pragma once

#include <string>
#include <vector>

#include "fp2mol/molgraph.hpp"

namespace fp2mol::detail {

// Emits SMILES walking each fragment from its minimum-rank atom, visiting
// neighbors in ascending rank. Fragment strings are sorted lexicographically
// when sort_fragments is set, otherwise kept in min-rank order.
std::string write_in_order(const Molecule& mol, const std::vector<int>& ranks,
                           bool sort_fragments);

}  // namespace fp2mol::detail
