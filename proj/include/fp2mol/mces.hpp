#pragma once

#include <chrono>

#include "fp2mol/molgraph.hpp"

namespace fp2mol {

enum class BondMatch {
  // Orders must agree after kekulization; aromatic matches aromatic when a
  // graph cannot be kekulized.
  StrictOrder,
  // Any bond pairs with any bond as long as the elements agree.
  AnyOrder,
};

struct McesConfig {
  BondMatch bond_match = BondMatch::StrictOrder;
  // Above this many heavy atoms on either side the result is reported as
  // inexact even when the search finishes.
  int max_nodes_exact = 20;
  std::chrono::duration<double> time_budget = std::chrono::seconds(5);
};

struct McesResult {
  // |E1| + |E2| - 2 * common edge count; an upper bound when !exact.
  int distance = 0;
  int common_edges = 0;
  bool exact = false;
  std::chrono::duration<double> elapsed{0};
};

// Maximum common (possibly disconnected) edge subgraph distance by
// branch-and-bound over edge pairings with a consistent vertex map.
McesResult mces_distance(const Molecule& a, const Molecule& b, const McesConfig& config = {});

// Label-multiset bound: |E1| + |E2| - 2 * sum over labels of
// min(count1, count2), where a label is (sorted endpoint elements, order
// under the bond-match policy). Never exceeds the true distance.
int mces_lower_bound(const Molecule& a, const Molecule& b, const McesConfig& config = {});

// Exhaustive reference: descending-size enumeration of edge subsets of the
// smaller graph with backtracking embedding into the other. Throws
// std::invalid_argument when either side has more than 10 bonds.
McesResult mces_oracle(const Molecule& a, const Molecule& b, const McesConfig& config = {});

}  // namespace fp2mol
