#include <algorithm>
#include <map>
#include <numeric>
#include <optional>

#include "fp2mol/smiles.hpp"
#include "smiles_internal.hpp"

namespace fp2mol {
namespace {

// Dense relabel: equal keys share a label, label order follows key order so
// values do not depend on atom input order.
template <typename Key>
std::vector<int> dense_ranks(const std::vector<Key>& keys, int* classes) {
  std::map<Key, int> index;
  for (const Key& key : keys) index.emplace(key, 0);
  int next = 0;
  for (auto& [key, label] : index) label = next++;
  std::vector<int> labels(keys.size());
  for (size_t i = 0; i < keys.size(); ++i) labels[i] = index[keys[i]];
  if (classes != nullptr) *classes = next;
  return labels;
}

std::vector<int> initial_labels(const Molecule& mol, int* classes) {
  using Key = std::tuple<int, int, int, bool, int, int, bool>;
  std::vector<Key> keys;
  keys.reserve(mol.atom_count());
  for (int i = 0; i < mol.atom_count(); ++i) {
    const Atom& atom = mol.atom(i);
    keys.push_back({atom.element, atom.formal_charge, atom.isotope, atom.aromatic,
                    mol.total_h(i), mol.heavy_degree(i), mol.atom_in_ring(i)});
  }
  return dense_ranks(keys, classes);
}

std::vector<int> refine(const Molecule& mol, std::vector<int> labels, int classes) {
  using Sig = std::pair<int, std::vector<std::pair<int, int>>>;
  while (true) {
    std::vector<Sig> sigs(labels.size());
    for (int i = 0; i < mol.atom_count(); ++i) {
      std::vector<std::pair<int, int>> nbrs;
      for (const auto& [nbr, bond] : mol.neighbors(i)) {
        nbrs.push_back({labels[nbr], static_cast<int>(mol.bond(bond).order)});
      }
      std::sort(nbrs.begin(), nbrs.end());
      sigs[i] = {labels[i], std::move(nbrs)};
    }
    int new_classes = 0;
    std::vector<int> next = dense_ranks(sigs, &new_classes);
    if (new_classes == classes) return next;
    labels = std::move(next);
    classes = new_classes;
  }
}

int count_classes(const std::vector<int>& labels) {
  return labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
}

struct Winner {
  std::string smiles;
  std::vector<int> ranks;
};

void search(const Molecule& mol, std::vector<int> labels, std::optional<Winner>& best) {
  labels = refine(mol, std::move(labels), count_classes(labels));
  const int classes = count_classes(labels);
  const int n = mol.atom_count();

  if (classes == n) {
    std::string smiles = detail::write_in_order(mol, labels, true);
    if (!best || smiles < best->smiles) best = Winner{std::move(smiles), std::move(labels)};
    return;
  }

  // Branch on the lowest-label cell that still holds several atoms.
  std::vector<int> cell_size(classes, 0);
  for (int label : labels) cell_size[label]++;
  int target = -1;
  for (int label = 0; label < classes; ++label) {
    if (cell_size[label] > 1) {
      target = label;
      break;
    }
  }
  for (int x = 0; x < n; ++x) {
    if (labels[x] != target) continue;
    std::vector<int> child(labels.size());
    for (int i = 0; i < n; ++i) child[i] = labels[i] * 2 + (i == x ? 0 : 1);
    search(mol, std::move(child), best);
  }
}

}  // namespace

std::vector<int> canonical_ranks(const Molecule& mol) {
  if (mol.atom_count() == 0) return {};
  int classes = 0;
  std::vector<int> labels = initial_labels(mol, &classes);
  std::optional<Winner> best;
  search(mol, std::move(labels), best);
  return best->ranks;
}

}  // namespace fp2mol
