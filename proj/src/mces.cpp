#include <algorithm>
#include <bit>
#include <cstdint>
#include <map>
#include <tuple>

#include "fp2mol/mces.hpp"
#include "fp2mol/smiles.hpp"

namespace fp2mol {
namespace {

using Clock = std::chrono::steady_clock;

struct Edge {
  int a;
  int b;
  int label;  // dense index into a shared label table
};

struct EdgeGraph {
  int atom_count = 0;
  std::vector<Edge> edges;
  std::vector<int> elements;
};

using RawLabel = std::tuple<int, int, int>;  // low element, high element, order code

// Heavy-atom edge list with comparable labels. StrictOrder kekulizes first so
// aromatic rings compare by their alternating pattern when one side was drawn
// Kekule style; graphs that cannot kekulize keep aromatic orders, which then
// only match aromatic.
EdgeGraph project(const Molecule& mol, const McesConfig& config,
                  std::map<RawLabel, int>& label_table) {
  const Molecule* source = &mol;
  Molecule kek;
  if (config.bond_match == BondMatch::StrictOrder) {
    try {
      kek = kekulize(mol);
      source = &kek;
    } catch (const KekulizeError&) {
    }
  }
  EdgeGraph graph;
  graph.atom_count = source->atom_count();
  graph.elements.reserve(graph.atom_count);
  for (int i = 0; i < source->atom_count(); ++i) {
    graph.elements.push_back(source->atom(i).element);
  }
  for (int i = 0; i < source->bond_count(); ++i) {
    const Bond& bond = source->bond(i);
    const int ea = graph.elements[bond.a];
    const int eb = graph.elements[bond.b];
    const int order =
        config.bond_match == BondMatch::AnyOrder ? 0 : static_cast<int>(bond.order);
    const RawLabel raw{std::min(ea, eb), std::max(ea, eb), order};
    auto [it, inserted] = label_table.emplace(raw, static_cast<int>(label_table.size()));
    graph.edges.push_back({bond.a, bond.b, it->second});
  }
  return graph;
}

int label_overlap(const EdgeGraph& g1, const EdgeGraph& g2, int label_count) {
  std::vector<int> c1(label_count, 0);
  std::vector<int> c2(label_count, 0);
  for (const Edge& e : g1.edges) c1[e.label]++;
  for (const Edge& e : g2.edges) c2[e.label]++;
  int total = 0;
  for (int i = 0; i < label_count; ++i) total += std::min(c1[i], c2[i]);
  return total;
}

class Search {
 public:
  Search(const EdgeGraph& g1, const EdgeGraph& g2, int label_count, Clock::time_point deadline)
      : g1_(g1), g2_(g2), deadline_(deadline) {
    map1_.assign(g1.atom_count, -1);
    map2_.assign(g2.atom_count, -1);
    used2_.assign(g2.edges.size(), false);
    avail2_.assign(label_count, 0);
    for (const Edge& e : g2.edges) avail2_[e.label]++;
    // Per-suffix label counts of g1 let the bound drop as edges are passed.
    suffix_.assign(g1.edges.size() + 1, std::vector<int>(label_count, 0));
    for (int i = static_cast<int>(g1.edges.size()) - 1; i >= 0; --i) {
      suffix_[i] = suffix_[i + 1];
      suffix_[i][g1.edges[i].label]++;
    }
  }

  // Best common edge count found; sets completed() false on timeout.
  int run() {
    best_ = 0;
    complete_ = true;
    recurse(0, 0);
    return best_;
  }

  bool completed() const { return complete_; }

 private:
  int remaining_bound(int index) const {
    int total = 0;
    const std::vector<int>& suffix = suffix_[index];
    for (size_t label = 0; label < suffix.size(); ++label) {
      total += std::min(suffix[label], avail2_[label]);
    }
    return total;
  }

  void recurse(int index, int common) {
    if (!complete_) return;
    if (++ticks_ % 1024 == 0 && Clock::now() > deadline_) {
      complete_ = false;
      return;
    }
    best_ = std::max(best_, common);
    if (index >= static_cast<int>(g1_.edges.size())) return;
    if (common + remaining_bound(index) <= best_) return;

    const Edge& e1 = g1_.edges[index];
    for (size_t j = 0; j < g2_.edges.size(); ++j) {
      if (used2_[j]) continue;
      const Edge& e2 = g2_.edges[j];
      if (e2.label != e1.label) continue;
      try_orientation(index, common, j, e2.a, e2.b);
      try_orientation(index, common, j, e2.b, e2.a);
    }
    recurse(index + 1, common);
  }

  void try_orientation(int index, int common, size_t j, int to_a, int to_b) {
    const Edge& e1 = g1_.edges[index];
    if (g1_.elements[e1.a] != g2_.elements[to_a]) return;
    if (g1_.elements[e1.b] != g2_.elements[to_b]) return;
    if (map1_[e1.a] != -1 && map1_[e1.a] != to_a) return;
    if (map1_[e1.b] != -1 && map1_[e1.b] != to_b) return;
    if (map2_[to_a] != -1 && map2_[to_a] != e1.a) return;
    if (map2_[to_b] != -1 && map2_[to_b] != e1.b) return;

    const bool bind_a = map1_[e1.a] == -1;
    const bool bind_b = map1_[e1.b] == -1;
    if (bind_a) {
      map1_[e1.a] = to_a;
      map2_[to_a] = e1.a;
    }
    if (bind_b) {
      map1_[e1.b] = to_b;
      map2_[to_b] = e1.b;
    }
    used2_[j] = true;
    avail2_[g2_.edges[j].label]--;
    recurse(index + 1, common + 1);
    avail2_[g2_.edges[j].label]++;
    used2_[j] = false;
    if (bind_b) {
      map2_[to_b] = -1;
      map1_[e1.b] = -1;
    }
    if (bind_a) {
      map2_[to_a] = -1;
      map1_[e1.a] = -1;
    }
  }

  const EdgeGraph& g1_;
  const EdgeGraph& g2_;
  Clock::time_point deadline_;
  std::vector<int> map1_;
  std::vector<int> map2_;
  std::vector<bool> used2_;
  std::vector<int> avail2_;
  std::vector<std::vector<int>> suffix_;
  int best_ = 0;
  bool complete_ = true;
  std::uint64_t ticks_ = 0;
};

}  // namespace

McesResult mces_distance(const Molecule& a, const Molecule& b, const McesConfig& config) {
  const auto start = Clock::now();
  std::map<RawLabel, int> labels;
  EdgeGraph g1 = project(a, config, labels);
  EdgeGraph g2 = project(b, config, labels);
  // Searching from the smaller edge set keeps the recursion shallow.
  const bool swapped = g1.edges.size() > g2.edges.size();
  if (swapped) std::swap(g1, g2);

  const auto deadline = start + std::chrono::duration_cast<Clock::duration>(config.time_budget);
  Search search(g1, g2, static_cast<int>(labels.size()), deadline);
  const int common = search.run();

  McesResult result;
  result.common_edges = common;
  result.distance =
      static_cast<int>(g1.edges.size()) + static_cast<int>(g2.edges.size()) - 2 * common;
  result.exact = search.completed() && a.atom_count() <= config.max_nodes_exact &&
                 b.atom_count() <= config.max_nodes_exact;
  result.elapsed = Clock::now() - start;
  return result;
}

int mces_lower_bound(const Molecule& a, const Molecule& b, const McesConfig& config) {
  std::map<RawLabel, int> labels;
  const EdgeGraph g1 = project(a, config, labels);
  const EdgeGraph g2 = project(b, config, labels);
  const int overlap = label_overlap(g1, g2, static_cast<int>(labels.size()));
  return static_cast<int>(g1.edges.size()) + static_cast<int>(g2.edges.size()) - 2 * overlap;
}

namespace {

// Can `subset` (edge indices of g1) be embedded into g2 edge-injectively with
// a consistent vertex map? Plain backtracking, no bounds.
bool embed(const std::vector<int>& subset, size_t pos, const EdgeGraph& g1, const EdgeGraph& g2,
           std::vector<int>& vmap, std::vector<int>& vmap_back, std::vector<bool>& taken) {
  if (pos == subset.size()) return true;
  const Edge& e1 = g1.edges[subset[pos]];
  for (size_t j = 0; j < g2.edges.size(); ++j) {
    if (taken[j]) continue;
    const Edge& e2 = g2.edges[j];
    if (e2.label != e1.label) continue;
    const std::pair<int, int> ends[2] = {{e2.a, e2.b}, {e2.b, e2.a}};
    for (const auto& [ta, tb] : ends) {
      if (g1.elements[e1.a] != g2.elements[ta] || g1.elements[e1.b] != g2.elements[tb]) continue;
      if (vmap[e1.a] != -1 && vmap[e1.a] != ta) continue;
      if (vmap[e1.b] != -1 && vmap[e1.b] != tb) continue;
      if (vmap_back[ta] != -1 && vmap_back[ta] != e1.a) continue;
      if (vmap_back[tb] != -1 && vmap_back[tb] != e1.b) continue;
      const bool bind_a = vmap[e1.a] == -1;
      const bool bind_b = vmap[e1.b] == -1;
      if (bind_a) {
        vmap[e1.a] = ta;
        vmap_back[ta] = e1.a;
      }
      if (bind_b) {
        vmap[e1.b] = tb;
        vmap_back[tb] = e1.b;
      }
      taken[j] = true;
      if (embed(subset, pos + 1, g1, g2, vmap, vmap_back, taken)) return true;
      taken[j] = false;
      if (bind_b) {
        vmap_back[tb] = -1;
        vmap[e1.b] = -1;
      }
      if (bind_a) {
        vmap_back[ta] = -1;
        vmap[e1.a] = -1;
      }
    }
  }
  return false;
}

}  // namespace

McesResult mces_oracle(const Molecule& a, const Molecule& b, const McesConfig& config) {
  const auto start = Clock::now();
  std::map<RawLabel, int> labels;
  EdgeGraph g1 = project(a, config, labels);
  EdgeGraph g2 = project(b, config, labels);
  if (g1.edges.size() > 10 || g2.edges.size() > 10) {
    throw std::invalid_argument("mces_oracle is limited to 10 bonds per molecule");
  }
  if (g1.edges.size() > g2.edges.size()) std::swap(g1, g2);

  const int m = static_cast<int>(g1.edges.size());
  std::vector<std::vector<int>> subsets_by_size(static_cast<size_t>(m) + 1);
  for (int mask = 0; mask < (1 << m); ++mask) {
    subsets_by_size[static_cast<size_t>(std::popcount(static_cast<unsigned>(mask)))].push_back(
        mask);
  }

  int best = 0;
  for (int size = m; size >= 1 && best == 0; --size) {
    for (int mask : subsets_by_size[static_cast<size_t>(size)]) {
      std::vector<int> subset;
      for (int i = 0; i < m; ++i) {
        if (mask & (1 << i)) subset.push_back(i);
      }
      std::vector<int> vmap(g1.atom_count, -1);
      std::vector<int> vmap_back(g2.atom_count, -1);
      std::vector<bool> taken(g2.edges.size(), false);
      if (embed(subset, 0, g1, g2, vmap, vmap_back, taken)) {
        best = size;
        break;
      }
    }
  }

  McesResult result;
  result.common_edges = best;
  result.distance =
      static_cast<int>(g1.edges.size()) + static_cast<int>(g2.edges.size()) - 2 * best;
  result.exact = true;
  result.elapsed = Clock::now() - start;
  return result;
}

}  // namespace fp2mol
