#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <tuple>
#include <vector>

#include "fp2mol/molgraph.hpp"

namespace fp2mol {

namespace {

using AtomKey = std::tuple<int, int, int, bool, int, int>;

AtomKey atom_key(const Molecule& m, int i) {
  const Atom& a = m.atom(i);
  return {a.element, a.formal_charge, a.isotope, a.aromatic, m.total_h(i),
          static_cast<int>(m.neighbors(i).size())};
}

// Joint iterative refinement: both molecules share one label dictionary so
// classes are directly comparable. Returns per-atom labels, or empty vectors
// when the label multisets diverge (not isomorphic).
bool refine_labels(const Molecule& a, const Molecule& b, std::vector<int>& la,
                   std::vector<int>& lb) {
  const int n = a.atom_count();
  {
    std::map<AtomKey, int> dict;
    la.resize(n);
    lb.resize(n);
    for (int i = 0; i < n; ++i) la[i] = dict.emplace(atom_key(a, i), (int)dict.size()).first->second;
    for (int i = 0; i < n; ++i) lb[i] = dict.emplace(atom_key(b, i), (int)dict.size()).first->second;
  }
  auto histograms_match = [&]() {
    std::vector<int> ha(la), hb(lb);
    std::sort(ha.begin(), ha.end());
    std::sort(hb.begin(), hb.end());
    return ha == hb;
  };
  if (!histograms_match()) return false;

  using Signature = std::pair<int, std::vector<std::pair<int, int>>>;
  for (int round = 0; round < n; ++round) {
    std::map<Signature, int> dict;
    auto signature = [](const Molecule& m, const std::vector<int>& labels, int i) {
      Signature sig;
      sig.first = labels[i];
      for (const auto& [nbr, bidx] : m.neighbors(i)) {
        sig.second.emplace_back(static_cast<int>(m.bond(bidx).order), labels[nbr]);
      }
      std::sort(sig.second.begin(), sig.second.end());
      return sig;
    };
    std::vector<int> na(n), nb(n);
    for (int i = 0; i < n; ++i) na[i] = dict.emplace(signature(a, la, i), (int)dict.size()).first->second;
    for (int i = 0; i < n; ++i) nb[i] = dict.emplace(signature(b, lb, i), (int)dict.size()).first->second;
    bool stable = std::equal(na.begin(), na.end(), la.begin()) &&
                  std::equal(nb.begin(), nb.end(), lb.begin());
    la.swap(na);
    lb.swap(nb);
    if (!histograms_match()) return false;
    if (stable) break;
  }
  return true;
}

struct Matcher {
  const Molecule& a;
  const Molecule& b;
  const std::vector<int>& la;
  const std::vector<int>& lb;
  std::vector<int> map_ab;
  std::vector<int> map_ba;
  std::vector<int> order;  // a-atoms, most constrained first

  bool feasible(int ai, int bj) const {
    if (la[ai] != lb[bj]) return false;
    int mapped_a = 0, mapped_b = 0;
    for (const auto& [nbr, bidx] : a.neighbors(ai)) {
      if (map_ab[nbr] < 0) continue;
      ++mapped_a;
      int want = b.bond_between(map_ab[nbr], bj);
      if (want < 0 || b.bond(want).order != a.bond(bidx).order) return false;
    }
    for (const auto& [nbr, bidx] : b.neighbors(bj)) {
      if (map_ba[nbr] >= 0) ++mapped_b;
    }
    return mapped_a == mapped_b;
  }

  bool search(size_t pos) {
    if (pos == order.size()) return true;
    int ai = order[pos];
    for (int bj = 0; bj < b.atom_count(); ++bj) {
      if (map_ba[bj] >= 0 || !feasible(ai, bj)) continue;
      map_ab[ai] = bj;
      map_ba[bj] = ai;
      if (search(pos + 1)) return true;
      map_ab[ai] = -1;
      map_ba[bj] = -1;
    }
    return false;
  }
};

}  // namespace

bool graphs_isomorphic(const Molecule& a, const Molecule& b) {
  if (a.atom_count() != b.atom_count() || a.bond_count() != b.bond_count())
    return false;
  if (a.atom_count() == 0) return true;

  std::vector<int> la, lb;
  if (!refine_labels(a, b, la, lb)) return false;

  // Class sizes, for a most-constrained-first visit order.
  std::map<int, int> class_size;
  for (int l : la) ++class_size[l];

  Matcher matcher{a, b, la, lb,
                  std::vector<int>(a.atom_count(), -1),
                  std::vector<int>(b.atom_count(), -1),
                  {}};
  matcher.order.resize(a.atom_count());
  std::iota(matcher.order.begin(), matcher.order.end(), 0);

  // BFS-like ordering keeps the partial mapping connected where possible,
  // preferring rare classes and high degree.
  std::vector<int> rank(a.atom_count(), -1);
  std::vector<int> pending = matcher.order;
  std::vector<int> result;
  auto better = [&](int x, int y) {
    int cx = class_size[la[x]], cy = class_size[la[y]];
    if (cx != cy) return cx < cy;
    auto dx = a.neighbors(x).size(), dy = a.neighbors(y).size();
    if (dx != dy) return dx > dy;
    return x < y;
  };
  std::vector<bool> chosen(a.atom_count(), false), frontier(a.atom_count(), false);
  for (int step = 0; step < a.atom_count(); ++step) {
    int best = -1;
    for (int i = 0; i < a.atom_count(); ++i) {
      if (chosen[i]) continue;
      if (best < 0) { best = i; continue; }
      if (frontier[i] != frontier[best]) {
        if (frontier[i]) best = i;
        continue;
      }
      if (better(i, best)) best = i;
    }
    chosen[best] = true;
    frontier[best] = false;
    result.push_back(best);
    for (const auto& [nbr, bidx] : a.neighbors(best)) {
      if (!chosen[nbr]) frontier[nbr] = true;
    }
  }
  matcher.order = result;
  return matcher.search(0);
}

}  // namespace fp2mol
