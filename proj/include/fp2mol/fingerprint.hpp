#pragma once

#include <cstdint>
#include <vector>

#include "fp2mol/molgraph.hpp"

namespace fp2mol {

// Fixed-width binary fingerprint, bit i in blocks[i / 64] at position i % 64.
struct Fingerprint {
  int width = 0;
  std::vector<std::uint64_t> blocks;

  explicit Fingerprint(int width = 0)
      : width(width), blocks(static_cast<size_t>((width + 63) / 64), 0) {}

  bool test(int bit) const { return (blocks[bit >> 6] >> (bit & 63)) & 1; }
  void set(int bit) { blocks[bit >> 6] |= std::uint64_t{1} << (bit & 63); }
  int popcount() const;
};

struct ProbFingerprint {
  int width = 0;
  std::vector<double> probs;
};

// Ascending bit indices.
using OnBitSequence = std::vector<int>;

// Circular substructure fingerprint: per-atom invariants hashed and expanded
// over growing bond neighborhoods, folded to `width` bits.
Fingerprint morgan_fingerprint(const Molecule& mol, int radius = 2, int width = 4096);

// Environment identifiers before folding, sorted ascending with duplicates
// removed per the dedup rule (kept for every atom at radius 0, deduplicated
// by bond set at radius >= 1).
std::vector<std::uint64_t> morgan_environment_ids(const Molecule& mol, int radius = 2);

// |a & b| / |a | b|; 0.0 when both are empty. Throws on width mismatch.
double tanimoto(const Fingerprint& a, const Fingerprint& b);

// Indices with probability >= threshold (inclusive).
OnBitSequence threshold_onbits(const ProbFingerprint& fp, double threshold = 0.5);

OnBitSequence fingerprint_to_onbits(const Fingerprint& fp);

Fingerprint onbits_to_fingerprint(const OnBitSequence& onbits, int width);

}  // namespace fp2mol
