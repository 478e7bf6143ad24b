#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <vector>

#include "fp2mol/fingerprint.hpp"
#include "fp2mol/rng.hpp"
#include "fp2mol/smiles.hpp"

using namespace fp2mol;

namespace {

Molecule mol(const char* smiles) { return parse_smiles(smiles); }

std::vector<int> random_perm(int n, Rng& rng) {
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  rng.shuffle(p);
  return p;
}

Fingerprint random_fp(int width, Rng& rng) {
  Fingerprint f(width);
  const int bits = static_cast<int>(rng.below(static_cast<std::uint64_t>(width)));
  for (int i = 0; i < bits; ++i) f.set(static_cast<int>(rng.below(width)));
  return f;
}

}  // namespace

TEST_CASE("environment counts on hand-checked molecules") {
  // One atom, every radius sees the same empty bond set: one identifier.
  CHECK(morgan_fingerprint(mol("C")).popcount() == 1);
  // Two equivalent carbons share a radius-0 id, radii 1..2 cover the lone
  // bond and collapse: two identifiers.
  CHECK(morgan_fingerprint(mol("CC")).popcount() == 2);
  // Three distinct radius-0 atoms, two distinct one-bond neighborhoods and
  // the full chain: six identifiers.
  CHECK(morgan_fingerprint(mol("CCO")).popcount() == 6);
  // All carbons equivalent at every radius: three identifiers.
  CHECK(morgan_fingerprint(mol("c1ccccc1")).popcount() == 3);
}

TEST_CASE("defaults are radius 2, width 4096") {
  const Molecule m = mol("CCO");
  const Fingerprint d = morgan_fingerprint(m);
  CHECK(d.width == 4096);
  CHECK(d.blocks == morgan_fingerprint(m, 2, 4096).blocks);
}

TEST_CASE("fingerprints are deterministic and atom-order independent") {
  Rng rng(99);
  for (const char* s : {"CCO", "CC(=O)Oc1ccccc1C(=O)O", "c1ccncc1", "CN1CCN(C)CC1"}) {
    const Molecule m = mol(s);
    const Fingerprint f = morgan_fingerprint(m);
    CHECK(morgan_fingerprint(m).blocks == f.blocks);
    const auto ids = morgan_environment_ids(m);
    for (int trial = 0; trial < 20; ++trial) {
      const Molecule p = permute_atoms(m, random_perm(m.atom_count(), rng));
      CHECK(morgan_fingerprint(p).blocks == f.blocks);
      CHECK(morgan_environment_ids(p) == ids);
    }
  }
}

TEST_CASE("disjoint fragments contribute the union of their environments") {
  const auto a = morgan_environment_ids(mol("CCO"));
  const auto b = morgan_environment_ids(mol("CC"));
  const auto combined = morgan_environment_ids(mol("CCO.CC"));
  std::vector<std::uint64_t> expected;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(expected));
  CHECK(combined == expected);

  // Folded view: the union fingerprint is the OR of the parts.
  const Fingerprint fa = morgan_fingerprint(mol("CCO"));
  const Fingerprint fb = morgan_fingerprint(mol("CC"));
  const Fingerprint fu = morgan_fingerprint(mol("CCO.CC"));
  for (size_t i = 0; i < fu.blocks.size(); ++i) {
    CHECK(fu.blocks[i] == (fa.blocks[i] | fb.blocks[i]));
  }
}

TEST_CASE("tanimoto formula and conventions") {
  const Fingerprint a = onbits_to_fingerprint({1, 2}, 8);
  const Fingerprint b = onbits_to_fingerprint({2, 3}, 8);
  CHECK(tanimoto(a, b) == doctest::Approx(1.0 / 3.0));
  CHECK(tanimoto(a, a) == 1.0);
  CHECK(tanimoto(Fingerprint(8), Fingerprint(8)) == 0.0);  // empty vs empty earns nothing
  CHECK_THROWS_AS(tanimoto(Fingerprint(8), Fingerprint(16)), std::invalid_argument);

  const Fingerprint cc = morgan_fingerprint(mol("CC"));
  const Fingerprint cco = morgan_fingerprint(mol("CCO"));
  // The only shared environment is the terminal-carbon atom neighborhood.
  CHECK(tanimoto(cc, cco) == doctest::Approx(1.0 / 7.0).epsilon(1e-12));
}

TEST_CASE("tanimoto is symmetric and bounded") {
  Rng rng(4242);
  for (int trial = 0; trial < 200; ++trial) {
    const Fingerprint a = random_fp(64, rng);
    const Fingerprint b = random_fp(64, rng);
    const double t = tanimoto(a, b);
    CHECK(t == tanimoto(b, a));
    CHECK(t >= 0.0);
    CHECK(t <= 1.0);
    CHECK(tanimoto(a, a) == (a.popcount() > 0 ? 1.0 : 0.0));
  }
}

TEST_CASE("threshold boundary is inclusive") {
  const ProbFingerprint p{3, {0.2, 0.5, 0.9}};
  CHECK(threshold_onbits(p, 0.5) == OnBitSequence{1, 2});
  CHECK(threshold_onbits(p, 0.0) == OnBitSequence{0, 1, 2});
  CHECK(threshold_onbits(p, 1.0) == OnBitSequence{});
  const ProbFingerprint q{4, {1.0, 0.999999, 0.0, 1.0}};
  CHECK(threshold_onbits(q, 1.0) == OnBitSequence{0, 3});
}

TEST_CASE("onbit conversions round trip") {
  Fingerprint f(4096);
  f.set(0);
  f.set(4095);
  CHECK(fingerprint_to_onbits(f) == OnBitSequence{0, 4095});
  CHECK(onbits_to_fingerprint({0, 4095}, 4096).blocks == f.blocks);
  CHECK(fingerprint_to_onbits(Fingerprint(64)).empty());

  // A binary probability vector thresholds to exactly the set bits.
  const Fingerprint g = morgan_fingerprint(mol("CCO"), 2, 64);
  ProbFingerprint probs{64, std::vector<double>(64, 0.0)};
  for (int i = 0; i < 64; ++i) {
    if (g.test(i)) probs.probs[static_cast<size_t>(i)] = 1.0;
  }
  CHECK(threshold_onbits(probs, 0.5) == fingerprint_to_onbits(g));
}
