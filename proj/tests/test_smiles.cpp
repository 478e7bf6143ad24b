#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numeric>
#include <string>
#include <vector>

#include "fp2mol/molgraph.hpp"
#include "fp2mol/rng.hpp"
#include "fp2mol/smiles.hpp"

using namespace fp2mol;

namespace {

// A spread of features: branches, fused and spiro rings, heteroaromatics,
// charges, isotopes, multiple fragments.
const std::vector<std::string> kMolecules = {
    "CCO",
    "CC(C)C",
    "c1ccccc1",
    "c1ccncc1",
    "CC(=O)Oc1ccccc1C(=O)O",
    "[NH4+]",
    "CC(=O)[O-]",
    "C1CC1C2CC2",
    "c1ccc2ccccc2c1",
    "CN1CCN(C)CC1",
    "C1=CC=CS1",
    "OC(=O)c1ccc(N)cc1",
    "CC(=O)[O-].[NH4+]",
    "[13CH4]",
    "N#Cc1ccccc1",
};

std::vector<int> random_perm(int n, Rng& rng) {
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  rng.shuffle(p);
  return p;
}

}  // namespace

TEST_CASE("organic subset parsing") {
  const Molecule ethane = parse_smiles("CC");
  CHECK(ethane.atom_count() == 2);
  CHECK(ethane.bond_count() == 1);
  CHECK(ethane.bond(0).order == BondOrder::Single);
  CHECK(ethane.implicit_h(0) == 3);

  const Molecule benzene = parse_smiles("c1ccccc1");
  CHECK(benzene.atom_count() == 6);
  CHECK(benzene.bond_count() == 6);
  for (int i = 0; i < 6; ++i) {
    CHECK(benzene.atom(i).aromatic);
    CHECK(benzene.bond(i).order == BondOrder::Aromatic);
  }
  CHECK(benzene.rings().size() == 1);

  CHECK(parse_smiles("C#N").bond(0).order == BondOrder::Triple);
  CHECK(parse_smiles("C=C").bond(0).order == BondOrder::Double);
}

TEST_CASE("ring closures, branches and fragments") {
  CHECK(graphs_isomorphic(parse_smiles("C%10CCCCC%10"), parse_smiles("C1CCCCC1")));
  CHECK(graphs_isomorphic(parse_smiles("CC(C)C"), parse_smiles("C(C)(C)C")));
  const Molecule frag = parse_smiles("CCO.CC");
  CHECK(frag.atom_count() == 5);
  CHECK(frag.component_count() == 2);
}

TEST_CASE("parse errors are positioned and specific") {
  CHECK_THROWS_AS(parse_smiles("C1CC"), ParseError);
  CHECK_THROWS_AS(parse_smiles("C(C"), ParseError);
  CHECK_THROWS_AS(parse_smiles("C)C"), ParseError);
  CHECK_THROWS_AS(parse_smiles("[Xx]"), ParseError);
  CHECK_THROWS_AS(parse_smiles("C="), ParseError);
  CHECK_THROWS_AS(parse_smiles("9CC"), ParseError);
  CHECK_THROWS_AS(parse_smiles(""), ParseError);
  CHECK_THROWS_AS(parse_smiles("C^C"), ParseError);
  try {
    parse_smiles("C1CC");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("ring") != std::string::npos);
  }
}

TEST_CASE("stereo markers are stripped with a warning") {
  std::vector<std::string> warnings;
  const Molecule m = parse_smiles("F/C=C/F", &warnings);
  CHECK(warnings.size() == 2);
  CHECK(graphs_isomorphic(m, parse_smiles("FC=CF")));

  warnings.clear();
  const Molecule c = parse_smiles("[C@@H](C)(N)O", &warnings);
  CHECK(warnings.size() == 1);
  CHECK(graphs_isomorphic(c, parse_smiles("[CH](C)(N)O")));
}

TEST_CASE("canonical writer is order independent and idempotent") {
  CHECK(write_smiles(parse_smiles("OCC")) == write_smiles(parse_smiles("CCO")));
  CHECK(write_smiles(parse_smiles("c1ccccc1")) == write_smiles(parse_smiles("C1=CC=CC=C1")));

  Rng rng(501);
  for (const std::string& s : kMolecules) {
    const Molecule m = parse_smiles(s);
    const std::string canon = write_smiles(m);
    CHECK(write_smiles(parse_smiles(canon)) == canon);
    CHECK(graphs_isomorphic(parse_smiles(canon), m));
    for (int trial = 0; trial < 10; ++trial) {
      const Molecule p = permute_atoms(m, random_perm(m.atom_count(), rng));
      CHECK(write_smiles(p) == canon);
    }
  }
}

TEST_CASE("non-canonical output still round-trips") {
  for (const std::string& s : kMolecules) {
    const Molecule m = parse_smiles(s);
    CHECK(graphs_isomorphic(parse_smiles(write_smiles(m, false)), m));
  }
}

TEST_CASE("canonical ranks are a permutation of 0..n-1") {
  for (const std::string& s : kMolecules) {
    const Molecule m = parse_smiles(s);
    std::vector<int> ranks = canonical_ranks(m);
    REQUIRE(static_cast<int>(ranks.size()) == m.atom_count());
    std::vector<int> sorted = ranks;
    std::sort(sorted.begin(), sorted.end());
    std::vector<int> iota(ranks.size());
    std::iota(iota.begin(), iota.end(), 0);
    CHECK(sorted == iota);
  }
}

TEST_CASE("kekulization produces alternating assignments") {
  const Molecule k = kekulize(parse_smiles("c1ccccc1"));
  int singles = 0;
  int doubles = 0;
  int aromatic = 0;
  for (int i = 0; i < k.bond_count(); ++i) {
    if (k.bond(i).order == BondOrder::Single) ++singles;
    if (k.bond(i).order == BondOrder::Double) ++doubles;
    if (k.bond(i).order == BondOrder::Aromatic) ++aromatic;
  }
  CHECK(singles == 3);
  CHECK(doubles == 3);
  CHECK(aromatic == 0);

  const Molecule pyridine = kekulize(parse_smiles("c1ccncc1"));
  CHECK_FALSE(pyridine.valence_invalid());

  CHECK_THROWS_AS(kekulize(parse_smiles("c")), KekulizeError);
  // An odd all-carbon aromatic cycle admits no perfect matching.
  CHECK_THROWS_AS(kekulize(parse_smiles("c1cccc1")), KekulizeError);
}

TEST_CASE("writer kekulize option emits explicit bond orders") {
  WriteOptions options;
  options.kekulize = true;
  const std::string s = write_smiles(parse_smiles("c1ccccc1"), options);
  CHECK(s == "C1=CC=CC=C1");
  CHECK(graphs_isomorphic(parse_smiles(s), parse_smiles("c1ccccc1")));
  // Stable across input spellings because kekulization follows canonical
  // ordering.
  CHECK(s == write_smiles(parse_smiles("C1=CC=CC=C1"), options));
}

TEST_CASE("tokenizer splits atoms, brackets and closures") {
  CHECK(tokenize_smiles("CCO") == TokenSequence{"C", "C", "O"});
  CHECK(tokenize_smiles("C(Cl)Br") == TokenSequence{"C", "(", "Cl", ")", "Br"});
  CHECK(tokenize_smiles("[NH4+]") == TokenSequence{"[NH4+]"});
  CHECK(tokenize_smiles("C%12CC%12") == TokenSequence{"C", "%12", "C", "C", "%12"});
  CHECK(tokenize_smiles("c1ccncc1") ==
        TokenSequence{"c", "1", "c", "c", "n", "c", "c", "1"});
  CHECK(tokenize_smiles("F/C=C/F") == TokenSequence{"F", "/", "C", "=", "C", "/", "F"});
  CHECK_THROWS_AS(tokenize_smiles("C^C"), ParseError);
}

TEST_CASE("detokenize inverts tokenize") {
  CHECK(detokenize({}) == "");
  for (const std::string& s : kMolecules) {
    CHECK(detokenize(tokenize_smiles(s)) == s);
  }
}

TEST_CASE("vocab ids are reserved-offset and first-seen ordered") {
  const Vocab v = Vocab::build({"CCO", "c1ccccc1"});
  CHECK(v.tokens() == std::vector<std::string>{"C", "O", "c", "1"});
  CHECK(v.size() == 8);
  CHECK(v.id("C") == 4);
  CHECK(v.id("O") == 5);
  CHECK(v.id("c") == 6);
  CHECK(v.id("1") == 7);
  CHECK(v.id("N") == Vocab::kUnk);
  CHECK(v.token(4) == "C");

  const std::vector<int> ids = v.encode("CCO");
  CHECK(ids == std::vector<int>{Vocab::kBos, 4, 4, 5, Vocab::kEos});
  CHECK(v.decode(ids) == "CCO");
  CHECK(v.encode("N") == std::vector<int>{Vocab::kBos, Vocab::kUnk, Vocab::kEos});
}

TEST_CASE("vocab json round trip preserves tokens and hash") {
  const Vocab v = Vocab::build({"CC(=O)Oc1ccccc1C(=O)O"});
  const Vocab r = Vocab::from_json(v.to_json());
  CHECK(r.tokens() == v.tokens());
  CHECK(r.hash() == v.hash());
  CHECK(Vocab::build({"CCN"}).hash() != v.hash());
}
