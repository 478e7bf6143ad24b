#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fp2mol/molgraph.hpp"

namespace fp2mol {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, size_t position)
      : std::runtime_error(message + " (at position " + std::to_string(position) + ")"),
        position_(position) {}
  size_t position() const { return position_; }

 private:
  size_t position_;
};

class KekulizeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Organic subset, bracket atoms, ring closures (digits and %nn), branches,
// dots and aromatic lowercase forms. Stereo markers are accepted lexically
// and stripped; each strip adds a note to *warnings when given.
Molecule parse_smiles(std::string_view text, std::vector<std::string>* warnings = nullptr);

struct WriteOptions {
  bool canonical = true;
  // Rewrite aromatic systems with alternating single/double bonds; throws
  // KekulizeError when no assignment exists.
  bool kekulize = false;
};

std::string write_smiles(const Molecule& mol, bool canonical = true);
std::string write_smiles(const Molecule& mol, const WriteOptions& options);

// Canonical atom ranks: a permutation of 0..n-1, stable under input atom
// reordering. Rank 0 is the canonical start atom of its fragment.
std::vector<int> canonical_ranks(const Molecule& mol);

// Aromatic bonds replaced by an alternating single/double assignment (maximum
// matching over atoms that still need a double bond). Hydrogen counts are
// frozen. Throws KekulizeError when no assignment exists.
Molecule kekulize(const Molecule& mol);

using TokenSequence = std::vector<std::string>;

// Lexical split: bracket atoms, %nn ring closures and Cl/Br are single
// tokens; everything else one character. Works on unparseable strings;
// throws ParseError only for characters outside the token grammar.
TokenSequence tokenize_smiles(std::string_view text);

std::string detokenize(const TokenSequence& tokens);

// Token <-> id mapping for the decoder. Ids 0..3 are PAD/BOS/EOS/UNK;
// corpus tokens follow in first-seen order.
class Vocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kBos = 1;
  static constexpr int kEos = 2;
  static constexpr int kUnk = 3;
  static constexpr int kReserved = 4;

  Vocab() = default;
  explicit Vocab(std::vector<std::string> tokens);

  // Tokenizes every string, adding unseen tokens in encounter order.
  static Vocab build(const std::vector<std::string>& corpus_smiles);

  int size() const { return kReserved + static_cast<int>(tokens_.size()); }
  int id(const std::string& token) const;  // kUnk when unknown
  const std::string& token(int id) const;  // reserved ids yield markers
  const std::vector<std::string>& tokens() const { return tokens_; }

  // BOS + token ids + EOS; unknown tokens map to kUnk.
  std::vector<int> encode(std::string_view smiles) const;
  // Concatenated surface form, reserved ids skipped.
  std::string decode(const std::vector<int>& ids) const;

  std::uint64_t hash() const;

  std::string to_json() const;
  static Vocab from_json(const std::string& text);

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
};

}  // namespace fp2mol
