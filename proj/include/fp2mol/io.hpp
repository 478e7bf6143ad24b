#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fp2mol/eval.hpp"
#include "fp2mol/fingerprint.hpp"

namespace fp2mol::io {

// Unreadable files, unwritable outputs, format violations.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CorpusRecord {
  std::string id;
  std::string smiles;
  int line = 0;
};

// Lines of "<id>\t<smiles>" or bare "<smiles>" (id becomes the 1-based line
// number). Blank lines and lines starting with '#' are skipped.
std::vector<CorpusRecord> read_corpus(const std::string& path);

struct FingerprintRecord {
  std::string id;
  int width = 0;
  // Exactly one of the two is present.
  std::optional<OnBitSequence> onbits;
  std::optional<std::vector<double>> probs;
  std::string generator;  // empty when the file carried none
  int line = 0;
};

// JSON lines {"id", "width", "onbits" | "probs", "generator"?}. Malformed
// lines raise DataError with the line number.
std::vector<FingerprintRecord> read_fingerprints(const std::string& path);
void write_fingerprints(const std::string& path, const std::vector<FingerprintRecord>& records);

// JSON lines {"id", "candidates": [{"smiles", "logprob"}, ...]}. Malformed
// lines become records flagged malformed, carrying the parse error.
std::vector<PredictionRecord> read_predictions(const std::string& path);
void write_predictions(const std::string& path, const std::vector<PredictionRecord>& records);

std::string read_file(const std::string& path);
// Writes to a sibling temp file, then renames over the target.
void write_file_atomic(const std::string& path, const std::string& content);

std::uint64_t file_digest(const std::string& path);
std::string hex64(std::uint64_t value);

}  // namespace fp2mol::io
