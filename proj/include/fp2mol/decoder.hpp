#pragma once

#include <memory>
#include <string>
#include <vector>

#include "fp2mol/fingerprint.hpp"
#include "fp2mol/smiles.hpp"

namespace fp2mol {

// Per-example scoring handle. Sessions are cheap, hold any conditioning
// state (such as an encoded fingerprint) and are not shared across threads.
class DecoderSession {
 public:
  virtual ~DecoderSession() = default;
  // Log-probabilities over the vocabulary for the token following `prefix`.
  // The prefix starts with BOS and contains no EOS.
  virtual std::vector<double> score_prefix(const std::vector<int>& prefix) = 0;
};

class DecoderModel {
 public:
  virtual ~DecoderModel() = default;
  virtual const Vocab& vocab() const = 0;
  virtual int fingerprint_width() const = 0;
  virtual std::unique_ptr<DecoderSession> begin(const OnBitSequence& onbits) const = 0;
  // One-shot convenience around begin(); prefer a session inside loops.
  std::vector<double> score_next(const OnBitSequence& onbits,
                                 const std::vector<int>& prefix) const {
    return begin(onbits)->score_prefix(prefix);
  }
};

struct Candidate {
  std::string smiles;
  double logprob = 0.0;
  std::vector<int> token_ids;  // BOS .. EOS for complete candidates
  bool complete = true;
};

// Descending by logprob; equal scores break toward the lexicographically
// smaller token id sequence.
using CandidateSet = std::vector<Candidate>;

// Breadth `beam` search over token sequences by cumulative log-probability.
// No length normalization. PAD/BOS/UNK are never emitted. Candidates whose
// SMILES canonicalize identically are merged keeping the best score. When
// nothing reaches EOS within max_len the best incomplete sequence is
// returned, flagged complete = false.
CandidateSet beam_search(const DecoderModel& model, const OnBitSequence& onbits, int beam = 10,
                         int max_len = 160);

}  // namespace fp2mol
