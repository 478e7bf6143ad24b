#include <algorithm>
#include <map>
#include <stdexcept>

#include "fp2mol/decoder.hpp"

namespace fp2mol {
namespace {

struct Partial {
  std::vector<int> ids;  // BOS ...
  double logprob = 0.0;
};

bool better(double lp_x, const std::vector<int>& ids_x, double lp_y,
            const std::vector<int>& ids_y) {
  if (lp_x != lp_y) return lp_x > lp_y;
  return ids_x < ids_y;
}

}  // namespace

CandidateSet beam_search(const DecoderModel& model, const OnBitSequence& onbits, int beam,
                         int max_len) {
  if (beam <= 0) throw std::invalid_argument("beam must be positive");
  if (max_len <= 0) throw std::invalid_argument("max_len must be positive");

  auto session = model.begin(onbits);
  const int vocab_size = model.vocab().size();

  std::vector<Partial> active;
  active.push_back({{Vocab::kBos}, 0.0});
  std::vector<Partial> completed;

  for (int step = 0; step < max_len && !active.empty(); ++step) {
    std::vector<Partial> expansions;
    expansions.reserve(active.size() * static_cast<size_t>(vocab_size));
    for (const Partial& seq : active) {
      const std::vector<double> logprobs = session->score_prefix(seq.ids);
      if (static_cast<int>(logprobs.size()) != vocab_size) {
        throw std::runtime_error("model returned a distribution of the wrong size");
      }
      for (int token = 0; token < vocab_size; ++token) {
        if (token == Vocab::kPad || token == Vocab::kBos || token == Vocab::kUnk) continue;
        Partial next;
        next.ids = seq.ids;
        next.ids.push_back(token);
        next.logprob = seq.logprob + logprobs[static_cast<size_t>(token)];
        expansions.push_back(std::move(next));
      }
    }
    std::sort(expansions.begin(), expansions.end(), [](const Partial& x, const Partial& y) {
      return better(x.logprob, x.ids, y.logprob, y.ids);
    });
    if (static_cast<int>(expansions.size()) > beam) {
      expansions.resize(static_cast<size_t>(beam));
    }
    active.clear();
    for (Partial& seq : expansions) {
      if (seq.ids.back() == Vocab::kEos) {
        completed.push_back(std::move(seq));
      } else {
        active.push_back(std::move(seq));
      }
    }
    // Scores only fall as sequences grow, so once `beam` finished sequences
    // all beat the best live one nothing better can appear.
    if (static_cast<int>(completed.size()) >= beam && !active.empty()) {
      std::vector<double> scores;
      scores.reserve(completed.size());
      for (const Partial& seq : completed) scores.push_back(seq.logprob);
      std::nth_element(scores.begin(), scores.begin() + (beam - 1), scores.end(),
                       std::greater<double>());
      if (scores[static_cast<size_t>(beam - 1)] >= active.front().logprob) break;
    }
  }

  if (completed.empty()) {
    // Nothing emitted EOS within the budget. `active` cannot be empty here:
    // it only drains when every kept expansion ended in EOS, which fills
    // `completed`. Return the best surviving prefix so that beam=1 matches
    // greedy decoding even when greedy runs out of length.
    CandidateSet out;
    Candidate cand;
    const Partial& source = active.front();
    cand.token_ids = source.ids;
    cand.logprob = source.logprob;
    cand.smiles = model.vocab().decode(source.ids);
    cand.complete = false;
    out.push_back(std::move(cand));
    return out;
  }

  // Merge by canonical form, falling back to the surface string for
  // candidates that do not parse.
  std::map<std::string, Partial> merged;
  for (Partial& seq : completed) {
    const std::string surface = model.vocab().decode(seq.ids);
    std::string key;
    try {
      key = "c:" + write_smiles(parse_smiles(surface));
    } catch (const std::exception&) {
      key = "r:" + surface;
    }
    auto it = merged.find(key);
    if (it == merged.end()) {
      merged.emplace(key, std::move(seq));
    } else if (better(seq.logprob, seq.ids, it->second.logprob, it->second.ids)) {
      it->second = std::move(seq);
    }
  }

  std::vector<Partial> unique;
  unique.reserve(merged.size());
  for (auto& [key, seq] : merged) unique.push_back(std::move(seq));
  std::sort(unique.begin(), unique.end(), [](const Partial& x, const Partial& y) {
    return better(x.logprob, x.ids, y.logprob, y.ids);
  });
  if (static_cast<int>(unique.size()) > beam) unique.resize(static_cast<size_t>(beam));

  CandidateSet out;
  out.reserve(unique.size());
  for (Partial& seq : unique) {
    Candidate cand;
    cand.smiles = model.vocab().decode(seq.ids);
    cand.logprob = seq.logprob;
    cand.token_ids = std::move(seq.ids);
    cand.complete = true;
    out.push_back(std::move(cand));
  }
  return out;
}

}  // namespace fp2mol
