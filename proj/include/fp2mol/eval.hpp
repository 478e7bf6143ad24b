#pragma once

#include <map>
#include <string>
#include <vector>

#include "fp2mol/decoder.hpp"
#include "fp2mol/mces.hpp"

namespace fp2mol {

class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EvalConfig {
  std::vector<int> ks = {1, 10};
  McesConfig mces;
  // Charged to examples whose top-k contains no parseable candidate.
  double mces_penalty = 100.0;
  int fp_radius = 2;
  int fp_width = 4096;
  int jobs = 1;
};

struct PredCandidate {
  std::string smiles;
  double logprob = 0.0;
};

// One predictions-file line. Malformed lines keep their line number and
// error text and score as failed examples.
struct PredictionRecord {
  std::string id;
  std::vector<PredCandidate> candidates;
  int line = 0;
  bool malformed = false;
  std::string error;
};

struct ExampleResult {
  std::string id;
  bool failed = false;
  std::string error;
  int candidate_count = 0;
  // Fraction of candidates that parse and pass the valence check.
  double validity_rate = 0.0;
  std::vector<int> ks;
  std::vector<bool> hit;            // per k
  std::vector<double> mces_best;    // per k, minimum distance
  std::vector<double> tanimoto_best;  // per k, maximum similarity
};

struct MetricsReport {
  struct Aggregate {
    int k = 0;
    double accuracy = 0.0;
    double mean_mces = 0.0;
    double mean_tanimoto = 0.0;
  };
  EvalConfig config;
  std::vector<ExampleResult> per_example;
  std::vector<Aggregate> aggregates;
  int evaluated_count = 0;
  int failed_count = 0;

  std::string to_json() const;
  std::string aggregates_tsv() const;
};

// True when one of the first k candidates parses and canonically equals
// truth. Candidates come in sorted by score, deduplicated.
bool topk_accuracy(const CandidateSet& candidates, const Molecule& truth, int k);

// Minimum MCES distance over the first k parseable candidates; `penalty`
// when none parse.
double topk_mces(const CandidateSet& candidates, const Molecule& truth, int k,
                 const McesConfig& config = {}, double penalty = 100.0);

// Maximum Tanimoto over the first k parseable candidates; 0 when none parse.
double topk_tanimoto(const CandidateSet& candidates, const Molecule& truth, int k, int radius = 2,
                     int width = 4096);

// All metrics for every record against the id-matched truth SMILES.
// Throws EvalError for ids missing from truth or duplicated in records.
// Parallel across examples when config.jobs > 1; aggregation runs in record
// order regardless of scheduling.
MetricsReport evaluate_run(const std::vector<PredictionRecord>& records,
                           const std::map<std::string, std::string>& truth_smiles,
                           const EvalConfig& config = {});

}  // namespace fp2mol
