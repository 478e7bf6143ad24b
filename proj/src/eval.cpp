#include <algorithm>
#include <atomic>
#include <cmath>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "fp2mol/eval.hpp"
#include "fp2mol/fingerprint.hpp"

namespace fp2mol {
namespace {

struct KahanSum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double value) {
    const double y = value - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

struct Prepped {
  bool parsed = false;
  bool valid = false;
  std::optional<Molecule> mol;
  std::string canonical;
};

Prepped prep_candidate(const std::string& smiles) {
  Prepped out;
  try {
    Molecule mol = parse_smiles(smiles);
    out.canonical = write_smiles(mol);
    out.valid = !mol.valence_invalid();
    out.mol = std::move(mol);
    out.parsed = true;
  } catch (const std::exception&) {
  }
  return out;
}

std::vector<Prepped> prep_candidates(const CandidateSet& candidates) {
  std::vector<Prepped> out;
  out.reserve(candidates.size());
  for (const Candidate& candidate : candidates) out.push_back(prep_candidate(candidate.smiles));
  return out;
}

bool hit_at_k(const std::vector<Prepped>& prepped, const std::string& truth_canonical, int k) {
  const int limit = std::min<int>(k, static_cast<int>(prepped.size()));
  for (int i = 0; i < limit; ++i) {
    if (prepped[static_cast<size_t>(i)].parsed &&
        prepped[static_cast<size_t>(i)].canonical == truth_canonical) {
      return true;
    }
  }
  return false;
}

double mces_at_k(const std::vector<Prepped>& prepped, const Molecule& truth,
                 const std::string& truth_canonical, int k, const McesConfig& config,
                 double penalty) {
  const int limit = std::min<int>(k, static_cast<int>(prepped.size()));
  double best = penalty;
  bool any = false;
  for (int i = 0; i < limit; ++i) {
    const Prepped& cand = prepped[static_cast<size_t>(i)];
    if (!cand.parsed) continue;
    // Canonical equality short-circuits the search: identical graphs are
    // distance zero by definition.
    const double d = cand.canonical == truth_canonical
                         ? 0.0
                         : static_cast<double>(mces_distance(*cand.mol, truth, config).distance);
    best = any ? std::min(best, d) : d;
    any = true;
  }
  return any ? best : penalty;
}

double tanimoto_at_k(const std::vector<Prepped>& prepped, const Fingerprint& truth_fp, int k,
                     int radius) {
  const int limit = std::min<int>(k, static_cast<int>(prepped.size()));
  double best = 0.0;
  bool any = false;
  for (int i = 0; i < limit; ++i) {
    const Prepped& cand = prepped[static_cast<size_t>(i)];
    if (!cand.parsed) continue;
    const Fingerprint fp = morgan_fingerprint(*cand.mol, radius, truth_fp.width);
    const double t = tanimoto(fp, truth_fp);
    best = any ? std::max(best, t) : t;
    any = true;
  }
  return any ? best : 0.0;
}

ExampleResult evaluate_example(const PredictionRecord& record, const std::string& truth,
                               const EvalConfig& config) {
  ExampleResult result;
  result.id = record.id;
  result.ks = config.ks;
  if (record.malformed) {
    result.failed = true;
    result.error = record.error;
    return result;
  }

  Molecule truth_mol;
  std::string truth_canonical;
  try {
    truth_mol = parse_smiles(truth);
    truth_canonical = write_smiles(truth_mol);
  } catch (const std::exception& e) {
    result.failed = true;
    result.error = std::string("truth SMILES does not parse: ") + e.what();
    return result;
  }

  CandidateSet candidates;
  candidates.reserve(record.candidates.size());
  for (const PredCandidate& cand : record.candidates) {
    Candidate c;
    c.smiles = cand.smiles;
    c.logprob = cand.logprob;
    candidates.push_back(std::move(c));
  }

  const std::vector<Prepped> prepped = prep_candidates(candidates);
  result.candidate_count = static_cast<int>(prepped.size());
  int valid = 0;
  for (const Prepped& cand : prepped) {
    if (cand.parsed && cand.valid) ++valid;
  }
  result.validity_rate =
      prepped.empty() ? 0.0 : static_cast<double>(valid) / static_cast<double>(prepped.size());

  const Fingerprint truth_fp = morgan_fingerprint(truth_mol, config.fp_radius, config.fp_width);
  for (int k : config.ks) {
    result.hit.push_back(hit_at_k(prepped, truth_canonical, k));
    result.mces_best.push_back(
        mces_at_k(prepped, truth_mol, truth_canonical, k, config.mces, config.mces_penalty));
    result.tanimoto_best.push_back(tanimoto_at_k(prepped, truth_fp, k, config.fp_radius));
  }
  return result;
}

}  // namespace

bool topk_accuracy(const CandidateSet& candidates, const Molecule& truth, int k) {
  return hit_at_k(prep_candidates(candidates), write_smiles(truth), k);
}

double topk_mces(const CandidateSet& candidates, const Molecule& truth, int k,
                 const McesConfig& config, double penalty) {
  return mces_at_k(prep_candidates(candidates), truth, write_smiles(truth), k, config, penalty);
}

double topk_tanimoto(const CandidateSet& candidates, const Molecule& truth, int k, int radius,
                     int width) {
  return tanimoto_at_k(prep_candidates(candidates), morgan_fingerprint(truth, radius, width), k,
                       radius);
}

MetricsReport evaluate_run(const std::vector<PredictionRecord>& records,
                           const std::map<std::string, std::string>& truth_smiles,
                           const EvalConfig& config) {
  if (config.ks.empty()) throw EvalError("at least one k must be configured");
  for (int k : config.ks) {
    if (k <= 0) throw EvalError("k values must be positive");
  }

  std::set<std::string> seen;
  for (const PredictionRecord& record : records) {
    if (record.malformed) continue;
    if (!seen.insert(record.id).second) {
      throw EvalError("duplicate prediction id '" + record.id + "'");
    }
    if (truth_smiles.find(record.id) == truth_smiles.end()) {
      throw EvalError("prediction id '" + record.id + "' missing from truth corpus");
    }
  }

  MetricsReport report;
  report.config = config;
  report.per_example.resize(records.size());

  const auto run_one = [&](size_t index) {
    const PredictionRecord& record = records[index];
    const std::string truth = record.malformed ? std::string() : truth_smiles.at(record.id);
    report.per_example[index] = evaluate_example(record, truth, config);
  };

  const int jobs = std::max(1, config.jobs);
  if (jobs == 1 || records.size() < 2) {
    for (size_t i = 0; i < records.size(); ++i) run_one(i);
  } else {
    std::atomic<size_t> cursor{0};
    std::vector<std::thread> workers;
    const int worker_count = std::min<int>(jobs, static_cast<int>(records.size()));
    workers.reserve(static_cast<size_t>(worker_count));
    for (int w = 0; w < worker_count; ++w) {
      workers.emplace_back([&]() {
        while (true) {
          const size_t index = cursor.fetch_add(1);
          if (index >= records.size()) return;
          run_one(index);
        }
      });
    }
    for (std::thread& worker : workers) worker.join();
  }

  // Sequential pass over results in record order: means come out identical
  // however the workers were scheduled.
  for (size_t ki = 0; ki < config.ks.size(); ++ki) {
    KahanSum acc_sum;
    KahanSum mces_sum;
    KahanSum tani_sum;
    int count = 0;
    for (const ExampleResult& result : report.per_example) {
      if (result.failed) continue;
      ++count;
      acc_sum.add(result.hit[ki] ? 1.0 : 0.0);
      mces_sum.add(result.mces_best[ki]);
      tani_sum.add(result.tanimoto_best[ki]);
    }
    MetricsReport::Aggregate agg;
    agg.k = config.ks[ki];
    if (count > 0) {
      agg.accuracy = acc_sum.sum / count;
      agg.mean_mces = mces_sum.sum / count;
      agg.mean_tanimoto = tani_sum.sum / count;
    }
    report.aggregates.push_back(agg);
  }
  report.failed_count = 0;
  for (const ExampleResult& result : report.per_example) {
    if (result.failed) report.failed_count++;
  }
  report.evaluated_count = static_cast<int>(report.per_example.size()) - report.failed_count;
  return report;
}

std::string MetricsReport::to_json() const {
  nlohmann::json j;
  j["config"]["ks"] = config.ks;
  j["config"]["mces_penalty"] = config.mces_penalty;
  j["config"]["fp_radius"] = config.fp_radius;
  j["config"]["fp_width"] = config.fp_width;
  j["config"]["bond_match"] =
      config.mces.bond_match == BondMatch::StrictOrder ? "strict_order" : "any_order";
  j["config"]["mces_max_nodes_exact"] = config.mces.max_nodes_exact;
  j["config"]["mces_time_budget_s"] = config.mces.time_budget.count();

  j["per_example"] = nlohmann::json::array();
  for (const ExampleResult& result : per_example) {
    nlohmann::json e;
    e["id"] = result.id;
    e["failed"] = result.failed;
    if (result.failed) {
      e["error"] = result.error;
    } else {
      e["candidate_count"] = result.candidate_count;
      e["validity_rate"] = result.validity_rate;
      for (size_t ki = 0; ki < result.ks.size(); ++ki) {
        const std::string suffix = std::to_string(result.ks[ki]);
        e["hit@" + suffix] = static_cast<bool>(result.hit[ki]);
        e["mces@" + suffix] = result.mces_best[ki];
        e["tanimoto@" + suffix] = result.tanimoto_best[ki];
      }
    }
    j["per_example"].push_back(std::move(e));
  }

  j["aggregate"] = nlohmann::json::array();
  for (const Aggregate& agg : aggregates) {
    nlohmann::json a;
    a["k"] = agg.k;
    a["accuracy"] = agg.accuracy;
    a["mean_mces"] = agg.mean_mces;
    a["mean_tanimoto"] = agg.mean_tanimoto;
    j["aggregate"].push_back(std::move(a));
  }
  j["evaluated_count"] = evaluated_count;
  j["failed_count"] = failed_count;
  return j.dump(2) + "\n";
}

std::string MetricsReport::aggregates_tsv() const {
  std::ostringstream out;
  out << "k\taccuracy\tmean_mces\tmean_tanimoto\n";
  out.setf(std::ios::fixed);
  out.precision(6);
  for (const Aggregate& agg : aggregates) {
    out << agg.k << '\t' << agg.accuracy << '\t' << agg.mean_mces << '\t' << agg.mean_tanimoto
        << '\n';
  }
  return out.str();
}

}  // namespace fp2mol
