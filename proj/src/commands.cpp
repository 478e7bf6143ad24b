#include "fp2mol/commands.hpp"

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "fp2mol/decoder.hpp"
#include "fp2mol/eval.hpp"
#include "fp2mol/fingerprint.hpp"
#include "fp2mol/hash.hpp"
#include "fp2mol/io.hpp"
#include "fp2mol/model.hpp"
#include "fp2mol/smiles.hpp"

namespace fp2mol::cli {
namespace {

using nlohmann::json;

std::string generator_id(int radius, int width) {
  return "fnv1a64-morgan/r" + std::to_string(radius) + "/w" + std::to_string(width) + "/v1";
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// The manifest sits next to its artifact. Timestamps live here and only
// here; artifact bytes stay reproducible.
void write_manifest(const std::string& artifact_path, json manifest) {
  manifest["tool"] = "fp2mol";
  manifest["version"] = kToolVersion;
  manifest["created"] = utc_timestamp();
  json outputs;
  outputs[artifact_path] = "fnv1a64:" + io::hex64(io::file_digest(artifact_path));
  if (manifest.contains("outputs")) {
    for (auto& [k, v] : manifest["outputs"].items()) outputs[k] = v;
  }
  manifest["outputs"] = std::move(outputs);
  io::write_file_atomic(artifact_path + ".manifest.json", manifest.dump(2) + "\n");
}

json input_digests(const std::vector<std::string>& paths) {
  json j;
  for (const auto& p : paths) j[p] = "fnv1a64:" + io::hex64(io::file_digest(p));
  return j;
}

// Uniform generator across one fingerprint file; empty string when the file
// carries no tag. Mixing different tags is refused.
std::string uniform_generator(const std::vector<io::FingerprintRecord>& records,
                              const std::string& path) {
  std::string gen;
  bool first = true;
  for (const auto& rec : records) {
    if (first) {
      gen = rec.generator;
      first = false;
    } else if (rec.generator != gen) {
      throw io::DataError(path + ": mixed fingerprint generator ids ('" + gen + "' vs '" +
                          rec.generator + "'); one run uses one generator");
    }
  }
  return gen;
}

OnBitSequence record_onbits(const io::FingerprintRecord& rec, double threshold) {
  if (rec.onbits) return *rec.onbits;
  ProbFingerprint pf;
  pf.width = rec.width;
  pf.probs = *rec.probs;
  return threshold_onbits(pf, threshold);
}

int run_data_guarded(const char* name, const std::function<int()>& body) {
  try {
    return body();
  } catch (const io::DataError& e) {
    std::cerr << name << ": " << e.what() << "\n";
    return kExitData;
  } catch (const ParseError& e) {
    std::cerr << name << ": " << e.what() << "\n";
    return kExitData;
  } catch (const EvalError& e) {
    std::cerr << name << ": " << e.what() << "\n";
    return kExitData;
  }
}

}  // namespace

int cmd_fingerprint(const FingerprintArgs& args) {
  return run_data_guarded("fingerprint", [&]() {
    if (args.radius < 0 || args.width <= 0) {
      throw io::DataError("radius must be >= 0 and width positive");
    }
    const auto corpus = io::read_corpus(args.corpus_path);
    const std::string gen = generator_id(args.radius, args.width);
    std::vector<io::FingerprintRecord> out;
    out.reserve(corpus.size());
    int warnings = 0;
    for (const auto& rec : corpus) {
      try {
        Molecule mol = parse_smiles(rec.smiles);
        Fingerprint fp = morgan_fingerprint(mol, args.radius, args.width);
        io::FingerprintRecord fr;
        fr.id = rec.id;
        fr.width = args.width;
        fr.onbits = fingerprint_to_onbits(fp);
        fr.generator = gen;
        out.push_back(std::move(fr));
      } catch (const ParseError& e) {
        ++warnings;
        std::cerr << "fingerprint: " << args.corpus_path << ":" << rec.line << " (" << rec.id
                  << "): " << e.what() << "\n";
      }
    }
    io::write_fingerprints(args.out_path, out);
    json manifest;
    manifest["command"] = "fingerprint";
    manifest["config"] = {{"radius", args.radius}, {"width", args.width}};
    manifest["inputs"] = input_digests({args.corpus_path});
    manifest["fingerprint_generator"] = gen;
    manifest["seed"] = 0;
    write_manifest(args.out_path, std::move(manifest));
    std::cerr << "fingerprint: wrote " << out.size() << " records, " << warnings
              << " warning(s)\n";
    return kExitOk;
  });
}

int cmd_train(const TrainArgs& args) {
  return run_data_guarded("train", [&]() {
    if (args.epochs <= 0) throw io::DataError("epochs must be positive; nothing to train");
    const auto corpus = io::read_corpus(args.corpus_path);
    const auto fps = io::read_fingerprints(args.fp_path);
    const std::string gen = uniform_generator(fps, args.fp_path);

    std::map<std::string, const io::FingerprintRecord*> by_id;
    for (const auto& rec : fps) {
      if (!by_id.emplace(rec.id, &rec).second) {
        throw io::DataError(args.fp_path + ": duplicate fingerprint id '" + rec.id + "'");
      }
    }

    int width = -1;
    int warnings = 0;
    std::vector<std::pair<const io::CorpusRecord*, const io::FingerprintRecord*>> joined;
    for (const auto& rec : corpus) {
      auto it = by_id.find(rec.id);
      if (it == by_id.end()) continue;
      if (width < 0) width = it->second->width;
      if (it->second->width != width) {
        throw io::DataError(args.fp_path + ": records disagree on width");
      }
      joined.emplace_back(&rec, it->second);
    }
    if (joined.empty()) {
      throw io::DataError("join of corpus ids and fingerprint ids produced zero pairs");
    }

    std::vector<std::string> kept_smiles;
    std::vector<OnBitSequence> kept_bits;
    for (const auto& [crec, frec] : joined) {
      size_t token_count = 0;
      try {
        token_count = tokenize_smiles(crec->smiles).size();
      } catch (const ParseError& e) {
        ++warnings;
        std::cerr << "train: " << args.corpus_path << ":" << crec->line << ": " << e.what()
                  << "\n";
        continue;
      }
      OnBitSequence bits = record_onbits(*frec, 0.5);
      if (static_cast<int>(token_count) + 2 > args.max_tokens ||
          static_cast<int>(bits.size()) > args.max_onbits) {
        ++warnings;
        std::cerr << "train: " << crec->id << ": example exceeds size limits, skipped\n";
        continue;
      }
      kept_smiles.push_back(crec->smiles);
      kept_bits.push_back(std::move(bits));
    }
    if (kept_smiles.empty()) throw io::DataError("no usable training examples after filtering");

    Vocab vocab = Vocab::build(kept_smiles);
    std::vector<TrainExample> data;
    data.reserve(kept_smiles.size());
    for (size_t i = 0; i < kept_smiles.size(); ++i) {
      TrainExample ex;
      ex.onbits = kept_bits[i];
      ex.token_ids = vocab.encode(kept_smiles[i]);
      data.push_back(std::move(ex));
    }

    ToyTransformerParams params;
    params.embed_dim = args.embed_dim;
    params.layers = args.layers;
    params.heads = args.heads;
    params.feedforward_dim = args.feedforward_dim;
    params.max_onbits = args.max_onbits;
    params.max_tokens = args.max_tokens;
    TrainConfig config;
    config.learning_rate = args.learning_rate;
    config.batch_size = args.batch_size;
    config.epochs = args.epochs;
    config.seed = args.seed;

    std::vector<double> losses;
    ToyTransformer model(params, vocab, width, args.seed);
    model.set_generator_id(gen);
    try {
      model.fit(data, config, &losses);
    } catch (const TrainError& e) {
      std::cerr << "train: " << e.what() << "\n";
      return kExitInternal;
    }

    std::ostringstream blob;
    model.save(blob);
    io::write_file_atomic(args.out_model, blob.str());

    std::ostringstream loss_log;
    loss_log << "epoch\tloss\n";
    for (size_t i = 0; i < losses.size(); ++i) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%zu\t%.9f\n", i + 1, losses[i]);
      loss_log << buf;
    }
    const std::string loss_path = args.out_model + ".loss.tsv";
    io::write_file_atomic(loss_path, loss_log.str());

    json manifest;
    manifest["command"] = "train";
    manifest["config"] = {{"learning_rate", args.learning_rate},
                          {"batch_size", args.batch_size},
                          {"epochs", args.epochs},
                          {"embed_dim", args.embed_dim},
                          {"layers", args.layers},
                          {"heads", args.heads},
                          {"feedforward_dim", args.feedforward_dim},
                          {"max_onbits", args.max_onbits},
                          {"max_tokens", args.max_tokens}};
    manifest["seed"] = args.seed;
    manifest["inputs"] = input_digests({args.corpus_path, args.fp_path});
    manifest["fingerprint_generator"] = gen;
    manifest["vocab_hash"] = "fnv1a64:" + io::hex64(vocab.hash());
    manifest["model_hash"] = "fnv1a64:" + io::hex64(model.digest());
    manifest["outputs"][loss_path] = "fnv1a64:" + io::hex64(io::file_digest(loss_path));
    write_manifest(args.out_model, std::move(manifest));
    std::cerr << "train: " << data.size() << " examples, " << losses.size() << " epochs, "
              << warnings << " warning(s), final loss "
              << (losses.empty() ? 0.0 : losses.back()) << "\n";
    return kExitOk;
  });
}

int cmd_decode(const DecodeArgs& args) {
  return run_data_guarded("decode", [&]() {
    if (args.beam <= 0 || args.max_len <= 1) {
      throw io::DataError("beam must be positive and max-len > 1");
    }
    std::ifstream in(args.model_path, std::ios::binary);
    if (!in) throw io::DataError("cannot open " + args.model_path);
    ToyTransformer model = [&]() {
      try {
        return ToyTransformer::load(in);
      } catch (const std::exception& e) {
        throw io::DataError(args.model_path + ": " + e.what());
      }
    }();

    const auto fps = io::read_fingerprints(args.fp_path);
    const std::string gen = uniform_generator(fps, args.fp_path);
    if (gen != model.generator_id()) {
      throw io::DataError("fingerprint generator '" + gen + "' does not match the model's '" +
                          model.generator_id() +
                          "'; refusing to decode across fingerprint generators");
    }
    for (const auto& rec : fps) {
      if (rec.width != model.fingerprint_width()) {
        throw io::DataError(args.fp_path + ":" + std::to_string(rec.line) +
                            ": width " + std::to_string(rec.width) +
                            " does not match the model's " +
                            std::to_string(model.fingerprint_width()) +
                            "; refusing to decode across fingerprint generators");
      }
    }

    std::vector<PredictionRecord> out(fps.size());
    std::vector<std::string> notes(fps.size());
    std::atomic<size_t> cursor{0};
    std::atomic<int> empty_warnings{0};
    auto worker = [&]() {
      for (;;) {
        const size_t i = cursor.fetch_add(1);
        if (i >= fps.size()) return;
        const auto& rec = fps[i];
        OnBitSequence bits = record_onbits(rec, args.threshold);
        if (bits.empty()) empty_warnings.fetch_add(1);
        CandidateSet cands = beam_search(model, bits, args.beam, args.max_len);
        PredictionRecord pr;
        pr.id = rec.id;
        int valid = 0;
        for (const auto& c : cands) {
          pr.candidates.push_back({c.smiles, c.logprob});
          try {
            Molecule m = parse_smiles(c.smiles);
            if (!m.valence_invalid()) ++valid;
          } catch (const ParseError&) {
          }
        }
        std::ostringstream note;
        note << "decode: " << rec.id << ": " << cands.size() << " candidate(s), validity "
             << (cands.empty() ? 0.0
                               : static_cast<double>(valid) / static_cast<double>(cands.size()));
        if (bits.empty()) note << " (empty on-bit set)";
        notes[i] = note.str();
        out[i] = std::move(pr);
      }
    };
    const int jobs = std::max(1, args.jobs);
    if (jobs == 1 || fps.size() <= 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      const int n = std::min<int>(jobs, static_cast<int>(fps.size()));
      pool.reserve(n);
      for (int t = 0; t < n; ++t) pool.emplace_back(worker);
      for (auto& th : pool) th.join();
    }
    for (const auto& n : notes) std::cerr << n << "\n";
    if (int w = empty_warnings.load(); w > 0) {
      std::cerr << "decode: " << w << " example(s) decoded from an empty on-bit set\n";
    }

    io::write_predictions(args.out_path, out);
    json manifest;
    manifest["command"] = "decode";
    manifest["config"] = {{"threshold", args.threshold},
                          {"beam", args.beam},
                          {"max_len", args.max_len},
                          {"jobs", args.jobs}};
    manifest["seed"] = 0;
    manifest["inputs"] = input_digests({args.model_path, args.fp_path});
    manifest["fingerprint_generator"] = model.generator_id();
    manifest["vocab_hash"] = "fnv1a64:" + io::hex64(model.vocab().hash());
    manifest["model_hash"] = "fnv1a64:" + io::hex64(model.digest());
    write_manifest(args.out_path, std::move(manifest));
    return kExitOk;
  });
}

int cmd_evaluate(const EvaluateArgs& args) {
  return run_data_guarded("evaluate", [&]() {
    const auto predictions = io::read_predictions(args.predictions_path);
    const auto corpus = io::read_corpus(args.truth_path);
    std::map<std::string, std::string> truth;
    for (const auto& rec : corpus) {
      if (!truth.emplace(rec.id, rec.smiles).second) {
        throw io::DataError(args.truth_path + ": duplicate truth id '" + rec.id + "'");
      }
    }

    EvalConfig config;
    config.ks = args.ks;
    config.mces_penalty = args.mces_penalty;
    config.jobs = args.jobs;
    config.mces.max_nodes_exact = args.mces_max_nodes;
    config.mces.time_budget = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::duration<double>(args.mces_budget_s));
    if (args.bond_match == "strict") {
      config.mces.bond_match = BondMatch::StrictOrder;
    } else if (args.bond_match == "any") {
      config.mces.bond_match = BondMatch::AnyOrder;
    } else {
      throw io::DataError("bond-match must be 'strict' or 'any'");
    }

    MetricsReport report = evaluate_run(predictions, truth, config);
    io::write_file_atomic(args.out_report, report.to_json());
    const std::string tsv_path = args.out_report + ".tsv";
    io::write_file_atomic(tsv_path, report.aggregates_tsv());

    json manifest;
    manifest["command"] = "evaluate";
    json kcfg = json::array();
    for (int k : args.ks) kcfg.push_back(k);
    manifest["config"] = {{"k", kcfg},
                          {"mces_penalty", args.mces_penalty},
                          {"bond_match", args.bond_match},
                          {"mces_max_nodes", args.mces_max_nodes},
                          {"mces_budget_s", args.mces_budget_s},
                          {"jobs", args.jobs}};
    manifest["seed"] = 0;
    manifest["inputs"] = input_digests({args.predictions_path, args.truth_path});
    manifest["outputs"][tsv_path] = "fnv1a64:" + io::hex64(io::file_digest(tsv_path));
    write_manifest(args.out_report, std::move(manifest));
    std::cerr << "evaluate: " << report.evaluated_count << " evaluated, " << report.failed_count
              << " failed\n";
    return kExitOk;
  });
}

}  // namespace fp2mol::cli
