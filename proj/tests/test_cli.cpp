#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "fp2mol/commands.hpp"
#include "fp2mol/decoder.hpp"
#include "fp2mol/eval.hpp"
#include "fp2mol/fingerprint.hpp"
#include "fp2mol/io.hpp"
#include "fp2mol/model.hpp"
#include "fp2mol/smiles.hpp"

namespace fs = std::filesystem;
using namespace fp2mol;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() /
           ("fp2mol_test_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  REQUIRE(out.good());
  out << content;
}

cli::TrainArgs tiny_train_args(const std::string& corpus, const std::string& fp,
                               const std::string& model) {
  cli::TrainArgs args;
  args.corpus_path = corpus;
  args.fp_path = fp;
  args.out_model = model;
  args.learning_rate = 1e-2;
  args.batch_size = 4;
  args.epochs = 3;
  args.seed = 9;
  args.embed_dim = 16;
  args.layers = 1;
  args.heads = 2;
  args.feedforward_dim = 32;
  args.max_onbits = 32;
  args.max_tokens = 24;
  return args;
}

constexpr const char* kCorpus =
    "# four training molecules\n"
    "e1\tCCO\n"
    "e2\tCCC\n"
    "e3\tCCN\n"
    "e4\tCC(C)O\n";

int run_status(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WEXITSTATUS(status);
}

std::string run_capture(const std::string& cmd) {
  std::string out;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[256];
  while (fgets(buf, sizeof(buf), pipe) != nullptr) out += buf;
  pclose(pipe);
  return out;
}

}  // namespace

TEST_CASE("corpus reader: tabs, bare lines, comments, errors") {
  TempDir dir("corpus");
  const std::string path = dir.file("c.smi");
  write_text(path, "# header\na\tCCO\n\nCC\n");
  const auto records = io::read_corpus(path);
  REQUIRE(records.size() == 2);
  CHECK(records[0].id == "a");
  CHECK(records[0].smiles == "CCO");
  CHECK(records[0].line == 2);
  CHECK(records[1].id == "4");  // bare line takes its line number
  CHECK(records[1].smiles == "CC");
  CHECK(records[1].line == 4);

  write_text(path, "a\t\n");
  CHECK_THROWS_AS(io::read_corpus(path), io::DataError);
  write_text(path, "\tCCO\n");
  CHECK_THROWS_AS(io::read_corpus(path), io::DataError);
  CHECK_THROWS_AS(io::read_corpus(dir.file("missing.smi")), io::DataError);
}

TEST_CASE("io primitives: atomic writes, digests, jsonl round trips") {
  TempDir dir("io");
  const std::string path = dir.file("blob.txt");
  io::write_file_atomic(path, "two\nlines\n");
  CHECK(io::read_file(path) == "two\nlines\n");
  CHECK(io::file_digest(path) == io::file_digest(path));
  CHECK(io::hex64(0) == "0000000000000000");
  CHECK(io::hex64(0xdeadbeefull) == "00000000deadbeef");

  std::vector<PredictionRecord> preds(2);
  preds[0].id = "a";
  preds[0].candidates = {{"CCO", -0.125}, {"CC", -2.5}};
  preds[1].id = "b";
  preds[1].candidates = {{"c1ccccc1", -1.0}};
  const std::string pred_path = dir.file("preds.jsonl");
  io::write_predictions(pred_path, preds);
  const auto loaded = io::read_predictions(pred_path);
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].id == "a");
  REQUIRE(loaded[0].candidates.size() == 2);
  CHECK(loaded[0].candidates[0].smiles == "CCO");
  CHECK(loaded[0].candidates[0].logprob == -0.125);
  CHECK(loaded[1].candidates[0].smiles == "c1ccccc1");
  CHECK_FALSE(loaded[0].malformed);

  const std::string fp_path = dir.file("broken.jsonl");
  write_text(fp_path, "{\"id\": \"x\", \"width\": oops}\n");
  CHECK_THROWS_AS(io::read_fingerprints(fp_path), io::DataError);
}

TEST_CASE("full pipeline: fingerprint, train, decode, evaluate") {
  TempDir dir("pipeline");
  const std::string corpus = dir.file("train.smi");
  const std::string fp_path = dir.file("train.fp.jsonl");
  const std::string model_path = dir.file("model.bin");
  const std::string pred_path = dir.file("preds.jsonl");
  const std::string report_path = dir.file("report.json");
  write_text(corpus, kCorpus);

  // Fingerprint.
  cli::FingerprintArgs fp_args;
  fp_args.corpus_path = corpus;
  fp_args.out_path = fp_path;
  fp_args.radius = 2;
  fp_args.width = 64;
  REQUIRE(cli::cmd_fingerprint(fp_args) == cli::kExitOk);
  const auto fps = io::read_fingerprints(fp_path);
  REQUIRE(fps.size() == 4);
  const std::string gen = "fnv1a64-morgan/r2/w64/v1";
  for (const auto& rec : fps) {
    CHECK(rec.generator == gen);
    CHECK(rec.width == 64);
    REQUIRE(rec.onbits.has_value());
  }
  CHECK(*fps[0].onbits ==
        fingerprint_to_onbits(morgan_fingerprint(parse_smiles("CCO"), 2, 64)));
  REQUIRE(fs::exists(fp_path + ".manifest.json"));
  {
    const auto manifest = nlohmann::json::parse(io::read_file(fp_path + ".manifest.json"));
    CHECK(manifest.at("fingerprint_generator") == gen);
    CHECK(manifest.at("version") == cli::kToolVersion);
    CHECK(manifest.at("outputs").contains(fp_path));
  }

  // Train.
  REQUIRE(cli::cmd_train(tiny_train_args(corpus, fp_path, model_path)) == cli::kExitOk);
  REQUIRE(fs::exists(model_path));
  {
    const std::string loss = io::read_file(model_path + ".loss.tsv");
    CHECK(loss.rfind("epoch\tloss\n", 0) == 0);
    CHECK(std::count(loss.begin(), loss.end(), '\n') == 4);  // header + 3 epochs
    const auto manifest = nlohmann::json::parse(io::read_file(model_path + ".manifest.json"));
    CHECK(manifest.at("fingerprint_generator") == gen);
    CHECK(manifest.contains("model_hash"));
    CHECK(manifest.contains("vocab_hash"));
    CHECK(manifest.at("seed") == 9);
  }
  std::ifstream model_in(model_path, std::ios::binary);
  const ToyTransformer model = ToyTransformer::load(model_in);
  CHECK(model.generator_id() == gen);
  CHECK(model.fingerprint_width() == 64);

  // Decode, then check the file carries exactly what the library computes.
  cli::DecodeArgs de_args;
  de_args.model_path = model_path;
  de_args.fp_path = fp_path;
  de_args.out_path = pred_path;
  de_args.threshold = 0.5;
  de_args.beam = 3;
  de_args.max_len = 12;
  REQUIRE(cli::cmd_decode(de_args) == cli::kExitOk);
  const auto preds = io::read_predictions(pred_path);
  REQUIRE(preds.size() == 4);
  for (size_t i = 0; i < preds.size(); ++i) {
    CHECK(preds[i].id == fps[i].id);
    const CandidateSet expected = beam_search(model, *fps[i].onbits, 3, 12);
    REQUIRE(preds[i].candidates.size() == expected.size());
    for (size_t c = 0; c < expected.size(); ++c) {
      CHECK(preds[i].candidates[c].smiles == expected[c].smiles);
      CHECK(preds[i].candidates[c].logprob ==
            doctest::Approx(expected[c].logprob).epsilon(1e-12));
    }
  }

  // Threaded decode writes byte-identical output.
  cli::DecodeArgs parallel = de_args;
  parallel.out_path = dir.file("preds_j2.jsonl");
  parallel.jobs = 2;
  REQUIRE(cli::cmd_decode(parallel) == cli::kExitOk);
  CHECK(io::file_digest(parallel.out_path) == io::file_digest(pred_path));

  // Evaluate against the training corpus as truth.
  cli::EvaluateArgs ev_args;
  ev_args.predictions_path = pred_path;
  ev_args.truth_path = corpus;
  ev_args.out_report = report_path;
  ev_args.ks = {1, 3};
  REQUIRE(cli::cmd_evaluate(ev_args) == cli::kExitOk);
  REQUIRE(fs::exists(report_path));
  REQUIRE(fs::exists(report_path + ".tsv"));
  REQUIRE(fs::exists(report_path + ".manifest.json"));
  {
    const auto report = nlohmann::json::parse(io::read_file(report_path));
    CHECK(report.at("evaluated_count") == 4);
    CHECK(report.at("failed_count") == 0);
    REQUIRE(report.at("aggregate").size() == 2);

    // The written report is exactly what the library evaluates.
    std::map<std::string, std::string> truth;
    for (const auto& rec : io::read_corpus(corpus)) truth[rec.id] = rec.smiles;
    EvalConfig config;
    config.ks = {1, 3};
    const MetricsReport direct = evaluate_run(io::read_predictions(pred_path), truth, config);
    CHECK(direct.to_json() == io::read_file(report_path));
  }

  // Atomic writes leave no temp files behind.
  for (const auto& entry : fs::directory_iterator(dir.path)) {
    CHECK(entry.path().string().find(".tmp") == std::string::npos);
  }
}

TEST_CASE("fingerprinting skips bad lines and reruns byte for byte") {
  TempDir dir("fp");
  const std::string corpus = dir.file("c.smi");
  write_text(corpus, "a\tCCO\nb\t((\nc\tCC\n");
  cli::FingerprintArgs args;
  args.corpus_path = corpus;
  args.out_path = dir.file("out.jsonl");
  args.width = 64;
  REQUIRE(cli::cmd_fingerprint(args) == cli::kExitOk);
  const auto fps = io::read_fingerprints(args.out_path);
  REQUIRE(fps.size() == 2);  // the unparseable line is dropped with a warning
  CHECK(fps[0].id == "a");
  CHECK(fps[1].id == "c");

  const std::uint64_t first = io::file_digest(args.out_path);
  REQUIRE(cli::cmd_fingerprint(args) == cli::kExitOk);
  CHECK(io::file_digest(args.out_path) == first);

  args.radius = -1;
  CHECK(cli::cmd_fingerprint(args) == cli::kExitData);
  args.radius = 2;
  args.corpus_path = dir.file("absent.smi");
  CHECK(cli::cmd_fingerprint(args) == cli::kExitData);
}

TEST_CASE("training rejects unusable inputs") {
  TempDir dir("train_err");
  const std::string corpus = dir.file("c.smi");
  const std::string fp_path = dir.file("fp.jsonl");
  write_text(corpus, kCorpus);
  cli::FingerprintArgs fp_args;
  fp_args.corpus_path = corpus;
  fp_args.out_path = fp_path;
  fp_args.width = 64;
  REQUIRE(cli::cmd_fingerprint(fp_args) == cli::kExitOk);

  auto args = tiny_train_args(corpus, fp_path, dir.file("m.bin"));
  args.epochs = 0;
  CHECK(cli::cmd_train(args) == cli::kExitData);

  // Corpus ids disjoint from fingerprint ids: empty join.
  const std::string other = dir.file("other.smi");
  write_text(other, "x1\tCCO\nx2\tCC\n");
  args = tiny_train_args(other, fp_path, dir.file("m.bin"));
  CHECK(cli::cmd_train(args) == cli::kExitData);

  // A token cap nothing fits under filters every example away.
  args = tiny_train_args(corpus, fp_path, dir.file("m.bin"));
  args.max_tokens = 3;
  CHECK(cli::cmd_train(args) == cli::kExitData);
}

TEST_CASE("training is seed-deterministic") {
  TempDir dir("train_det");
  const std::string corpus = dir.file("c.smi");
  const std::string fp_path = dir.file("fp.jsonl");
  write_text(corpus, "a\tCCO\nb\tCC\n");
  cli::FingerprintArgs fp_args;
  fp_args.corpus_path = corpus;
  fp_args.out_path = fp_path;
  fp_args.width = 64;
  REQUIRE(cli::cmd_fingerprint(fp_args) == cli::kExitOk);

  auto args = tiny_train_args(corpus, fp_path, dir.file("m1.bin"));
  args.epochs = 1;
  REQUIRE(cli::cmd_train(args) == cli::kExitOk);
  args.out_model = dir.file("m2.bin");
  REQUIRE(cli::cmd_train(args) == cli::kExitOk);
  CHECK(io::file_digest(dir.file("m1.bin")) == io::file_digest(dir.file("m2.bin")));
  CHECK(io::file_digest(dir.file("m1.bin") + ".loss.tsv") ==
        io::file_digest(dir.file("m2.bin") + ".loss.tsv"));

  args.out_model = dir.file("m3.bin");
  args.seed = 10;
  REQUIRE(cli::cmd_train(args) == cli::kExitOk);
  CHECK(io::file_digest(dir.file("m1.bin")) != io::file_digest(dir.file("m3.bin")));
}

TEST_CASE("decoding enforces provenance and size contracts") {
  TempDir dir("decode");
  const std::string corpus = dir.file("c.smi");
  const std::string fp_path = dir.file("fp.jsonl");
  const std::string model_path = dir.file("m.bin");
  write_text(corpus, kCorpus);
  cli::FingerprintArgs fp_args;
  fp_args.corpus_path = corpus;
  fp_args.out_path = fp_path;
  fp_args.width = 64;
  REQUIRE(cli::cmd_fingerprint(fp_args) == cli::kExitOk);
  auto tr = tiny_train_args(corpus, fp_path, model_path);
  tr.epochs = 1;
  REQUIRE(cli::cmd_train(tr) == cli::kExitOk);
  const std::string gen = "fnv1a64-morgan/r2/w64/v1";

  cli::DecodeArgs args;
  args.model_path = model_path;
  args.fp_path = fp_path;
  args.out_path = dir.file("preds.jsonl");
  args.beam = 2;
  args.max_len = 8;

  // A different radius tags a different generator; the model refuses it.
  cli::FingerprintArgs other = fp_args;
  other.radius = 3;
  other.out_path = dir.file("fp_r3.jsonl");
  REQUIRE(cli::cmd_fingerprint(other) == cli::kExitOk);
  cli::DecodeArgs bad = args;
  bad.fp_path = other.out_path;
  CHECK(cli::cmd_decode(bad) == cli::kExitData);

  // Same generator string but the wrong width is refused too.
  {
    std::vector<io::FingerprintRecord> narrow(1);
    narrow[0].id = "n";
    narrow[0].width = 32;
    narrow[0].onbits = OnBitSequence{1, 2};
    narrow[0].generator = gen;
    io::write_fingerprints(dir.file("fp_w32.jsonl"), narrow);
    cli::DecodeArgs w = args;
    w.fp_path = dir.file("fp_w32.jsonl");
    CHECK(cli::cmd_decode(w) == cli::kExitData);
  }

  // Mixed generator tags within one file are refused outright.
  {
    std::vector<io::FingerprintRecord> mixed(2);
    mixed[0].id = "m1";
    mixed[0].width = 64;
    mixed[0].onbits = OnBitSequence{1};
    mixed[0].generator = gen;
    mixed[1] = mixed[0];
    mixed[1].id = "m2";
    mixed[1].generator = "someone-else/v2";
    io::write_fingerprints(dir.file("fp_mixed.jsonl"), mixed);
    cli::DecodeArgs m = args;
    m.fp_path = dir.file("fp_mixed.jsonl");
    CHECK(cli::cmd_decode(m) == cli::kExitData);
  }

  // Garbage model bytes are a data error, not a crash.
  write_text(dir.file("garbage.bin"), "not a model at all");
  cli::DecodeArgs g = args;
  g.model_path = dir.file("garbage.bin");
  CHECK(cli::cmd_decode(g) == cli::kExitData);

  cli::DecodeArgs z = args;
  z.beam = 0;
  CHECK(cli::cmd_decode(z) == cli::kExitData);

  // Probability fingerprints go through the inclusive 0.5 threshold.
  {
    std::ifstream in(model_path, std::ios::binary);
    const ToyTransformer model = ToyTransformer::load(in);
    std::vector<io::FingerprintRecord> probs(1);
    probs[0].id = "p";
    probs[0].width = 64;
    std::vector<double> v(64, 0.1);
    v[1] = 0.5;
    v[5] = 0.5;
    v[9] = 0.9;
    probs[0].probs = v;
    probs[0].generator = gen;
    io::write_fingerprints(dir.file("fp_probs.jsonl"), probs);
    cli::DecodeArgs p = args;
    p.fp_path = dir.file("fp_probs.jsonl");
    p.out_path = dir.file("preds_probs.jsonl");
    REQUIRE(cli::cmd_decode(p) == cli::kExitOk);
    const auto got = io::read_predictions(p.out_path);
    REQUIRE(got.size() == 1);
    const CandidateSet expected = beam_search(model, {1, 5, 9}, args.beam, args.max_len);
    REQUIRE(got[0].candidates.size() == expected.size());
    for (size_t c = 0; c < expected.size(); ++c) {
      CHECK(got[0].candidates[c].smiles == expected[c].smiles);
    }

    // An impossible threshold still decodes, just from an empty bit set.
    cli::DecodeArgs hi = p;
    hi.threshold = 1.01;
    hi.out_path = dir.file("preds_empty.jsonl");
    REQUIRE(cli::cmd_decode(hi) == cli::kExitOk);
    const auto empty_got = io::read_predictions(hi.out_path);
    REQUIRE(empty_got.size() == 1);
    const CandidateSet unconditioned = beam_search(model, {}, args.beam, args.max_len);
    REQUIRE(empty_got[0].candidates.size() == unconditioned.size());
    for (size_t c = 0; c < unconditioned.size(); ++c) {
      CHECK(empty_got[0].candidates[c].smiles == unconditioned[c].smiles);
    }
  }
}

TEST_CASE("evaluation command guards its inputs") {
  TempDir dir("eval_cmd");
  const std::string truth_path = dir.file("truth.smi");
  write_text(truth_path, "a\tCCO\n");

  std::vector<PredictionRecord> preds(1);
  preds[0].id = "a";
  preds[0].candidates = {{"CCO", -0.5}};
  const std::string pred_path = dir.file("preds.jsonl");
  io::write_predictions(pred_path, preds);

  cli::EvaluateArgs args;
  args.predictions_path = pred_path;
  args.truth_path = truth_path;
  args.out_report = dir.file("report.json");
  args.ks = {1};
  REQUIRE(cli::cmd_evaluate(args) == cli::kExitOk);
  const auto report = nlohmann::json::parse(io::read_file(args.out_report));
  CHECK(report.at("aggregate")[0].at("accuracy") == 1.0);

  // Unknown prediction id.
  preds[0].id = "zzz";
  io::write_predictions(pred_path, preds);
  CHECK(cli::cmd_evaluate(args) == cli::kExitData);

  args.bond_match = "weird";
  preds[0].id = "a";
  io::write_predictions(pred_path, preds);
  CHECK(cli::cmd_evaluate(args) == cli::kExitData);
}

TEST_CASE("malformed prediction lines become soft failures in the report") {
  TempDir dir("eval_soft");
  const std::string truth_path = dir.file("truth.smi");
  const std::string pred_path = dir.file("preds.jsonl");
  write_text(pred_path, "{\"id\": \"a\", \"candidates\": [{\"smiles\": \"CCO\", "
                        "\"logprob\": -0.5}]}\n{\"id\": \"b\", \"candidates\": oops\n");
  write_text(truth_path, "a\tCCO\n");
  const auto records = io::read_predictions(pred_path);
  REQUIRE(records.size() == 2);
  CHECK_FALSE(records[0].malformed);
  CHECK(records[1].malformed);

  // Malformed records never consult the truth table; they just count as
  // failures and stay out of the means.
  std::map<std::string, std::string> truth;
  for (const auto& rec : io::read_corpus(truth_path)) truth[rec.id] = rec.smiles;
  const MetricsReport report = evaluate_run(records, truth);
  CHECK(report.evaluated_count == 1);
  CHECK(report.failed_count == 1);
  for (const auto& agg : report.aggregates) CHECK(agg.accuracy == doctest::Approx(1.0));
}

TEST_CASE("binary exit codes and version banner") {
  const std::string bin = std::string("\"") + FP2MOL_BIN + "\"";
  CHECK(run_status(bin + " >/dev/null 2>&1") == 1);
  CHECK(run_status(bin + " frobnicate >/dev/null 2>&1") == 1);
  CHECK(run_status(bin + " fingerprint >/dev/null 2>&1") == 1);
  CHECK(run_status(bin + " decode --nonsense-flag a b c >/dev/null 2>&1") == 1);
  CHECK(run_status(bin + " --version >/dev/null 2>&1") == 0);
  CHECK(run_capture(bin + " --version 2>/dev/null")
            .find(std::string("fp2mol ") + cli::kToolVersion) != std::string::npos);

  TempDir dir("exit_codes");
  CHECK(run_status(bin + " fingerprint /definitely/not/here.smi " +
                   dir.file("out.jsonl") + " >/dev/null 2>&1") == 2);
}
