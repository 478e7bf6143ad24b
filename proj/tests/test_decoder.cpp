#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "fp2mol/decoder.hpp"
#include "fp2mol/model.hpp"
#include "fp2mol/rng.hpp"
#include "fp2mol/smiles.hpp"

using namespace fp2mol;

namespace {

// Fixed per-position distributions handed in as probabilities; rows are
// log-normalized once so scores are exact log-softmax outputs.
class TableMock : public DecoderModel {
 public:
  TableMock(Vocab vocab, std::vector<std::vector<double>> prob_rows)
      : vocab_(std::move(vocab)) {
    for (auto& probs : prob_rows) {
      REQUIRE(static_cast<int>(probs.size()) == vocab_.size());
      double sum = 0.0;
      for (double& p : probs) {
        p = std::max(p, 1e-12);
        sum += p;
      }
      std::vector<double> row(probs.size());
      for (size_t i = 0; i < probs.size(); ++i) row[i] = std::log(probs[i] / sum);
      rows_.push_back(std::move(row));
    }
  }

  const Vocab& vocab() const override { return vocab_; }
  int fingerprint_width() const override { return 16; }
  std::unique_ptr<DecoderSession> begin(const OnBitSequence&) const override {
    class Session : public DecoderSession {
     public:
      explicit Session(const TableMock& m) : m_(m) {}
      std::vector<double> score_prefix(const std::vector<int>& prefix) override {
        return m_.rows_.at(prefix.size() - 1);
      }

     private:
      const TableMock& m_;
    };
    return std::make_unique<Session>(*this);
  }

  const std::vector<double>& row(size_t position) const { return rows_.at(position); }

 private:
  Vocab vocab_;
  std::vector<std::vector<double>> rows_;
};

// Deterministic prefix-sensitive scores from a hash of the prefix.
class HashMock : public DecoderModel {
 public:
  HashMock(Vocab vocab, std::uint64_t seed) : vocab_(std::move(vocab)), seed_(seed) {}

  const Vocab& vocab() const override { return vocab_; }
  int fingerprint_width() const override { return 16; }
  std::unique_ptr<DecoderSession> begin(const OnBitSequence&) const override {
    class Session : public DecoderSession {
     public:
      explicit Session(const HashMock& m) : m_(m) {}
      std::vector<double> score_prefix(const std::vector<int>& prefix) override {
        std::uint64_t h = m_.seed_;
        for (int id : prefix) h = (h ^ static_cast<std::uint64_t>(id + 31)) * 0x100000001b3ull;
        std::vector<double> row(static_cast<size_t>(m_.vocab_.size()));
        double mx = -1e18;
        for (size_t i = 0; i < row.size(); ++i) {
          Rng rng(h + i * 1315423911ull);
          row[i] = -4.0 * rng.uniform();
          mx = std::max(mx, row[i]);
        }
        double lse = 0.0;
        for (double v : row) lse += std::exp(v - mx);
        lse = mx + std::log(lse);
        for (double& v : row) v -= lse;
        return row;
      }

     private:
      const HashMock& m_;
    };
    return std::make_unique<Session>(*this);
  }

 private:
  Vocab vocab_;
  std::uint64_t seed_;
};

struct Enumerated {
  std::vector<int> ids;
  double logprob;
};

// All complete sequences within the budget, merged by canonical form the
// way the beam merges, best first with the beam's tie rule.
std::vector<Enumerated> enumerate_complete(const DecoderModel& model, int max_len) {
  const Vocab& vocab = model.vocab();
  auto session = model.begin({});
  std::vector<Enumerated> raw;
  std::vector<std::pair<std::vector<int>, double>> frontier{{{Vocab::kBos}, 0.0}};
  while (!frontier.empty()) {
    std::vector<std::pair<std::vector<int>, double>> next;
    for (auto& [ids, lp] : frontier) {
      if (static_cast<int>(ids.size()) - 1 >= max_len) continue;
      const std::vector<double> row = session->score_prefix(ids);
      for (int tok = 0; tok < vocab.size(); ++tok) {
        if (tok == Vocab::kPad || tok == Vocab::kBos || tok == Vocab::kUnk) continue;
        std::vector<int> grown = ids;
        grown.push_back(tok);
        if (tok == Vocab::kEos) {
          raw.push_back({std::move(grown), lp + row[tok]});
        } else {
          next.emplace_back(std::move(grown), lp + row[tok]);
        }
      }
    }
    frontier = std::move(next);
  }
  auto better = [](const Enumerated& x, const Enumerated& y) {
    if (x.logprob != y.logprob) return x.logprob > y.logprob;
    return x.ids < y.ids;
  };
  std::map<std::string, Enumerated> merged;
  for (auto& e : raw) {
    const std::string surface = vocab.decode(e.ids);
    std::string key;
    try {
      key = "c:" + write_smiles(parse_smiles(surface));
    } catch (const std::exception&) {
      key = "r:" + surface;
    }
    auto it = merged.find(key);
    if (it == merged.end() || better(e, it->second)) merged[key] = std::move(e);
  }
  std::vector<Enumerated> out;
  out.reserve(merged.size());
  for (auto& [key, e] : merged) out.push_back(std::move(e));
  std::sort(out.begin(), out.end(), better);
  return out;
}

double rescore(const DecoderModel& model, const Candidate& cand) {
  auto session = model.begin({});
  double lp = 0.0;
  std::vector<int> prefix{Vocab::kBos};
  for (size_t i = 1; i < cand.token_ids.size(); ++i) {
    lp += session->score_prefix(prefix)[static_cast<size_t>(cand.token_ids[i])];
    prefix.push_back(cand.token_ids[i]);
  }
  return lp;
}

}  // namespace

TEST_CASE("mock sessions echo their tables") {
  const Vocab vocab({"N", "P"});
  const TableMock model(vocab, {{0, 0, 0.5, 0, 0.3, 0.2}, {0, 0, 0.8, 0, 0.1, 0.1}});
  auto session = model.begin({});
  CHECK(session->score_prefix({Vocab::kBos}) == model.row(0));
  CHECK(session->score_prefix({Vocab::kBos, 4}) == model.row(1));
  CHECK(model.score_next({}, {Vocab::kBos}) == model.row(0));
}

TEST_CASE("beam 2 on a hand-set table matches exhaustive enumeration") {
  const Vocab vocab({"N", "P"});
  // EOS dominates everywhere, so no prefix a narrow beam drops can hide a
  // better completion.
  const std::vector<double> row{0, 0, 0.5, 0, 0.3, 0.2};
  const TableMock model(vocab, {row, row, row});
  const auto all = enumerate_complete(model, 3);
  const CandidateSet got = beam_search(model, {}, 2, 3);
  REQUIRE(got.size() == 2);
  for (size_t i = 0; i < got.size(); ++i) {
    CHECK(got[i].token_ids == all[i].ids);
    CHECK(got[i].logprob == doctest::Approx(all[i].logprob).epsilon(1e-12));
  }
  CHECK(got[0].token_ids == std::vector<int>{Vocab::kBos, Vocab::kEos});
  CHECK(got[1].token_ids == std::vector<int>{Vocab::kBos, 4, Vocab::kEos});
  CHECK(got[1].smiles == "N");
}

TEST_CASE("canonically equal spellings merge keeping the better path") {
  const Vocab vocab({"C", "O"});  // ids 4 and 5
  const TableMock model(vocab, {{0, 0, 0.3, 0, 0.5, 0.2},
                                {0, 0, 0.3, 0, 0.2, 0.5},
                                {0, 0, 0.8, 0, 0.1, 0.1}});
  // Beam 32 exceeds every per-step expansion count: nothing is pruned.
  const CandidateSet got = beam_search(model, {}, 32, 3);
  const Candidate* methanol = nullptr;
  for (const Candidate& cand : got) {
    CHECK(cand.smiles != "OC");  // merged into the better spelling
    if (cand.smiles == "CO") methanol = &cand;
  }
  REQUIRE(methanol != nullptr);
  const double co_path = model.row(0)[4] + model.row(1)[5] + model.row(2)[Vocab::kEos];
  CHECK(methanol->logprob == doctest::Approx(co_path).epsilon(1e-12));
  CHECK(methanol->token_ids == std::vector<int>{Vocab::kBos, 4, 5, Vocab::kEos});

  // Distinct structures survive side by side.
  bool saw_cc = false;
  bool saw_oo = false;
  for (const Candidate& cand : got) {
    saw_cc = saw_cc || cand.smiles == "CC";
    saw_oo = saw_oo || cand.smiles == "OO";
  }
  CHECK(saw_cc);
  CHECK(saw_oo);
}

TEST_CASE("no completion returns the best effort, flagged") {
  const Vocab vocab({"C", "O"});
  const std::vector<double> row{0, 0, 1e-9, 0, 0.9, 0.1};
  const TableMock model(vocab, {row, row, row});
  const CandidateSet got = beam_search(model, {}, 2, 3);
  REQUIRE(got.size() == 1);
  CHECK_FALSE(got[0].complete);
  CHECK(got[0].token_ids == std::vector<int>{Vocab::kBos, 4, 4, 4});
  const double expected = model.row(0)[4] + model.row(1)[4] + model.row(2)[4];
  CHECK(got[0].logprob == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("wider beams never score worse and candidates re-verify") {
  const Vocab vocab({"C", "O"});
  for (std::uint64_t seed = 1; seed <= 15; ++seed) {
    const HashMock model(vocab, seed);
    const CandidateSet b1 = beam_search(model, {}, 1, 5);
    const CandidateSet b10 = beam_search(model, {}, 10, 5);
    REQUIRE_FALSE(b10.empty());
    if (!b1.empty() && b1[0].complete && b10[0].complete) {
      CHECK(b10[0].logprob >= b1[0].logprob - 1e-12);
    }
    for (size_t i = 1; i < b10.size(); ++i) {
      CHECK(b10[i - 1].logprob >= b10[i].logprob);
    }
    for (const Candidate& cand : b10) {
      if (!cand.complete) continue;
      CHECK(std::abs(rescore(model, cand) - cand.logprob) < 1e-6);
    }
  }
}

TEST_CASE("toy transformer emits normalized distributions") {
  ToyTransformerParams params;
  params.embed_dim = 16;
  params.layers = 1;
  params.heads = 2;
  params.feedforward_dim = 32;
  params.max_onbits = 8;
  params.max_tokens = 8;
  const Vocab vocab = Vocab::build({"CCO", "CCN"});
  const ToyTransformer model(params, vocab, 32, 5);

  for (const OnBitSequence& onbits : {OnBitSequence{}, OnBitSequence{1, 5, 7}}) {
    auto session = model.begin(onbits);
    for (const std::vector<int>& prefix :
         {std::vector<int>{Vocab::kBos}, std::vector<int>{Vocab::kBos, vocab.id("C")}}) {
      const std::vector<double> row = session->score_prefix(prefix);
      REQUIRE(static_cast<int>(row.size()) == vocab.size());
      double sum = 0.0;
      for (double v : row) sum += std::exp(v);
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
      // Same inputs, same outputs.
      CHECK(model.begin(onbits)->score_prefix(prefix) == row);
    }
  }
}

TEST_CASE("training reduces loss deterministically") {
  ToyTransformerParams params;
  params.embed_dim = 16;
  params.layers = 1;
  params.heads = 2;
  params.feedforward_dim = 32;
  params.max_onbits = 8;
  params.max_tokens = 8;
  const Vocab vocab = Vocab::build({"CCO", "CCN"});
  const std::vector<TrainExample> data = {
      {{1, 2}, vocab.encode("CCO")},
      {{3}, vocab.encode("CCN")},
  };
  TrainConfig cfg;
  cfg.learning_rate = 1e-2;
  cfg.batch_size = 2;
  cfg.epochs = 5;
  cfg.seed = 11;

  ToyTransformer a(params, vocab, 32, 11);
  const double initial = a.loss(data);
  std::vector<double> losses;
  a.fit(data, cfg, &losses);
  REQUIRE(losses.size() == 5);
  for (double l : losses) CHECK(std::isfinite(l));
  // Logged losses are measured before each batch update; with everything in
  // one batch the first entry is exactly the starting loss.
  CHECK(losses[0] == doctest::Approx(initial).epsilon(1e-12));
  CHECK(losses.back() < initial);
  CHECK(a.loss(data) < initial);

  ToyTransformer b(params, vocab, 32, 11);
  b.fit(data, cfg);
  CHECK(b.digest() == a.digest());
  for (int i = 0; i < a.parameter_count(); ++i) CHECK(a.parameter(i) == b.parameter(i));

  ToyTransformer c(params, vocab, 32, 12);
  c.fit(data, cfg);
  CHECK(c.digest() != a.digest());
}

TEST_CASE("model files round trip bit for bit") {
  ToyTransformerParams params;
  params.embed_dim = 8;
  params.layers = 1;
  params.heads = 2;
  params.feedforward_dim = 16;
  params.max_onbits = 4;
  params.max_tokens = 6;
  ToyTransformer model(params, Vocab({"C", "O"}), 16, 3);
  model.set_generator_id("test-generator/v1");

  std::ostringstream out;
  model.save(out);
  const std::string bytes = out.str();

  std::istringstream in(bytes);
  const ToyTransformer loaded = ToyTransformer::load(in);
  CHECK(loaded.digest() == model.digest());
  CHECK(loaded.generator_id() == "test-generator/v1");
  CHECK(loaded.params().embed_dim == 8);
  for (const OnBitSequence& onbits : {OnBitSequence{}, OnBitSequence{0, 7}}) {
    CHECK(loaded.begin(onbits)->score_prefix({Vocab::kBos}) ==
          model.begin(onbits)->score_prefix({Vocab::kBos}));
  }

  std::string corrupt = bytes;
  corrupt[0] ^= 0x55;
  std::istringstream bad(corrupt);
  CHECK_THROWS(ToyTransformer::load(bad));

  std::istringstream cut(bytes.substr(0, bytes.size() / 2));
  CHECK_THROWS(ToyTransformer::load(cut));
}

TEST_CASE("prefix and on-bit validation") {
  ToyTransformerParams params;
  params.embed_dim = 8;
  params.layers = 1;
  params.heads = 2;
  params.feedforward_dim = 16;
  params.max_onbits = 4;
  params.max_tokens = 6;
  const ToyTransformer model(params, Vocab({"C", "O"}), 16, 3);

  // Oversized on-bit lists are truncated, not rejected.
  const auto truncated = model.begin({0, 1, 2, 3, 4, 5, 6, 7})->score_prefix({Vocab::kBos});
  CHECK(truncated == model.begin({0, 1, 2, 3})->score_prefix({Vocab::kBos}));

  CHECK_THROWS(model.begin({})->score_prefix({Vocab::kBos, 99}));
  CHECK_THROWS(model.begin({})->score_prefix({}));
  CHECK_THROWS(model.begin({0, 99})->score_prefix({Vocab::kBos}));
}
