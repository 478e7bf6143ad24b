#pragma once

#include <string>
#include <vector>

namespace fp2mol::cli {

inline constexpr const char* kToolVersion = "0.3.1";

// Exit codes shared by the subcommands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitInternal = 3;

struct FingerprintArgs {
  std::string corpus_path;
  std::string out_path;
  int radius = 2;
  int width = 4096;
};

struct TrainArgs {
  std::string corpus_path;
  std::string fp_path;
  std::string out_model;
  double learning_rate = 5e-4;
  int batch_size = 128;
  int epochs = 6;
  unsigned long long seed = 0;
  int embed_dim = 128;
  int layers = 2;
  int heads = 4;
  int feedforward_dim = 256;
  int max_onbits = 512;
  int max_tokens = 160;
};

struct DecodeArgs {
  std::string model_path;
  std::string fp_path;
  std::string out_path;
  double threshold = 0.5;
  int beam = 10;
  int max_len = 160;
  int jobs = 1;
};

struct EvaluateArgs {
  std::string predictions_path;
  std::string truth_path;
  std::string out_report;
  std::vector<int> ks = {1, 10};
  double mces_penalty = 100.0;
  std::string bond_match = "strict";  // or "any"
  int mces_max_nodes = 20;
  double mces_budget_s = 5.0;
  int jobs = 1;
};

int cmd_fingerprint(const FingerprintArgs& args);
int cmd_train(const TrainArgs& args);
int cmd_decode(const DecodeArgs& args);
int cmd_evaluate(const EvaluateArgs& args);

}  // namespace fp2mol::cli
