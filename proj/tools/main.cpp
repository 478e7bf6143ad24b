#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "fp2mol/commands.hpp"

namespace {

// Env override names follow FP2MOL_<SUBCOMMAND>_<OPTION>.
std::string env_name(const std::string& cmd, const std::string& opt) {
  std::string out = "FP2MOL_" + cmd + "_" + opt;
  for (char& c : out) {
    if (c == '-') c = '_';
    c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fingerprint-to-structure toolkit"};
  app.set_version_flag("--version", std::string("fp2mol ") + fp2mol::cli::kToolVersion);
  app.set_config("--config", "", "Read defaults from a config file (flags win)");
  app.require_subcommand(1);

  fp2mol::cli::FingerprintArgs fp_args;
  auto* fp_cmd = app.add_subcommand("fingerprint", "Fingerprint a corpus of structures");
  fp_cmd->add_option("corpus", fp_args.corpus_path, "Corpus file, one structure per line")
      ->required();
  fp_cmd->add_option("out", fp_args.out_path, "Output JSONL of on-bit records")->required();
  fp_cmd->add_option("--radius", fp_args.radius, "Circular environment radius")
      ->envname(env_name("fingerprint", "radius"));
  fp_cmd->add_option("--width", fp_args.width, "Bit width after folding")
      ->envname(env_name("fingerprint", "width"));

  fp2mol::cli::TrainArgs tr_args;
  auto* tr_cmd = app.add_subcommand("train", "Train a decoder on fingerprint/structure pairs");
  tr_cmd->add_option("corpus", tr_args.corpus_path, "Corpus file")->required();
  tr_cmd->add_option("fingerprints", tr_args.fp_path, "Fingerprint JSONL")->required();
  tr_cmd->add_option("out", tr_args.out_model, "Output model file")->required();
  tr_cmd->add_option("--lr", tr_args.learning_rate, "Learning rate")
      ->envname(env_name("train", "lr"));
  tr_cmd->add_option("--batch", tr_args.batch_size, "Batch size")
      ->envname(env_name("train", "batch"));
  tr_cmd->add_option("--epochs", tr_args.epochs, "Training epochs")
      ->envname(env_name("train", "epochs"));
  tr_cmd->add_option("--seed", tr_args.seed, "Seed for all randomness")
      ->envname(env_name("train", "seed"));
  tr_cmd->add_option("--embed-dim", tr_args.embed_dim, "Embedding width")
      ->envname(env_name("train", "embed-dim"));
  tr_cmd->add_option("--layers", tr_args.layers, "Encoder/decoder layers")
      ->envname(env_name("train", "layers"));
  tr_cmd->add_option("--heads", tr_args.heads, "Attention heads")
      ->envname(env_name("train", "heads"));
  tr_cmd->add_option("--ff-dim", tr_args.feedforward_dim, "Feedforward width")
      ->envname(env_name("train", "ff-dim"));
  tr_cmd->add_option("--max-onbits", tr_args.max_onbits, "On-bit cap per example")
      ->envname(env_name("train", "max-onbits"));
  tr_cmd->add_option("--max-tokens", tr_args.max_tokens, "Token cap per example")
      ->envname(env_name("train", "max-tokens"));

  fp2mol::cli::DecodeArgs de_args;
  auto* de_cmd = app.add_subcommand("decode", "Decode structures from probability fingerprints");
  de_cmd->add_option("model", de_args.model_path, "Model file")->required();
  de_cmd->add_option("fingerprints", de_args.fp_path, "Probability fingerprint JSONL")
      ->required();
  de_cmd->add_option("out", de_args.out_path, "Output predictions JSONL")->required();
  de_cmd->add_option("--threshold", de_args.threshold, "On-bit probability threshold")
      ->envname(env_name("decode", "threshold"));
  de_cmd->add_option("--beam", de_args.beam, "Beam width")->envname(env_name("decode", "beam"));
  de_cmd->add_option("--max-len", de_args.max_len, "Token budget per candidate")
      ->envname(env_name("decode", "max-len"));
  de_cmd->add_option("--jobs", de_args.jobs, "Worker threads")
      ->envname(env_name("decode", "jobs"));

  fp2mol::cli::EvaluateArgs ev_args;
  auto* ev_cmd = app.add_subcommand("evaluate", "Score predictions against a truth corpus");
  ev_cmd->add_option("predictions", ev_args.predictions_path, "Predictions JSONL")->required();
  ev_cmd->add_option("truth", ev_args.truth_path, "Truth corpus")->required();
  ev_cmd->add_option("out", ev_args.out_report, "Output report JSON")->required();
  ev_cmd->add_option("--k", ev_args.ks, "Cutoffs, e.g. --k 1,10")
      ->delimiter(',')
      ->envname(env_name("evaluate", "k"));
  ev_cmd->add_option("--mces-penalty", ev_args.mces_penalty, "Distance when nothing parses")
      ->envname(env_name("evaluate", "mces-penalty"));
  ev_cmd->add_option("--bond-match", ev_args.bond_match, "Bond matching: strict or any")
      ->envname(env_name("evaluate", "bond-match"));
  ev_cmd->add_option("--mces-max-nodes", ev_args.mces_max_nodes,
                     "Exactness cap on heavy atom count")
      ->envname(env_name("evaluate", "mces-max-nodes"));
  ev_cmd->add_option("--mces-budget-s", ev_args.mces_budget_s, "Per-pair time budget, seconds")
      ->envname(env_name("evaluate", "mces-budget-s"));
  ev_cmd->add_option("--jobs", ev_args.jobs, "Worker threads")
      ->envname(env_name("evaluate", "jobs"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : fp2mol::cli::kExitUsage;
  }

  try {
    if (fp_cmd->parsed()) return fp2mol::cli::cmd_fingerprint(fp_args);
    if (tr_cmd->parsed()) return fp2mol::cli::cmd_train(tr_args);
    if (de_cmd->parsed()) return fp2mol::cli::cmd_decode(de_args);
    if (ev_cmd->parsed()) return fp2mol::cli::cmd_evaluate(ev_args);
  } catch (const std::exception& e) {
    std::cerr << "fp2mol: internal error: " << e.what() << "\n";
    return fp2mol::cli::kExitInternal;
  }
  return fp2mol::cli::kExitUsage;
}
