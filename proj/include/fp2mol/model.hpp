#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "fp2mol/decoder.hpp"

namespace fp2mol {

class TrainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ToyTransformerParams {
  int embed_dim = 128;
  int layers = 2;
  int heads = 4;
  int feedforward_dim = 256;
  int max_onbits = 512;  // longest accepted on-bit list
  int max_tokens = 160;  // longest accepted token sequence, BOS/EOS included
};

struct TrainConfig {
  double learning_rate = 5e-4;
  int batch_size = 128;
  int epochs = 6;
  std::uint64_t seed = 0;
};

struct TrainExample {
  OnBitSequence onbits;
  std::vector<int> token_ids;  // BOS .. EOS
};

// Encoder-decoder transformer over fingerprint on-bit sets. The encoder sees
// one embedding per on-bit index behind a learned sentinel (order-free, and
// the sentinel keeps empty fingerprints representable); the decoder is a
// pre-LN causal transformer with cross attention. Double precision
// throughout; all math is hand-rolled on Eigen so gradients can be checked
// against finite differences.
class ToyTransformer : public DecoderModel {
 public:
  ToyTransformer(const ToyTransformerParams& params, Vocab vocab, int fingerprint_width,
                 std::uint64_t seed);

  static ToyTransformer train(const ToyTransformerParams& params, Vocab vocab,
                              int fingerprint_width, const std::vector<TrainExample>& data,
                              const TrainConfig& config,
                              std::vector<double>* epoch_losses = nullptr);

  // Adam over shuffled batches, continuing from the current weights.
  // Optimizer state is local to the call. Throws TrainError when the loss or
  // any weight turns non-finite.
  void fit(const std::vector<TrainExample>& data, const TrainConfig& config,
           std::vector<double>* epoch_losses = nullptr);

  // Mean cross entropy per predicted token.
  double loss(const std::vector<TrainExample>& data) const;
  // Flat gradient alongside the loss, laid out like the parameter vector.
  std::pair<double, std::vector<double>> loss_and_gradient(
      const std::vector<TrainExample>& data) const;

  int parameter_count() const;
  double parameter(int index) const;
  void set_parameter(int index, double value);

  const Vocab& vocab() const override { return vocab_; }
  int fingerprint_width() const override { return width_; }
  std::unique_ptr<DecoderSession> begin(const OnBitSequence& onbits) const override;

  const ToyTransformerParams& params() const { return params_; }
  const std::string& generator_id() const { return generator_id_; }
  void set_generator_id(std::string id) { generator_id_ = std::move(id); }

  void save(std::ostream& out) const;
  static ToyTransformer load(std::istream& in);
  // FNV digest of the serialized form.
  std::uint64_t digest() const;

  struct Impl;  // out-of-line math, defined with the member layout in view

 private:
  friend struct Impl;

  ToyTransformerParams params_;
  Vocab vocab_;
  int width_ = 0;
  std::string generator_id_;
  std::vector<Eigen::MatrixXd> tensors_;
  Eigen::MatrixXd positional_;  // max_tokens x embed_dim, fixed sinusoids

  // Tensor indices, resolved once at construction.
  struct AttnIdx {
    int wq, bq, wk, bk, wv, bv, wo, bo;
  };
  struct LnIdx {
    int gamma, beta;
  };
  struct FfnIdx {
    int w1, b1, w2, b2;
  };
  struct EncLayerIdx {
    LnIdx ln1;
    AttnIdx attn;
    LnIdx ln2;
    FfnIdx ffn;
  };
  struct DecLayerIdx {
    LnIdx ln1;
    AttnIdx self_attn;
    LnIdx ln2;
    AttnIdx cross_attn;
    LnIdx ln3;
    FfnIdx ffn;
  };
  int enc_embed_ = -1;
  int dec_embed_ = -1;
  std::vector<EncLayerIdx> enc_layers_;
  std::vector<DecLayerIdx> dec_layers_;
  LnIdx enc_final_{};
  LnIdx dec_final_{};
  int out_w_ = -1;
  int out_b_ = -1;

  void register_tensors();
  void init_weights(std::uint64_t seed);
};

}  // namespace fp2mol
