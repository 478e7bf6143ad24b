#include <algorithm>
#include <bit>
#include <cmath>
#include <iostream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "fp2mol/hash.hpp"
#include "fp2mol/model.hpp"
#include "fp2mol/rng.hpp"

namespace fp2mol {
namespace {

constexpr double kLnEps = 1e-5;
constexpr double kMaskValue = -1e30;
constexpr char kMagic[8] = {'F', 'P', '2', 'M', 'O', 'L', '0', '1'};
constexpr std::uint32_t kFormatVersion = 1;

double gelu(double x) {
  const double c = 0.7978845608028654;  // sqrt(2/pi)
  const double u = c * (x + 0.044715 * x * x * x);
  return 0.5 * x * (1.0 + std::tanh(u));
}

double gelu_grad(double x) {
  const double c = 0.7978845608028654;
  const double u = c * (x + 0.044715 * x * x * x);
  const double t = std::tanh(u);
  const double du = c * (1.0 + 3.0 * 0.044715 * x * x);
  return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * du;
}

struct LnCache {
  Eigen::MatrixXd xhat;
  Eigen::VectorXd inv_std;
};

struct AttnCache {
  Eigen::MatrixXd q_in;   // normalized query-side input
  Eigen::MatrixXd kv_in;  // key/value-side input
  Eigen::MatrixXd q, k, v;
  std::vector<Eigen::MatrixXd> attn;  // per-head softmax weights
  Eigen::MatrixXd concat;
};

struct FfnCache {
  Eigen::MatrixXd input;
  Eigen::MatrixXd pre_act;
  Eigen::MatrixXd act;
};

struct EncLayerCache {
  Eigen::MatrixXd x0;
  LnCache ln1;
  AttnCache attn;
  Eigen::MatrixXd x1;
  LnCache ln2;
  FfnCache ffn;
};

struct DecLayerCache {
  Eigen::MatrixXd y0;
  LnCache ln1;
  AttnCache self_attn;
  Eigen::MatrixXd y1;
  LnCache ln2;
  AttnCache cross_attn;
  Eigen::MatrixXd y2;
  LnCache ln3;
  FfnCache ffn;
};

struct ForwardCache {
  std::vector<int> enc_ids;
  std::vector<int> dec_ids;
  Eigen::MatrixXd enc_x;
  std::vector<EncLayerCache> enc_layers;
  LnCache enc_final;
  Eigen::MatrixXd memory;
  Eigen::MatrixXd dec_y;
  std::vector<DecLayerCache> dec_layers;
  LnCache dec_final;
  Eigen::MatrixXd dec_out;
  Eigen::MatrixXd logits;
};

void put_bytes(std::ostream& out, const void* data, size_t size) {
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
}

void put_u32(std::ostream& out, std::uint32_t value) {
  unsigned char bytes[4];
  for (int i = 0; i < 4; ++i) bytes[i] = static_cast<unsigned char>(value >> (8 * i));
  put_bytes(out, bytes, 4);
}

void put_u64(std::ostream& out, std::uint64_t value) {
  unsigned char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(value >> (8 * i));
  put_bytes(out, bytes, 8);
}

void put_f64(std::ostream& out, double value) { put_u64(out, std::bit_cast<std::uint64_t>(value)); }

void put_string(std::ostream& out, const std::string& value) {
  put_u32(out, static_cast<std::uint32_t>(value.size()));
  put_bytes(out, value.data(), value.size());
}

void get_bytes(std::istream& in, void* data, size_t size) {
  in.read(static_cast<char*>(data), static_cast<std::streamsize>(size));
  if (static_cast<size_t>(in.gcount()) != size) {
    throw std::runtime_error("truncated model file");
  }
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char bytes[4];
  get_bytes(in, bytes, 4);
  std::uint32_t value = 0;
  for (int i = 0; i < 4; ++i) value |= static_cast<std::uint32_t>(bytes[i]) << (8 * i);
  return value;
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char bytes[8];
  get_bytes(in, bytes, 8);
  std::uint64_t value = 0;
  for (int i = 0; i < 8; ++i) value |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return value;
}

double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

std::string get_string(std::istream& in, std::uint32_t max_size = 1u << 20) {
  const std::uint32_t size = get_u32(in);
  if (size > max_size) throw std::runtime_error("corrupt model file: oversized string");
  std::string value(size, '\0');
  if (size > 0) get_bytes(in, value.data(), size);
  return value;
}

}  // namespace

struct ToyTransformer::Impl {
  using Model = ToyTransformer;

  static Eigen::MatrixXd layer_norm(const Model& m, const LnIdx& idx, const Eigen::MatrixXd& x,
                                    LnCache& cache) {
    const Eigen::VectorXd& gamma = m.tensors_[idx.gamma].col(0);
    const Eigen::VectorXd& beta = m.tensors_[idx.beta].col(0);
    const auto rows = x.rows();
    const auto cols = x.cols();
    cache.xhat.resize(rows, cols);
    cache.inv_std.resize(rows);
    Eigen::MatrixXd out(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      const double mu = x.row(r).mean();
      const double var = (x.row(r).array() - mu).square().mean();
      const double inv_std = 1.0 / std::sqrt(var + kLnEps);
      cache.inv_std(r) = inv_std;
      cache.xhat.row(r) = (x.row(r).array() - mu) * inv_std;
      out.row(r) =
          cache.xhat.row(r).array() * gamma.transpose().array() + beta.transpose().array();
    }
    return out;
  }

  static Eigen::MatrixXd layer_norm_backward(const Model& m, const LnIdx& idx,
                                             const Eigen::MatrixXd& dy, const LnCache& cache,
                                             std::vector<Eigen::MatrixXd>& grads) {
    const Eigen::VectorXd& gamma = m.tensors_[idx.gamma].col(0);
    grads[static_cast<size_t>(idx.gamma)].col(0) +=
        (dy.array() * cache.xhat.array()).colwise().sum().matrix().transpose();
    grads[static_cast<size_t>(idx.beta)].col(0) += dy.colwise().sum().transpose();
    Eigen::MatrixXd dx(dy.rows(), dy.cols());
    for (Eigen::Index r = 0; r < dy.rows(); ++r) {
      const Eigen::ArrayXd dxhat = dy.row(r).transpose().array() * gamma.array();
      const Eigen::ArrayXd xhat = cache.xhat.row(r).transpose().array();
      const double mean_dxhat = dxhat.mean();
      const double mean_dxhat_xhat = (dxhat * xhat).mean();
      dx.row(r) =
          (cache.inv_std(r) * (dxhat - mean_dxhat - xhat * mean_dxhat_xhat)).matrix().transpose();
    }
    return dx;
  }

  static Eigen::MatrixXd attention(const Model& m, const AttnIdx& idx, const Eigen::MatrixXd& q_in,
                                   const Eigen::MatrixXd& kv_in, bool causal, AttnCache& cache) {
    const int heads = m.params_.heads;
    const Eigen::Index dk = q_in.cols() / heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dk));

    cache.q_in = q_in;
    cache.kv_in = kv_in;
    cache.q = q_in * m.tensors_[idx.wq];
    cache.q.rowwise() += m.tensors_[idx.bq].col(0).transpose();
    cache.k = kv_in * m.tensors_[idx.wk];
    cache.k.rowwise() += m.tensors_[idx.bk].col(0).transpose();
    cache.v = kv_in * m.tensors_[idx.wv];
    cache.v.rowwise() += m.tensors_[idx.bv].col(0).transpose();

    cache.attn.assign(static_cast<size_t>(heads), {});
    cache.concat.resize(q_in.rows(), q_in.cols());
    for (int h = 0; h < heads; ++h) {
      const auto qh = cache.q.middleCols(h * dk, dk);
      const auto kh = cache.k.middleCols(h * dk, dk);
      const auto vh = cache.v.middleCols(h * dk, dk);
      Eigen::MatrixXd scores = qh * kh.transpose() * scale;
      if (causal) {
        for (Eigen::Index i = 0; i < scores.rows(); ++i) {
          for (Eigen::Index j = i + 1; j < scores.cols(); ++j) scores(i, j) = kMaskValue;
        }
      }
      Eigen::MatrixXd& attn = cache.attn[static_cast<size_t>(h)];
      attn.resize(scores.rows(), scores.cols());
      for (Eigen::Index r = 0; r < scores.rows(); ++r) {
        const double mx = scores.row(r).maxCoeff();
        Eigen::ArrayXd e = (scores.row(r).array() - mx).exp();
        attn.row(r) = (e / e.sum()).matrix().transpose();
      }
      cache.concat.middleCols(h * dk, dk) = attn * vh;
    }
    Eigen::MatrixXd out = cache.concat * m.tensors_[idx.wo];
    out.rowwise() += m.tensors_[idx.bo].col(0).transpose();
    return out;
  }

  // Returns the gradient w.r.t. q_in; the kv_in gradient is accumulated into
  // d_kv (they differ for cross attention).
  static Eigen::MatrixXd attention_backward(const Model& m, const AttnIdx& idx,
                                            const Eigen::MatrixXd& d_out, const AttnCache& cache,
                                            std::vector<Eigen::MatrixXd>& grads,
                                            Eigen::MatrixXd& d_kv) {
    const int heads = m.params_.heads;
    const Eigen::Index dk = cache.q.cols() / heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dk));

    grads[static_cast<size_t>(idx.wo)] += cache.concat.transpose() * d_out;
    grads[static_cast<size_t>(idx.bo)].col(0) += d_out.colwise().sum().transpose();
    const Eigen::MatrixXd d_concat = d_out * m.tensors_[idx.wo].transpose();

    Eigen::MatrixXd dq(cache.q.rows(), cache.q.cols());
    Eigen::MatrixXd dkm(cache.k.rows(), cache.k.cols());
    Eigen::MatrixXd dvm(cache.v.rows(), cache.v.cols());
    for (int h = 0; h < heads; ++h) {
      const auto qh = cache.q.middleCols(h * dk, dk);
      const auto kh = cache.k.middleCols(h * dk, dk);
      const auto vh = cache.v.middleCols(h * dk, dk);
      const Eigen::MatrixXd& attn = cache.attn[static_cast<size_t>(h)];
      const auto d_oh = d_concat.middleCols(h * dk, dk);

      const Eigen::MatrixXd d_attn = d_oh * vh.transpose();
      dvm.middleCols(h * dk, dk) = attn.transpose() * d_oh;

      Eigen::MatrixXd d_scores(attn.rows(), attn.cols());
      for (Eigen::Index r = 0; r < attn.rows(); ++r) {
        const double dot = d_attn.row(r).dot(attn.row(r));
        d_scores.row(r) = attn.row(r).array() * (d_attn.row(r).array() - dot);
      }
      dq.middleCols(h * dk, dk) = d_scores * kh * scale;
      dkm.middleCols(h * dk, dk) = d_scores.transpose() * qh * scale;
    }

    grads[static_cast<size_t>(idx.wq)] += cache.q_in.transpose() * dq;
    grads[static_cast<size_t>(idx.bq)].col(0) += dq.colwise().sum().transpose();
    grads[static_cast<size_t>(idx.wk)] += cache.kv_in.transpose() * dkm;
    grads[static_cast<size_t>(idx.bk)].col(0) += dkm.colwise().sum().transpose();
    grads[static_cast<size_t>(idx.wv)] += cache.kv_in.transpose() * dvm;
    grads[static_cast<size_t>(idx.bv)].col(0) += dvm.colwise().sum().transpose();

    d_kv += dkm * m.tensors_[idx.wk].transpose() + dvm * m.tensors_[idx.wv].transpose();
    return dq * m.tensors_[idx.wq].transpose();
  }

  static Eigen::MatrixXd ffn(const Model& m, const FfnIdx& idx, const Eigen::MatrixXd& x,
                             FfnCache& cache) {
    cache.input = x;
    cache.pre_act = x * m.tensors_[idx.w1];
    cache.pre_act.rowwise() += m.tensors_[idx.b1].col(0).transpose();
    cache.act = cache.pre_act.unaryExpr([](double v) { return gelu(v); });
    Eigen::MatrixXd out = cache.act * m.tensors_[idx.w2];
    out.rowwise() += m.tensors_[idx.b2].col(0).transpose();
    return out;
  }

  static Eigen::MatrixXd ffn_backward(const Model& m, const FfnIdx& idx,
                                      const Eigen::MatrixXd& d_out, const FfnCache& cache,
                                      std::vector<Eigen::MatrixXd>& grads) {
    grads[static_cast<size_t>(idx.w2)] += cache.act.transpose() * d_out;
    grads[static_cast<size_t>(idx.b2)].col(0) += d_out.colwise().sum().transpose();
    const Eigen::MatrixXd d_act = d_out * m.tensors_[idx.w2].transpose();
    const Eigen::MatrixXd d_pre =
        d_act.array() * cache.pre_act.unaryExpr([](double v) { return gelu_grad(v); }).array();
    grads[static_cast<size_t>(idx.w1)] += cache.input.transpose() * d_pre;
    grads[static_cast<size_t>(idx.b1)].col(0) += d_pre.colwise().sum().transpose();
    return d_pre * m.tensors_[idx.w1].transpose();
  }

  static std::vector<int> encoder_ids(const Model& m, const OnBitSequence& onbits) {
    size_t count = onbits.size();
    if (static_cast<int>(count) > m.params_.max_onbits) {
      std::cerr << "warning: on-bit list of " << count << " truncated to max_onbits="
                << m.params_.max_onbits << "\n";
      count = static_cast<size_t>(m.params_.max_onbits);
    }
    std::vector<int> ids;
    ids.reserve(count + 1);
    ids.push_back(m.width_);  // sentinel row
    for (size_t i = 0; i < count; ++i) {
      const int bit = onbits[i];
      if (bit < 0 || bit >= m.width_) {
        throw std::invalid_argument("on-bit index out of fingerprint range");
      }
      ids.push_back(bit);
    }
    return ids;
  }

  static void check_prefix(const Model& m, const std::vector<int>& ids) {
    if (ids.empty() || ids.front() != Vocab::kBos) {
      throw std::invalid_argument("token prefix must start with BOS");
    }
    if (static_cast<int>(ids.size()) > m.params_.max_tokens) {
      throw std::invalid_argument("token sequence longer than max_tokens");
    }
    for (int id : ids) {
      if (id < 0 || id >= m.vocab_.size()) throw std::invalid_argument("token id out of range");
    }
  }

  static Eigen::MatrixXd encode(const Model& m, const std::vector<int>& enc_ids,
                                ForwardCache* cache) {
    const int d = m.params_.embed_dim;
    Eigen::MatrixXd x(static_cast<Eigen::Index>(enc_ids.size()), d);
    for (size_t i = 0; i < enc_ids.size(); ++i) {
      x.row(static_cast<Eigen::Index>(i)) = m.tensors_[m.enc_embed_].row(enc_ids[i]);
    }
    if (cache != nullptr) {
      cache->enc_ids = enc_ids;
      cache->enc_x = x;
      cache->enc_layers.resize(m.enc_layers_.size());
    }
    EncLayerCache scratch;
    for (size_t l = 0; l < m.enc_layers_.size(); ++l) {
      EncLayerCache& lc = cache != nullptr ? cache->enc_layers[l] : scratch;
      const EncLayerIdx& idx = m.enc_layers_[l];
      lc.x0 = x;
      const Eigen::MatrixXd n1 = layer_norm(m, idx.ln1, x, lc.ln1);
      x += attention(m, idx.attn, n1, n1, false, lc.attn);
      lc.x1 = x;
      const Eigen::MatrixXd n2 = layer_norm(m, idx.ln2, x, lc.ln2);
      x += ffn(m, idx.ffn, n2, lc.ffn);
    }
    LnCache final_scratch;
    Eigen::MatrixXd memory =
        layer_norm(m, m.enc_final_, x, cache != nullptr ? cache->enc_final : final_scratch);
    if (cache != nullptr) cache->memory = memory;
    return memory;
  }

  static Eigen::MatrixXd decode(const Model& m, const Eigen::MatrixXd& memory,
                                const std::vector<int>& dec_ids, ForwardCache* cache) {
    const int d = m.params_.embed_dim;
    Eigen::MatrixXd y(static_cast<Eigen::Index>(dec_ids.size()), d);
    for (size_t i = 0; i < dec_ids.size(); ++i) {
      y.row(static_cast<Eigen::Index>(i)) = m.tensors_[m.dec_embed_].row(dec_ids[i]) +
                                            m.positional_.row(static_cast<Eigen::Index>(i));
    }
    if (cache != nullptr) {
      cache->dec_ids = dec_ids;
      cache->dec_y = y;
      cache->dec_layers.resize(m.dec_layers_.size());
    }
    DecLayerCache scratch;
    for (size_t l = 0; l < m.dec_layers_.size(); ++l) {
      DecLayerCache& lc = cache != nullptr ? cache->dec_layers[l] : scratch;
      const DecLayerIdx& idx = m.dec_layers_[l];
      lc.y0 = y;
      const Eigen::MatrixXd n1 = layer_norm(m, idx.ln1, y, lc.ln1);
      y += attention(m, idx.self_attn, n1, n1, true, lc.self_attn);
      lc.y1 = y;
      const Eigen::MatrixXd n2 = layer_norm(m, idx.ln2, y, lc.ln2);
      y += attention(m, idx.cross_attn, n2, memory, false, lc.cross_attn);
      lc.y2 = y;
      const Eigen::MatrixXd n3 = layer_norm(m, idx.ln3, y, lc.ln3);
      y += ffn(m, idx.ffn, n3, lc.ffn);
    }
    LnCache final_scratch;
    Eigen::MatrixXd out =
        layer_norm(m, m.dec_final_, y, cache != nullptr ? cache->dec_final : final_scratch);
    if (cache != nullptr) cache->dec_out = out;
    Eigen::MatrixXd logits = out * m.tensors_[m.out_w_];
    logits.rowwise() += m.tensors_[m.out_b_].col(0).transpose();
    if (cache != nullptr) cache->logits = logits;
    return logits;
  }

  // Sum of per-position cross entropies; d_logits sized like logits when
  // grads are wanted.
  static double example_loss(const Eigen::MatrixXd& logits, const std::vector<int>& ids,
                             Eigen::MatrixXd* d_logits, int* positions) {
    const Eigen::Index targets = static_cast<Eigen::Index>(ids.size()) - 1;
    if (d_logits != nullptr) {
      d_logits->resize(logits.rows(), logits.cols());
      d_logits->setZero();
    }
    double total = 0.0;
    for (Eigen::Index t = 0; t < targets; ++t) {
      const int target = ids[static_cast<size_t>(t) + 1];
      const double mx = logits.row(t).maxCoeff();
      const Eigen::ArrayXd shifted = logits.row(t).transpose().array() - mx;
      const double lse = std::log(shifted.exp().sum());
      total += -(shifted(target) - lse);
      if (d_logits != nullptr) {
        Eigen::ArrayXd softmax = (shifted - lse).exp();
        softmax(target) -= 1.0;
        d_logits->row(t) = softmax.matrix().transpose();
      }
    }
    *positions += static_cast<int>(targets);
    return total;
  }

  static void backward(const Model& m, const ForwardCache& cache, const Eigen::MatrixXd& d_logits,
                       std::vector<Eigen::MatrixXd>& grads) {
    grads[static_cast<size_t>(m.out_w_)] += cache.dec_out.transpose() * d_logits;
    grads[static_cast<size_t>(m.out_b_)].col(0) += d_logits.colwise().sum().transpose();
    Eigen::MatrixXd dy = d_logits * m.tensors_[m.out_w_].transpose();
    dy = layer_norm_backward(m, m.dec_final_, dy, cache.dec_final, grads);

    Eigen::MatrixXd d_memory = Eigen::MatrixXd::Zero(cache.memory.rows(), cache.memory.cols());
    for (size_t l = m.dec_layers_.size(); l-- > 0;) {
      const DecLayerIdx& idx = m.dec_layers_[l];
      const DecLayerCache& lc = cache.dec_layers[l];
      Eigen::MatrixXd dn3 = ffn_backward(m, idx.ffn, dy, lc.ffn, grads);
      dy += layer_norm_backward(m, idx.ln3, dn3, lc.ln3, grads);

      Eigen::MatrixXd dn2 = attention_backward(m, idx.cross_attn, dy, lc.cross_attn, grads,
                                               d_memory);
      dy += layer_norm_backward(m, idx.ln2, dn2, lc.ln2, grads);

      Eigen::MatrixXd d_self_kv = Eigen::MatrixXd::Zero(dy.rows(), dy.cols());
      Eigen::MatrixXd dn1 =
          attention_backward(m, idx.self_attn, dy, lc.self_attn, grads, d_self_kv);
      dn1 += d_self_kv;
      dy += layer_norm_backward(m, idx.ln1, dn1, lc.ln1, grads);
    }
    for (size_t i = 0; i < cache.dec_ids.size(); ++i) {
      grads[static_cast<size_t>(m.dec_embed_)].row(cache.dec_ids[i]) +=
          dy.row(static_cast<Eigen::Index>(i));
    }

    Eigen::MatrixXd dx = layer_norm_backward(m, m.enc_final_, d_memory, cache.enc_final, grads);
    for (size_t l = m.enc_layers_.size(); l-- > 0;) {
      const EncLayerIdx& idx = m.enc_layers_[l];
      const EncLayerCache& lc = cache.enc_layers[l];
      Eigen::MatrixXd dn2 = ffn_backward(m, idx.ffn, dx, lc.ffn, grads);
      dx += layer_norm_backward(m, idx.ln2, dn2, lc.ln2, grads);

      Eigen::MatrixXd d_self_kv = Eigen::MatrixXd::Zero(dx.rows(), dx.cols());
      Eigen::MatrixXd dn1 = attention_backward(m, idx.attn, dx, lc.attn, grads, d_self_kv);
      dn1 += d_self_kv;
      dx += layer_norm_backward(m, idx.ln1, dn1, lc.ln1, grads);
    }
    for (size_t i = 0; i < cache.enc_ids.size(); ++i) {
      grads[static_cast<size_t>(m.enc_embed_)].row(cache.enc_ids[i]) +=
          dx.row(static_cast<Eigen::Index>(i));
    }
  }

  static void validate_example(const Model& m, const TrainExample& example) {
    if (example.token_ids.size() < 2 || example.token_ids.front() != Vocab::kBos ||
        example.token_ids.back() != Vocab::kEos) {
      throw TrainError("training example must be BOS .. EOS");
    }
    if (static_cast<int>(example.token_ids.size()) > m.params_.max_tokens) {
      throw TrainError("training example longer than max_tokens");
    }
    for (int id : example.token_ids) {
      if (id < 0 || id >= m.vocab_.size()) throw TrainError("token id out of vocab range");
    }
    if (static_cast<int>(example.onbits.size()) > m.params_.max_onbits) {
      throw TrainError("fingerprint has more on bits than max_onbits");
    }
    for (int bit : example.onbits) {
      if (bit < 0 || bit >= m.width_) throw TrainError("on-bit index out of range");
    }
  }
};

namespace {

class TransformerSession : public DecoderSession {
 public:
  TransformerSession(const ToyTransformer& model, Eigen::MatrixXd memory)
      : model_(model), memory_(std::move(memory)) {}

  std::vector<double> score_prefix(const std::vector<int>& prefix) override {
    ToyTransformer::Impl::check_prefix(model_, prefix);
    const Eigen::MatrixXd logits = ToyTransformer::Impl::decode(model_, memory_, prefix, nullptr);
    const Eigen::Index last = logits.rows() - 1;
    const double mx = logits.row(last).maxCoeff();
    const Eigen::ArrayXd shifted = logits.row(last).transpose().array() - mx;
    const double lse = std::log(shifted.exp().sum());
    std::vector<double> out(static_cast<size_t>(logits.cols()));
    for (Eigen::Index i = 0; i < logits.cols(); ++i) out[static_cast<size_t>(i)] = shifted(i) - lse;
    return out;
  }

 private:
  const ToyTransformer& model_;
  Eigen::MatrixXd memory_;
};

}  // namespace

ToyTransformer::ToyTransformer(const ToyTransformerParams& params, Vocab vocab,
                               int fingerprint_width, std::uint64_t seed)
    : params_(params), vocab_(std::move(vocab)), width_(fingerprint_width) {
  if (params.embed_dim <= 0 || params.heads <= 0 || params.embed_dim % params.heads != 0) {
    throw std::invalid_argument("embed_dim must be a positive multiple of heads");
  }
  if (params.layers <= 0 || params.feedforward_dim <= 0 || params.max_tokens <= 1 ||
      params.max_onbits < 0) {
    throw std::invalid_argument("invalid transformer dimensions");
  }
  if (fingerprint_width <= 0) throw std::invalid_argument("fingerprint width must be positive");
  register_tensors();
  init_weights(seed);

  positional_.resize(params.max_tokens, params.embed_dim);
  for (int pos = 0; pos < params.max_tokens; ++pos) {
    for (int i = 0; i < params.embed_dim; ++i) {
      const double exponent = static_cast<double>(2 * (i / 2)) / params.embed_dim;
      const double angle = pos / std::pow(10000.0, exponent);
      positional_(pos, i) = (i % 2 == 0) ? std::sin(angle) : std::cos(angle);
    }
  }
}

void ToyTransformer::register_tensors() {
  const int d = params_.embed_dim;
  const int ff = params_.feedforward_dim;
  auto add = [&](int rows, int cols) {
    tensors_.emplace_back(Eigen::MatrixXd::Zero(rows, cols));
    return static_cast<int>(tensors_.size()) - 1;
  };
  auto add_attn = [&]() {
    AttnIdx idx;
    idx.wq = add(d, d);
    idx.bq = add(d, 1);
    idx.wk = add(d, d);
    idx.bk = add(d, 1);
    idx.wv = add(d, d);
    idx.bv = add(d, 1);
    idx.wo = add(d, d);
    idx.bo = add(d, 1);
    return idx;
  };
  auto add_ln = [&]() {
    LnIdx idx;
    idx.gamma = add(d, 1);
    idx.beta = add(d, 1);
    return idx;
  };
  auto add_ffn = [&]() {
    FfnIdx idx;
    idx.w1 = add(d, ff);
    idx.b1 = add(ff, 1);
    idx.w2 = add(ff, d);
    idx.b2 = add(d, 1);
    return idx;
  };

  enc_embed_ = add(width_ + 1, d);
  dec_embed_ = add(vocab_.size(), d);
  for (int l = 0; l < params_.layers; ++l) {
    EncLayerIdx idx;
    idx.ln1 = add_ln();
    idx.attn = add_attn();
    idx.ln2 = add_ln();
    idx.ffn = add_ffn();
    enc_layers_.push_back(idx);
  }
  for (int l = 0; l < params_.layers; ++l) {
    DecLayerIdx idx;
    idx.ln1 = add_ln();
    idx.self_attn = add_attn();
    idx.ln2 = add_ln();
    idx.cross_attn = add_attn();
    idx.ln3 = add_ln();
    idx.ffn = add_ffn();
    dec_layers_.push_back(idx);
  }
  enc_final_ = add_ln();
  dec_final_ = add_ln();
  out_w_ = add(d, vocab_.size());
  out_b_ = add(vocab_.size(), 1);
}

void ToyTransformer::init_weights(std::uint64_t seed) {
  Rng rng(seed);
  auto is_gamma = [&](int index) {
    auto in_ln = [&](const LnIdx& ln) { return index == ln.gamma; };
    for (const EncLayerIdx& l : enc_layers_) {
      if (in_ln(l.ln1) || in_ln(l.ln2)) return true;
    }
    for (const DecLayerIdx& l : dec_layers_) {
      if (in_ln(l.ln1) || in_ln(l.ln2) || in_ln(l.ln3)) return true;
    }
    return in_ln(enc_final_) || in_ln(dec_final_);
  };
  for (size_t t = 0; t < tensors_.size(); ++t) {
    Eigen::MatrixXd& tensor = tensors_[t];
    if (tensor.cols() == 1) {
      // Biases, LN gamma/beta. Gamma starts at one.
      tensor.setConstant(is_gamma(static_cast<int>(t)) ? 1.0 : 0.0);
      continue;
    }
    for (Eigen::Index c = 0; c < tensor.cols(); ++c) {
      for (Eigen::Index r = 0; r < tensor.rows(); ++r) {
        tensor(r, c) = 0.02 * rng.normal();
      }
    }
  }
}

std::unique_ptr<DecoderSession> ToyTransformer::begin(const OnBitSequence& onbits) const {
  const std::vector<int> enc_ids = Impl::encoder_ids(*this, onbits);
  Eigen::MatrixXd memory = Impl::encode(*this, enc_ids, nullptr);
  return std::make_unique<TransformerSession>(*this, std::move(memory));
}

double ToyTransformer::loss(const std::vector<TrainExample>& data) const {
  if (data.empty()) throw TrainError("no examples");
  double total = 0.0;
  int positions = 0;
  for (const TrainExample& example : data) {
    Impl::validate_example(*this, example);
    const std::vector<int> enc_ids = Impl::encoder_ids(*this, example.onbits);
    const Eigen::MatrixXd memory = Impl::encode(*this, enc_ids, nullptr);
    const Eigen::MatrixXd logits = Impl::decode(*this, memory, example.token_ids, nullptr);
    total += Impl::example_loss(logits, example.token_ids, nullptr, &positions);
  }
  return total / positions;
}

std::pair<double, std::vector<double>> ToyTransformer::loss_and_gradient(
    const std::vector<TrainExample>& data) const {
  if (data.empty()) throw TrainError("no examples");
  std::vector<Eigen::MatrixXd> grads;
  grads.reserve(tensors_.size());
  for (const Eigen::MatrixXd& tensor : tensors_) {
    grads.emplace_back(Eigen::MatrixXd::Zero(tensor.rows(), tensor.cols()));
  }
  double total = 0.0;
  int positions = 0;
  for (const TrainExample& example : data) {
    Impl::validate_example(*this, example);
    ForwardCache cache;
    const std::vector<int> enc_ids = Impl::encoder_ids(*this, example.onbits);
    Impl::encode(*this, enc_ids, &cache);
    Impl::decode(*this, cache.memory, example.token_ids, &cache);
    Eigen::MatrixXd d_logits;
    total += Impl::example_loss(cache.logits, example.token_ids, &d_logits, &positions);
    Impl::backward(*this, cache, d_logits, grads);
  }
  const double scale = 1.0 / positions;
  std::vector<double> flat;
  flat.reserve(static_cast<size_t>(parameter_count()));
  for (const Eigen::MatrixXd& grad : grads) {
    const double* data_ptr = grad.data();
    for (Eigen::Index i = 0; i < grad.size(); ++i) flat.push_back(data_ptr[i] * scale);
  }
  return {total * scale, std::move(flat)};
}

int ToyTransformer::parameter_count() const {
  Eigen::Index total = 0;
  for (const Eigen::MatrixXd& tensor : tensors_) total += tensor.size();
  return static_cast<int>(total);
}

double ToyTransformer::parameter(int index) const {
  for (const Eigen::MatrixXd& tensor : tensors_) {
    if (index < tensor.size()) return tensor.data()[index];
    index -= static_cast<int>(tensor.size());
  }
  throw std::out_of_range("parameter index");
}

void ToyTransformer::set_parameter(int index, double value) {
  for (Eigen::MatrixXd& tensor : tensors_) {
    if (index < tensor.size()) {
      tensor.data()[index] = value;
      return;
    }
    index -= static_cast<int>(tensor.size());
  }
  throw std::out_of_range("parameter index");
}

void ToyTransformer::fit(const std::vector<TrainExample>& data, const TrainConfig& config,
                         std::vector<double>* epoch_losses) {
  if (data.empty()) throw TrainError("no training examples");
  if (config.batch_size <= 0 || config.epochs < 0 || config.learning_rate <= 0) {
    throw TrainError("invalid training configuration");
  }
  for (const TrainExample& example : data) Impl::validate_example(*this, example);

  const double beta1 = 0.9;
  const double beta2 = 0.999;
  const double eps = 1e-8;
  std::vector<Eigen::MatrixXd> m_state;
  std::vector<Eigen::MatrixXd> v_state;
  for (const Eigen::MatrixXd& tensor : tensors_) {
    m_state.emplace_back(Eigen::MatrixXd::Zero(tensor.rows(), tensor.cols()));
    v_state.emplace_back(Eigen::MatrixXd::Zero(tensor.rows(), tensor.cols()));
  }
  std::vector<Eigen::MatrixXd> grads;
  for (const Eigen::MatrixXd& tensor : tensors_) {
    grads.emplace_back(Eigen::MatrixXd::Zero(tensor.rows(), tensor.cols()));
  }

  Rng rng(config.seed ^ 0x5eed5eed5eed5eedull);
  std::vector<int> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  long long step = 0;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_ce = 0.0;
    long long epoch_positions = 0;
    for (size_t start = 0; start < order.size(); start += static_cast<size_t>(config.batch_size)) {
      const size_t end = std::min(order.size(), start + static_cast<size_t>(config.batch_size));
      for (Eigen::MatrixXd& grad : grads) grad.setZero();
      double batch_ce = 0.0;
      int positions = 0;
      for (size_t i = start; i < end; ++i) {
        const TrainExample& example = data[static_cast<size_t>(order[i])];
        ForwardCache cache;
        const std::vector<int> enc_ids = Impl::encoder_ids(*this, example.onbits);
        Impl::encode(*this, enc_ids, &cache);
        Impl::decode(*this, cache.memory, example.token_ids, &cache);
        Eigen::MatrixXd d_logits;
        batch_ce += Impl::example_loss(cache.logits, example.token_ids, &d_logits, &positions);
        Impl::backward(*this, cache, d_logits, grads);
      }
      if (!std::isfinite(batch_ce)) throw TrainError("non-finite loss during training");
      const double scale = 1.0 / positions;
      ++step;
      const double corr1 = 1.0 - std::pow(beta1, static_cast<double>(step));
      const double corr2 = 1.0 - std::pow(beta2, static_cast<double>(step));
      for (size_t t = 0; t < tensors_.size(); ++t) {
        const Eigen::ArrayXXd g = grads[t].array() * scale;
        m_state[t].array() = beta1 * m_state[t].array() + (1.0 - beta1) * g;
        v_state[t].array() = beta2 * v_state[t].array() + (1.0 - beta2) * g.square();
        const Eigen::ArrayXXd m_hat = m_state[t].array() / corr1;
        const Eigen::ArrayXXd v_hat = v_state[t].array() / corr2;
        tensors_[t].array() -= config.learning_rate * m_hat / (v_hat.sqrt() + eps);
        if (!tensors_[t].allFinite()) throw TrainError("non-finite weight after update");
      }
      epoch_ce += batch_ce;
      epoch_positions += positions;
    }
    if (epoch_losses != nullptr) {
      epoch_losses->push_back(epoch_ce / static_cast<double>(epoch_positions));
    }
  }
}

ToyTransformer ToyTransformer::train(const ToyTransformerParams& params, Vocab vocab,
                                     int fingerprint_width, const std::vector<TrainExample>& data,
                                     const TrainConfig& config,
                                     std::vector<double>* epoch_losses) {
  ToyTransformer model(params, std::move(vocab), fingerprint_width, config.seed);
  model.fit(data, config, epoch_losses);
  return model;
}

void ToyTransformer::save(std::ostream& out) const {
  put_bytes(out, kMagic, sizeof(kMagic));
  put_u32(out, kFormatVersion);
  put_u64(out, vocab_.hash());
  put_u32(out, static_cast<std::uint32_t>(width_));
  put_u32(out, static_cast<std::uint32_t>(params_.embed_dim));
  put_u32(out, static_cast<std::uint32_t>(params_.layers));
  put_u32(out, static_cast<std::uint32_t>(params_.heads));
  put_u32(out, static_cast<std::uint32_t>(params_.feedforward_dim));
  put_u32(out, static_cast<std::uint32_t>(params_.max_onbits));
  put_u32(out, static_cast<std::uint32_t>(params_.max_tokens));
  put_u32(out, static_cast<std::uint32_t>(vocab_.tokens().size()));
  for (const std::string& token : vocab_.tokens()) put_string(out, token);
  put_string(out, generator_id_);
  put_u32(out, static_cast<std::uint32_t>(tensors_.size()));
  for (const Eigen::MatrixXd& tensor : tensors_) {
    put_u32(out, static_cast<std::uint32_t>(tensor.rows()));
    put_u32(out, static_cast<std::uint32_t>(tensor.cols()));
    const double* data_ptr = tensor.data();
    for (Eigen::Index i = 0; i < tensor.size(); ++i) put_f64(out, data_ptr[i]);
  }
  if (!out) throw std::runtime_error("failed to write model");
}

ToyTransformer ToyTransformer::load(std::istream& in) {
  char magic[sizeof(kMagic)];
  get_bytes(in, magic, sizeof(kMagic));
  if (!std::equal(magic, magic + sizeof(kMagic), kMagic)) {
    throw std::runtime_error("not a model file (bad magic)");
  }
  const std::uint32_t version = get_u32(in);
  if (version != kFormatVersion) {
    throw std::runtime_error("unsupported model version " + std::to_string(version));
  }
  const std::uint64_t stored_hash = get_u64(in);
  ToyTransformerParams params;
  const int width = static_cast<int>(get_u32(in));
  params.embed_dim = static_cast<int>(get_u32(in));
  params.layers = static_cast<int>(get_u32(in));
  params.heads = static_cast<int>(get_u32(in));
  params.feedforward_dim = static_cast<int>(get_u32(in));
  params.max_onbits = static_cast<int>(get_u32(in));
  params.max_tokens = static_cast<int>(get_u32(in));
  const std::uint32_t token_count = get_u32(in);
  if (token_count > (1u << 20)) throw std::runtime_error("corrupt model file: vocab too large");
  std::vector<std::string> tokens;
  tokens.reserve(token_count);
  for (std::uint32_t i = 0; i < token_count; ++i) tokens.push_back(get_string(in));
  Vocab vocab(std::move(tokens));
  if (vocab.hash() != stored_hash) {
    throw std::runtime_error("vocab hash mismatch: model file does not match its vocabulary");
  }
  std::string generator_id = get_string(in);

  ToyTransformer model(params, std::move(vocab), width, 0);
  model.generator_id_ = std::move(generator_id);
  const std::uint32_t tensor_count = get_u32(in);
  if (tensor_count != model.tensors_.size()) {
    throw std::runtime_error("model file tensor count does not match architecture");
  }
  for (Eigen::MatrixXd& tensor : model.tensors_) {
    const auto rows = static_cast<Eigen::Index>(get_u32(in));
    const auto cols = static_cast<Eigen::Index>(get_u32(in));
    if (rows != tensor.rows() || cols != tensor.cols()) {
      throw std::runtime_error("model file tensor shape does not match architecture");
    }
    double* data_ptr = tensor.data();
    for (Eigen::Index i = 0; i < tensor.size(); ++i) data_ptr[i] = get_f64(in);
  }
  return model;
}

std::uint64_t ToyTransformer::digest() const {
  std::ostringstream buffer;
  save(buffer);
  return fnv1a64(buffer.str());
}

}  // namespace fp2mol
