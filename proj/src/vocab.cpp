#include <json.hpp>

#include "fp2mol/hash.hpp"
#include "fp2mol/smiles.hpp"

namespace fp2mol {
namespace {

const std::string kReservedNames[Vocab::kReserved] = {"<pad>", "<bos>", "<eos>", "<unk>"};

}  // namespace

Vocab::Vocab(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  for (size_t i = 0; i < tokens_.size(); ++i) {
    if (tokens_[i].empty()) throw std::invalid_argument("empty vocab token");
    if (!ids_.emplace(tokens_[i], kReserved + static_cast<int>(i)).second) {
      throw std::invalid_argument("duplicate vocab token '" + tokens_[i] + "'");
    }
  }
}

Vocab Vocab::build(const std::vector<std::string>& corpus_smiles) {
  std::vector<std::string> tokens;
  std::unordered_map<std::string, int> seen;
  for (const std::string& smiles : corpus_smiles) {
    for (std::string& token : tokenize_smiles(smiles)) {
      if (seen.emplace(token, 0).second) tokens.push_back(std::move(token));
    }
  }
  return Vocab(std::move(tokens));
}

int Vocab::id(const std::string& token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? kUnk : it->second;
}

const std::string& Vocab::token(int id) const {
  if (id >= 0 && id < kReserved) return kReservedNames[id];
  const int index = id - kReserved;
  if (index < 0 || index >= static_cast<int>(tokens_.size())) {
    throw std::out_of_range("token id " + std::to_string(id) + " out of range");
  }
  return tokens_[static_cast<size_t>(index)];
}

std::vector<int> Vocab::encode(std::string_view smiles) const {
  std::vector<int> ids;
  const TokenSequence tokens = tokenize_smiles(smiles);
  ids.reserve(tokens.size() + 2);
  ids.push_back(kBos);
  for (const std::string& token : tokens) ids.push_back(id(token));
  ids.push_back(kEos);
  return ids;
}

std::string Vocab::decode(const std::vector<int>& ids) const {
  std::string out;
  for (int id : ids) {
    if (id < kReserved) continue;
    out += token(id);
  }
  return out;
}

std::uint64_t Vocab::hash() const {
  Fnv1a64 h;
  for (const std::string& token : tokens_) {
    h.update(token.data(), token.size());
    h.update("\n", 1);
  }
  return h.digest();
}

std::string Vocab::to_json() const {
  nlohmann::json j;
  j["tokens"] = tokens_;
  return j.dump(2) + "\n";
}

Vocab Vocab::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  if (!j.is_object() || !j.contains("tokens") || !j["tokens"].is_array()) {
    throw std::invalid_argument("vocab json must be an object with a \"tokens\" array");
  }
  return Vocab(j["tokens"].get<std::vector<std::string>>());
}

}  // namespace fp2mol
