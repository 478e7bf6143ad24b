#include "fp2mol/io.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fp2mol/hash.hpp"

namespace fp2mol::io {
namespace {

using nlohmann::json;

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

bool is_comment_or_blank(const std::string& line) {
  for (char c : line) {
    if (c == ' ' || c == '\t') continue;
    return c == '#';
  }
  return true;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return in;
}

json parse_line(const std::string& path, int line_no, const std::string& line) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw DataError(path + ":" + std::to_string(line_no) + ": not a JSON object");
  }
  return j;
}

}  // namespace

std::vector<CorpusRecord> read_corpus(const std::string& path) {
  std::ifstream in = open_input(path);
  std::vector<CorpusRecord> records;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (is_comment_or_blank(line)) continue;
    CorpusRecord rec;
    rec.line = line_no;
    auto tab = line.find('\t');
    if (tab == std::string::npos) {
      rec.id = std::to_string(line_no);
      rec.smiles = line;
    } else {
      rec.id = line.substr(0, tab);
      rec.smiles = line.substr(tab + 1);
      if (rec.id.empty() || rec.smiles.empty()) {
        throw DataError(path + ":" + std::to_string(line_no) + ": empty id or structure");
      }
    }
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<FingerprintRecord> read_fingerprints(const std::string& path) {
  std::ifstream in = open_input(path);
  std::vector<FingerprintRecord> records;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (is_comment_or_blank(line)) continue;
    const std::string where = path + ":" + std::to_string(line_no);
    json j = parse_line(path, line_no, line);
    FingerprintRecord rec;
    rec.line = line_no;
    try {
      rec.id = j.at("id").get<std::string>();
      rec.width = j.at("width").get<int>();
      if (j.contains("generator")) rec.generator = j["generator"].get<std::string>();
      const bool has_bits = j.contains("onbits");
      const bool has_probs = j.contains("probs");
      if (has_bits == has_probs) {
        throw DataError(where + ": need exactly one of onbits/probs");
      }
      if (has_bits) {
        rec.onbits = j["onbits"].get<OnBitSequence>();
      } else {
        rec.probs = j["probs"].get<std::vector<double>>();
      }
    } catch (const json::exception& e) {
      throw DataError(where + ": " + e.what());
    }
    if (rec.width <= 0) throw DataError(where + ": width must be positive");
    if (rec.onbits) {
      for (int b : *rec.onbits) {
        if (b < 0 || b >= rec.width) throw DataError(where + ": on-bit out of range");
      }
    } else if (static_cast<int>(rec.probs->size()) != rec.width) {
      throw DataError(where + ": probs length disagrees with width");
    }
    records.push_back(std::move(rec));
  }
  return records;
}

void write_fingerprints(const std::string& path, const std::vector<FingerprintRecord>& records) {
  std::ostringstream out;
  for (const auto& rec : records) {
    json j;
    j["id"] = rec.id;
    j["width"] = rec.width;
    if (rec.onbits) {
      j["onbits"] = *rec.onbits;
    } else {
      j["probs"] = *rec.probs;
    }
    if (!rec.generator.empty()) j["generator"] = rec.generator;
    out << j.dump() << '\n';
  }
  write_file_atomic(path, out.str());
}

std::vector<PredictionRecord> read_predictions(const std::string& path) {
  std::ifstream in = open_input(path);
  std::vector<PredictionRecord> records;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (is_comment_or_blank(line)) continue;
    PredictionRecord rec;
    rec.line = line_no;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      rec.malformed = true;
      rec.error = "not a JSON object";
      rec.id = "#line" + std::to_string(line_no);
      records.push_back(std::move(rec));
      continue;
    }
    try {
      rec.id = j.at("id").get<std::string>();
      for (const auto& c : j.at("candidates")) {
        PredCandidate cand;
        cand.smiles = c.at("smiles").get<std::string>();
        cand.logprob = c.value("logprob", 0.0);
        rec.candidates.push_back(std::move(cand));
      }
    } catch (const json::exception& e) {
      rec.malformed = true;
      rec.error = e.what();
      if (rec.id.empty()) rec.id = "#line" + std::to_string(line_no);
    }
    records.push_back(std::move(rec));
  }
  return records;
}

void write_predictions(const std::string& path, const std::vector<PredictionRecord>& records) {
  std::ostringstream out;
  for (const auto& rec : records) {
    json j;
    j["id"] = rec.id;
    json cands = json::array();
    for (const auto& c : rec.candidates) {
      cands.push_back({{"smiles", c.smiles}, {"logprob", c.logprob}});
    }
    j["candidates"] = std::move(cands);
    out << j.dump() << '\n';
  }
  write_file_atomic(path, out.str());
}

std::string read_file(const std::string& path) {
  std::ifstream in = open_input(path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw DataError("short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw DataError("cannot replace " + path + ": " + ec.message());
  }
}

std::uint64_t file_digest(const std::string& path) {
  return fnv1a64(read_file(path));
}

std::string hex64(std::uint64_t value) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[value & 0xf];
    value >>= 4;
  }
  return out;
}

}  // namespace fp2mol::io
