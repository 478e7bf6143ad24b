#include <cctype>

#include "fp2mol/smiles.hpp"

namespace fp2mol {
namespace {

bool single_char_token(char c) {
  switch (c) {
    case 'B':
    case 'C':
    case 'N':
    case 'O':
    case 'P':
    case 'S':
    case 'F':
    case 'I':
    case 'b':
    case 'c':
    case 'n':
    case 'o':
    case 'p':
    case 's':
    case '(':
    case ')':
    case '-':
    case '=':
    case '#':
    case ':':
    case '/':
    case '\\':
    case '.':
      return true;
    default:
      return std::isdigit(static_cast<unsigned char>(c)) != 0;
  }
}

}  // namespace

TokenSequence tokenize_smiles(std::string_view text) {
  TokenSequence tokens;
  size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (c == '[') {
      const size_t end = text.find(']', i);
      if (end == std::string_view::npos) {
        throw ParseError("unterminated bracket atom", i);
      }
      tokens.emplace_back(text.substr(i, end - i + 1));
      i = end + 1;
      continue;
    }
    if (c == '%') {
      if (i + 2 >= text.size() || !std::isdigit(static_cast<unsigned char>(text[i + 1])) ||
          !std::isdigit(static_cast<unsigned char>(text[i + 2]))) {
        throw ParseError("'%' must be followed by two digits", i);
      }
      tokens.emplace_back(text.substr(i, 3));
      i += 3;
      continue;
    }
    if ((c == 'C' || c == 'B') && i + 1 < text.size()) {
      const char d = text[i + 1];
      if ((c == 'C' && d == 'l') || (c == 'B' && d == 'r')) {
        tokens.emplace_back(text.substr(i, 2));
        i += 2;
        continue;
      }
    }
    if (single_char_token(c)) {
      tokens.emplace_back(1, c);
      ++i;
      continue;
    }
    throw ParseError(std::string("character '") + c + "' is outside the token grammar", i);
  }
  return tokens;
}

std::string detokenize(const TokenSequence& tokens) {
  std::string out;
  for (const std::string& token : tokens) out += token;
  return out;
}

}  // namespace fp2mol
