#include <cctype>
#include <map>
#include <optional>

#include "fp2mol/elements.hpp"
#include "fp2mol/smiles.hpp"

namespace fp2mol {
namespace {

struct PendingBond {
  char symbol = 0;  // 0 = unspecified, '-', '=', '#', ':'
  size_t position = 0;
};

struct RingOpening {
  int atom = -1;
  char bond_symbol = 0;
  size_t position = 0;
};

bool is_aromatic_organic(char c) {
  return c == 'b' || c == 'c' || c == 'n' || c == 'o' || c == 'p' || c == 's';
}

class Parser {
 public:
  Parser(std::string_view text, std::vector<std::string>* warnings)
      : text_(text), warnings_(warnings) {}

  Molecule run() {
    while (pos_ < text_.size()) {
      step();
    }
    if (!ring_openings_.empty()) {
      auto it = ring_openings_.begin();
      throw ParseError("unclosed ring bond " + std::to_string(it->first), it->second.position);
    }
    if (!branch_stack_.empty()) {
      throw ParseError("unclosed branch", branch_positions_.back());
    }
    if (pending_.symbol != 0) {
      throw ParseError("dangling bond symbol", pending_.position);
    }
    fold_hydrogens();
    if (atoms_.empty()) {
      throw ParseError("no atoms", 0);
    }
    return Molecule::from_parts(std::move(atoms_), std::move(bonds_));
  }

 private:
  void warn(const std::string& message) {
    if (warnings_ != nullptr) warnings_->push_back(message);
  }

  void step() {
    const char c = text_[pos_];
    switch (c) {
      case '(':
        if (prev_ < 0) throw ParseError("branch with no preceding atom", pos_);
        if (pending_.symbol != 0) throw ParseError("bond symbol before branch open", pending_.position);
        branch_stack_.push_back(prev_);
        branch_positions_.push_back(pos_);
        ++pos_;
        return;
      case ')':
        if (branch_stack_.empty()) throw ParseError("unmatched ')'", pos_);
        if (pending_.symbol != 0) throw ParseError("dangling bond symbol", pending_.position);
        prev_ = branch_stack_.back();
        branch_stack_.pop_back();
        branch_positions_.pop_back();
        ++pos_;
        return;
      case '-':
      case '=':
      case '#':
      case ':':
        set_pending(c);
        ++pos_;
        return;
      case '/':
      case '\\':
        warn("stereo bond marker '" + std::string(1, c) + "' stripped at position " +
             std::to_string(pos_));
        set_pending('-');
        ++pos_;
        return;
      case '.':
        if (pending_.symbol != 0) throw ParseError("bond symbol before '.'", pending_.position);
        prev_ = -1;
        ++pos_;
        return;
      case '%': {
        if (pos_ + 2 >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])) ||
            !std::isdigit(static_cast<unsigned char>(text_[pos_ + 2]))) {
          throw ParseError("'%' must be followed by two digits", pos_);
        }
        const int index = (text_[pos_ + 1] - '0') * 10 + (text_[pos_ + 2] - '0');
        ring_event(index, pos_);
        pos_ += 3;
        return;
      }
      case '[':
        parse_bracket_atom();
        return;
      default:
        break;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      ring_event(c - '0', pos_);
      ++pos_;
      return;
    }
    if (parse_organic_atom()) return;
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  void set_pending(char symbol) {
    if (pending_.symbol != 0) throw ParseError("two bond symbols in a row", pos_);
    if (prev_ < 0) throw ParseError("bond symbol with no preceding atom", pos_);
    pending_ = {symbol, pos_};
  }

  static BondOrder order_from_symbol(char symbol, bool both_aromatic) {
    switch (symbol) {
      case '-':
        return BondOrder::Single;
      case '=':
        return BondOrder::Double;
      case '#':
        return BondOrder::Triple;
      case ':':
        return BondOrder::Aromatic;
      default:
        return both_aromatic ? BondOrder::Aromatic : BondOrder::Single;
    }
  }

  void ring_event(int index, size_t position) {
    if (prev_ < 0) throw ParseError("ring closure with no preceding atom", position);
    auto it = ring_openings_.find(index);
    if (it == ring_openings_.end()) {
      ring_openings_[index] = {prev_, pending_.symbol, position};
      pending_ = {};
      return;
    }
    const RingOpening opening = it->second;
    ring_openings_.erase(it);
    if (opening.atom == prev_) throw ParseError("ring bond to the same atom", position);
    char symbol = pending_.symbol;
    if (opening.bond_symbol != 0 && symbol != 0 && opening.bond_symbol != symbol) {
      throw ParseError("conflicting bond symbols for ring closure " + std::to_string(index),
                       position);
    }
    if (symbol == 0) symbol = opening.bond_symbol;
    pending_ = {};
    const bool both_aromatic = atoms_[opening.atom].aromatic && atoms_[prev_].aromatic;
    add_bond(opening.atom, prev_, order_from_symbol(symbol, both_aromatic), position);
  }

  void add_bond(int a, int b, BondOrder order, size_t position) {
    for (const Bond& bond : bonds_) {
      if ((bond.a == a && bond.b == b) || (bond.a == b && bond.b == a)) {
        throw ParseError("duplicate bond between atoms", position);
      }
    }
    bonds_.push_back({a, b, order});
  }

  void attach(Atom atom, size_t position) {
    atoms_.push_back(atom);
    const int index = static_cast<int>(atoms_.size()) - 1;
    if (prev_ >= 0) {
      const bool both_aromatic = atoms_[prev_].aromatic && atom.aromatic;
      add_bond(prev_, index, order_from_symbol(pending_.symbol, both_aromatic), position);
    }
    pending_ = {};
    prev_ = index;
  }

  bool parse_organic_atom() {
    const char c = text_[pos_];
    const size_t start = pos_;
    Atom atom;
    if (std::isupper(static_cast<unsigned char>(c))) {
      std::string symbol(1, c);
      if ((c == 'C' && pos_ + 1 < text_.size() && text_[pos_ + 1] == 'l') ||
          (c == 'B' && pos_ + 1 < text_.size() && text_[pos_ + 1] == 'r')) {
        symbol += text_[pos_ + 1];
      }
      const int element = element_from_symbol(symbol);
      if (element <= 0 || !is_organic_subset(element)) return false;
      atom.element = element;
      pos_ += symbol.size();
    } else if (is_aromatic_organic(c)) {
      atom.element = element_from_symbol(std::string(1, std::toupper(static_cast<unsigned char>(c))));
      atom.aromatic = true;
      ++pos_;
    } else {
      return false;
    }
    attach(atom, start);
    return true;
  }

  void parse_bracket_atom() {
    const size_t start = pos_;
    ++pos_;  // '['
    Atom atom;
    atom.h_specified = true;

    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      atom.isotope = atom.isotope * 10 + (text_[pos_] - '0');
      ++pos_;
    }

    if (pos_ >= text_.size()) throw ParseError("unterminated bracket atom", start);
    const char c = text_[pos_];
    if (std::isupper(static_cast<unsigned char>(c))) {
      std::string symbol(1, c);
      if (pos_ + 1 < text_.size() && std::islower(static_cast<unsigned char>(text_[pos_ + 1]))) {
        const std::string two = symbol + text_[pos_ + 1];
        if (element_from_symbol(two) > 0) symbol = two;
      }
      atom.element = element_from_symbol(symbol);
      if (atom.element <= 0) throw ParseError("unknown element '" + symbol + "'", pos_);
      pos_ += symbol.size();
    } else if (std::islower(static_cast<unsigned char>(c))) {
      std::string symbol(1, c);
      if (pos_ + 1 < text_.size() && std::islower(static_cast<unsigned char>(text_[pos_ + 1]))) {
        const std::string two = symbol + text_[pos_ + 1];
        if (two == "se" || two == "as") symbol = two;
      }
      if (symbol.size() == 1 && !is_aromatic_organic(c)) {
        throw ParseError("element '" + symbol + "' cannot be aromatic", pos_);
      }
      std::string upper = symbol;
      upper[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(upper[0])));
      atom.element = element_from_symbol(upper);
      atom.aromatic = true;
      pos_ += symbol.size();
    } else {
      throw ParseError("expected element symbol in bracket atom", pos_);
    }

    if (pos_ < text_.size() && text_[pos_] == '@') {
      const size_t at = pos_;
      ++pos_;
      if (pos_ < text_.size() && text_[pos_] == '@') ++pos_;
      // Named classes like @TH1 / @AL2.
      while (pos_ + 1 < text_.size() && std::isupper(static_cast<unsigned char>(text_[pos_])) &&
             std::isupper(static_cast<unsigned char>(text_[pos_ + 1]))) {
        pos_ += 2;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        break;
      }
      warn("chirality marker stripped at position " + std::to_string(at));
    }

    if (pos_ < text_.size() && text_[pos_] == 'H') {
      ++pos_;
      int count = 1;
      if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        count = 0;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
          count = count * 10 + (text_[pos_] - '0');
          ++pos_;
        }
      }
      atom.explicit_h = count;
    }

    if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) {
      const char sign_char = text_[pos_];
      const int sign = sign_char == '+' ? 1 : -1;
      int magnitude = 0;
      while (pos_ < text_.size() && text_[pos_] == sign_char) {
        ++magnitude;
        ++pos_;
      }
      if (magnitude == 1 && pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        magnitude = 0;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
          magnitude = magnitude * 10 + (text_[pos_] - '0');
          ++pos_;
        }
      }
      atom.formal_charge = sign * magnitude;
    }

    if (pos_ < text_.size() && text_[pos_] == ':') {
      ++pos_;
      if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        throw ParseError("atom class ':' must be followed by digits", pos_);
      }
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    if (pos_ >= text_.size() || text_[pos_] != ']') {
      throw ParseError("unterminated bracket atom", start);
    }
    ++pos_;
    attach(atom, start);
  }

  // Plain [H] atoms bound to one heavy atom by a single bond become part of
  // that atom's hydrogen count. Isotopes, charges and multivalent oddities
  // stay as graph atoms.
  void fold_hydrogens() {
    std::vector<int> degree(atoms_.size(), 0);
    std::vector<int> partner(atoms_.size(), -1);
    std::vector<bool> single_bond(atoms_.size(), true);
    for (const Bond& bond : bonds_) {
      degree[bond.a]++;
      degree[bond.b]++;
      partner[bond.a] = bond.b;
      partner[bond.b] = bond.a;
      if (bond.order != BondOrder::Single) {
        single_bond[bond.a] = false;
        single_bond[bond.b] = false;
      }
    }
    std::vector<bool> fold(atoms_.size(), false);
    bool any = false;
    for (size_t i = 0; i < atoms_.size(); ++i) {
      const Atom& atom = atoms_[i];
      if (atom.element != 1 || atom.isotope != 0 || atom.formal_charge != 0 ||
          atom.explicit_h != 0) {
        continue;
      }
      if (degree[i] != 1 || !single_bond[i]) continue;
      const int heavy = partner[i];
      if (atoms_[heavy].element == 1) continue;
      fold[i] = true;
      // Counted into occupancy; bare neighbors still top up with implicit H.
      atoms_[heavy].explicit_h += 1;
      any = true;
    }
    if (!any) return;
    std::vector<int> remap(atoms_.size(), -1);
    std::vector<Atom> kept;
    kept.reserve(atoms_.size());
    for (size_t i = 0; i < atoms_.size(); ++i) {
      if (fold[i]) continue;
      remap[i] = static_cast<int>(kept.size());
      kept.push_back(atoms_[i]);
    }
    std::vector<Bond> kept_bonds;
    kept_bonds.reserve(bonds_.size());
    for (const Bond& bond : bonds_) {
      if (fold[bond.a] || fold[bond.b]) continue;
      kept_bonds.push_back({remap[bond.a], remap[bond.b], bond.order});
    }
    atoms_ = std::move(kept);
    bonds_ = std::move(kept_bonds);
  }

  std::string_view text_;
  std::vector<std::string>* warnings_;
  size_t pos_ = 0;
  int prev_ = -1;
  PendingBond pending_;
  std::vector<int> branch_stack_;
  std::vector<size_t> branch_positions_;
  std::map<int, RingOpening> ring_openings_;
  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
};

}  // namespace

Molecule parse_smiles(std::string_view text, std::vector<std::string>* warnings) {
  Parser parser(text, warnings);
  return parser.run();
}

}  // namespace fp2mol
