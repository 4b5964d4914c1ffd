//
// MolChord desk pipeline - Copyright 2026 The MolChord Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <array>
#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "molchord/error.h"
#include "molchord/molgraph/element.h"
#include "molchord/molgraph/molecule.h"

namespace molchord {
namespace {
  constexpr std::size_t kMaxSmilesLength = 4096;

  struct PendingBond {
    std::optional<BondOrder> order;
    std::size_t offset = 0;
  };

  struct OpenRing {
    int atom = -1;
    PendingBond bond;
    std::size_t offset = 0;
  };

  class SmilesParser {
  public:
    explicit SmilesParser(std::string_view text): text_(text) { }

    Molecule parse();

  private:
    char peek(std::size_t ahead = 0) const {
      return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
    }

    [[noreturn]] void fail(Errc code, std::size_t offset,
                           const std::string &msg) const {
      throw SmilesError(code, offset, msg);
    }

    void parse_organic_atom();
    void parse_bracket_atom();
    void attach_atom(Atom atom);
    void parse_ring_closure(int number, std::size_t offset);
    void parse_bond_symbol();
    void finalize();

    std::string_view text_;
    std::size_t pos_ = 0;
    Molecule mol_;

    int prev_atom_ = -1;
    PendingBond pending_;
    std::vector<std::pair<int, std::size_t>> branches_;
    std::array<OpenRing, 100> rings_ {};
    bool saw_stereo_ = false;
  };

  Molecule SmilesParser::parse() {
    if (text_.empty())
      fail(Errc::kEmptyInput, 0, "empty SMILES");
    if (text_.size() > kMaxSmilesLength)
      fail(Errc::kInputTooLong, kMaxSmilesLength,
           "SMILES longer than " + std::to_string(kMaxSmilesLength));

    while (pos_ < text_.size()) {
      const char c = peek();
      const std::size_t here = pos_;

      if (c == '[') {
        parse_bracket_atom();
      } else if (std::isalpha(static_cast<unsigned char>(c))) {
        parse_organic_atom();
      } else if (c == '(') {
        if (prev_atom_ < 0)
          fail(Errc::kSyntaxError, here, "branch without a preceding atom");
        if (pending_.order)
          fail(Errc::kSyntaxError, here, "bond symbol before branch");
        branches_.push_back({ prev_atom_, here });
        ++pos_;
        if (peek() == ')')
          fail(Errc::kSyntaxError, pos_, "empty branch");
      } else if (c == ')') {
        if (branches_.empty())
          fail(Errc::kSyntaxError, here, "unmatched ')'");
        if (pending_.order)
          fail(Errc::kSyntaxError, pending_.offset, "dangling bond symbol");
        prev_atom_ = branches_.back().first;
        branches_.pop_back();
        ++pos_;
      } else if (c == '.') {
        if (prev_atom_ < 0 || pending_.order)
          fail(Errc::kSyntaxError, here, "misplaced '.'");
        if (!branches_.empty())
          fail(Errc::kSyntaxError, here, "'.' inside a branch");
        prev_atom_ = -1;
        ++pos_;
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        ++pos_;
        parse_ring_closure(c - '0', here);
      } else if (c == '%') {
        if (!std::isdigit(static_cast<unsigned char>(peek(1)))
            || !std::isdigit(static_cast<unsigned char>(peek(2))))
          fail(Errc::kSyntaxError, here, "'%' must be followed by 2 digits");
        const int number = (peek(1) - '0') * 10 + (peek(2) - '0');
        pos_ += 3;
        parse_ring_closure(number, here);
      } else if (c == '-' || c == '=' || c == '#' || c == ':' || c == '/'
                 || c == '\\') {
        parse_bond_symbol();
      } else {
        fail(Errc::kSyntaxError, here,
             std::string("unexpected character '") + c + "'");
      }
    }

    if (!branches_.empty())
      fail(Errc::kUnclosedBranch, branches_.back().second,
           "branch opened here is never closed");
    if (pending_.order)
      fail(Errc::kSyntaxError, pending_.offset, "dangling bond symbol");
    for (const auto &ring: rings_)
      if (ring.atom >= 0)
        fail(Errc::kUnmatchedRingBond, ring.offset,
             "ring bond opened here is never closed");

    finalize();
    return std::move(mol_);
  }

  void SmilesParser::parse_bond_symbol() {
    if (prev_atom_ < 0)
      fail(Errc::kSyntaxError, pos_, "bond symbol without a preceding atom");
    if (pending_.order)
      fail(Errc::kSyntaxError, pos_, "two consecutive bond symbols");

    const char c = peek();
    pending_.offset = pos_;
    switch (c) {
    case '-':
      pending_.order = BondOrder::kSingle;
      break;
    case '=':
      pending_.order = BondOrder::kDouble;
      break;
    case '#':
      pending_.order = BondOrder::kTriple;
      break;
    case ':':
      pending_.order = BondOrder::kAromatic;
      break;
    default:  // '/' and '\' are directional single bonds
      pending_.order = BondOrder::kSingle;
      saw_stereo_ = true;
      break;
    }
    ++pos_;
  }

  void SmilesParser::parse_organic_atom() {
    const std::size_t here = pos_;
    const char c = peek();
    Atom atom;
    atom.offset = here;

    std::string_view symbol;
    bool aromatic = false;
    if (c == 'C' && peek(1) == 'l') {
      symbol = "Cl";
    } else if (c == 'B' && peek(1) == 'r') {
      symbol = "Br";
    } else {
      switch (c) {
      case 'B':
      case 'C':
      case 'N':
      case 'O':
      case 'P':
      case 'S':
      case 'F':
      case 'I':
        symbol = text_.substr(pos_, 1);
        break;
      case 'b':
      case 'c':
      case 'n':
      case 'o':
      case 'p':
      case 's':
        symbol = text_.substr(pos_, 1);
        aromatic = true;
        break;
      default:
        fail(Errc::kUnknownElement, here,
             std::string("'") + c + "' is not an organic-subset atom");
      }
    }
    pos_ += symbol.size();

    std::string canonical(symbol);
    canonical[0] = static_cast<char>(
        std::toupper(static_cast<unsigned char>(canonical[0])));
    const ElementInfo *info = find_element(canonical);
    atom.element = canonical;
    atom.atomic_number = info->atomic_number;
    atom.aromatic = aromatic;
    attach_atom(std::move(atom));
  }

  void SmilesParser::parse_bracket_atom() {
    const std::size_t open = pos_;
    ++pos_;  // '['
    Atom atom;
    atom.offset = open;
    atom.bracket = true;

    while (std::isdigit(static_cast<unsigned char>(peek()))) {
      atom.isotope = atom.isotope * 10 + (peek() - '0');
      ++pos_;
      if (atom.isotope > 999)
        fail(Errc::kSyntaxError, pos_, "isotope out of range");
    }

    // Element symbol: uppercase (+ optional lowercase) or an aromatic
    // lowercase form.
    const std::size_t sym_at = pos_;
    std::string symbol;
    bool aromatic = false;
    const char c = peek();
    if (std::isupper(static_cast<unsigned char>(c))) {
      symbol.push_back(c);
      ++pos_;
      if (std::islower(static_cast<unsigned char>(peek()))) {
        std::string two = symbol + peek();
        if (find_element(two)) {
          symbol = two;
          ++pos_;
        }
      }
    } else if (std::islower(static_cast<unsigned char>(c))) {
      aromatic = true;
      if ((c == 's' && peek(1) == 'e') || (c == 'a' && peek(1) == 's')
          || (c == 't' && peek(1) == 'e')) {
        symbol = { static_cast<char>(std::toupper(c)), peek(1) };
        pos_ += 2;
      } else {
        symbol = { static_cast<char>(
            std::toupper(static_cast<unsigned char>(c))) };
        ++pos_;
      }
    } else if (c == '*') {
      fail(Errc::kUnknownElement, sym_at, "wildcard atoms are not supported");
    } else {
      fail(Errc::kSyntaxError, sym_at, "missing element symbol");
    }

    const ElementInfo *info = find_element(symbol);
    if (!info)
      fail(Errc::kUnknownElement, sym_at, "unknown element '" + symbol + "'");
    if (aromatic && !can_be_aromatic(info->atomic_number))
      fail(Errc::kUnknownElement, sym_at,
           "element '" + symbol + "' cannot be aromatic");
    atom.element = symbol;
    atom.atomic_number = info->atomic_number;
    atom.aromatic = aromatic;

    // Chirality: @, @@, @TH1, @AL2, @SP3, @TB12, @OH25
    if (peek() == '@') {
      saw_stereo_ = true;
      ++pos_;
      if (peek() == '@') {
        ++pos_;
      } else if (std::isupper(static_cast<unsigned char>(peek()))
                 && std::isupper(static_cast<unsigned char>(peek(1)))) {
        pos_ += 2;
        while (std::isdigit(static_cast<unsigned char>(peek())))
          ++pos_;
      }
    }

    if (peek() == 'H') {
      ++pos_;
      atom.explicit_h = 1;
      if (std::isdigit(static_cast<unsigned char>(peek()))) {
        atom.explicit_h = peek() - '0';
        ++pos_;
      }
    }

    if (peek() == '+' || peek() == '-') {
      const char sign = peek();
      const int unit = sign == '+' ? 1 : -1;
      ++pos_;
      if (std::isdigit(static_cast<unsigned char>(peek()))) {
        int mag = 0;
        while (std::isdigit(static_cast<unsigned char>(peek()))) {
          mag = mag * 10 + (peek() - '0');
          ++pos_;
        }
        atom.formal_charge = unit * mag;
      } else {
        int count = 1;
        while (peek() == sign) {
          ++count;
          ++pos_;
        }
        atom.formal_charge = unit * count;
      }
      if (atom.formal_charge > 15 || atom.formal_charge < -15)
        fail(Errc::kSyntaxError, open, "charge out of range");
    }

    if (peek() == ':') {  // atom class, discarded
      ++pos_;
      if (!std::isdigit(static_cast<unsigned char>(peek())))
        fail(Errc::kSyntaxError, pos_, "atom class must be numeric");
      while (std::isdigit(static_cast<unsigned char>(peek())))
        ++pos_;
    }

    if (peek() != ']')
      fail(Errc::kSyntaxError, pos_, "expected ']' to close bracket atom");
    ++pos_;
    attach_atom(std::move(atom));
  }

  void SmilesParser::attach_atom(Atom atom) {
    const int idx = mol_.add_atom(std::move(atom));
    if (prev_atom_ >= 0) {
      const Atom &a = mol_.atom(prev_atom_);
      const Atom &b = mol_.atom(idx);
      BondOrder order = pending_.order.value_or(
          a.aromatic && b.aromatic ? BondOrder::kAromatic : BondOrder::kSingle);
      mol_.add_bond(prev_atom_, idx, order, pending_.order.has_value());
    } else if (pending_.order) {
      fail(Errc::kSyntaxError, pending_.offset,
           "bond symbol without a preceding atom");
    }
    pending_ = {};
    prev_atom_ = idx;
  }

  void SmilesParser::parse_ring_closure(int number, std::size_t offset) {
    if (prev_atom_ < 0)
      fail(Errc::kSyntaxError, offset, "ring bond without a preceding atom");

    OpenRing &ring = rings_[number];
    if (ring.atom < 0) {
      ring.atom = prev_atom_;
      ring.bond = pending_;
      ring.offset = offset;
      pending_ = {};
      return;
    }

    const int a = ring.atom;
    const int b = prev_atom_;
    std::optional<BondOrder> order = ring.bond.order;
    if (pending_.order) {
      if (order && *order != *pending_.order)
        fail(Errc::kUnmatchedRingBond, offset,
             "conflicting bond symbols on ring closure");
      order = pending_.order;
    }
    if (a == b)
      fail(Errc::kUnmatchedRingBond, offset, "ring bond to itself");

    const Atom &aa = mol_.atom(a);
    const Atom &bb = mol_.atom(b);
    BondOrder resolved = order.value_or(aa.aromatic && bb.aromatic
                                            ? BondOrder::kAromatic
                                            : BondOrder::kSingle);
    if (mol_.add_bond(a, b, resolved, order.has_value()) < 0)
      fail(Errc::kUnmatchedRingBond, offset,
           "ring bond duplicates an existing bond");

    ring = {};
    pending_ = {};
  }

  void SmilesParser::finalize() {
    mol_.set_source(std::string(text_));
    if (saw_stereo_)
      mol_.add_warning("stereochemistry descriptors ignored");

    perceive_rings(mol_);

    std::vector<bool> bond_in_ring(mol_.num_bonds(), false);
    std::vector<bool> atom_in_ring(mol_.num_atoms(), false);
    for (const auto &ring: mol_.rings()) {
      for (std::size_t i = 0; i < ring.size(); ++i) {
        const int a = ring[i], b = ring[(i + 1) % ring.size()];
        bond_in_ring[mol_.find_bond(a, b)] = true;
        atom_in_ring[a] = true;
      }
    }

    // A default bond between aromatic atoms that is not on a ring is a
    // plain single bond (biphenyl written without '-').
    for (int i = 0; i < static_cast<int>(mol_.num_bonds()); ++i) {
      const Bond &b = mol_.bond(i);
      if (b.order == BondOrder::kAromatic && !b.explicit_symbol
          && !bond_in_ring[i])
        mol_.set_bond_order(i, BondOrder::kSingle);
    }

    for (auto &atom: mol_.atoms()) {
      if (atom.aromatic && !atom_in_ring[atom.index])
        fail(Errc::kSyntaxError, atom.offset,
             "aromatic atom '" + atom.element + "' is not in a ring");
    }
    for (int i = 0; i < static_cast<int>(mol_.num_bonds()); ++i) {
      if (mol_.bond(i).order == BondOrder::kAromatic && !bond_in_ring[i])
        fail(Errc::kSyntaxError, mol_.atom(mol_.bond(i).begin).offset,
             "aromatic bond is not in a ring");
    }

    for (auto &atom: mol_.atoms())
      if (!atom.bracket)
        atom.implicit_h = implied_hydrogens(mol_, atom.index);

    auto violations = validate_valence(mol_);
    if (!violations.empty()) {
      const auto &v = violations.front();
      const Atom &atom = mol_.atom(v.atom);
      fail(Errc::kValenceViolation, atom.offset,
           "atom " + std::to_string(v.atom) + " (" + atom.element
               + ") has valence " + std::to_string(v.valence)
               + ", allowed " + std::to_string(v.allowed));
    }
  }
}  // namespace

Molecule parse_smiles(std::string_view text) {
  return SmilesParser(text).parse();
}

std::string canonicalize(std::string_view smiles) {
  return canonical_smiles(parse_smiles(smiles));
}

}  // namespace molchord
