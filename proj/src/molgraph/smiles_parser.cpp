// Copyright 2026 The chemlab Authors.
// SPDX-License-Identifier: Apache-2.0

#include <cctype>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "chemlab/molgraph/smiles.hpp"

namespace chemlab::mol {

std::string_view to_string(GrammarErrorKind kind) noexcept {
  switch (kind) {
    case GrammarErrorKind::Empty:
      return "empty";
    case GrammarErrorKind::UnknownSymbol:
      return "unknown_symbol";
    case GrammarErrorKind::UnsupportedElement:
      return "unsupported_element";
    case GrammarErrorKind::UnbalancedBranch:
      return "unbalanced_branch";
    case GrammarErrorKind::UnclosedRing:
      return "unclosed_ring";
    case GrammarErrorKind::DanglingBond:
      return "dangling_bond";
    case GrammarErrorKind::BadBracketAtom:
      return "bad_bracket_atom";
    case GrammarErrorKind::BadRingBond:
      return "bad_ring_bond";
    case GrammarErrorKind::BadChirality:
      return "bad_chirality";
  }
  return "unknown";
}

GrammarError::GrammarError(GrammarErrorKind kind, std::size_t offset, const std::string& what)
    : std::runtime_error(what + " at offset " + std::to_string(offset)),
      kind_(kind),
      offset_(offset) {}

namespace {

constexpr int kPendingRing = -2;

struct BondSpec {
  BondOrder order = BondOrder::Single;
  BondDirection direction = BondDirection::None;
  std::size_t offset = 0;
};

struct RingOpening {
  int atom;
  std::size_t slot;
  std::optional<BondSpec> bond;
  std::size_t offset;
};

class Parser {
 public:
  explicit Parser(std::string_view s) : s_(s) {}

  Molecule run() {
    if (s_.empty()) {
      fail(GrammarErrorKind::Empty, 0, "empty SMILES");
    }
    while (pos_ < s_.size()) {
      step();
    }
    if (pending_) {
      fail(GrammarErrorKind::DanglingBond, pending_->offset, "bond without a following atom");
    }
    if (!branches_.empty()) {
      fail(GrammarErrorKind::UnbalancedBranch, branches_.back().offset, "unclosed branch");
    }
    if (!rings_.empty()) {
      const auto& [digit, open] = *rings_.begin();
      fail(GrammarErrorKind::UnclosedRing, open.offset,
           "ring bond " + std::to_string(digit) + " never closed");
    }
    finish_hydrogens();
    finish_stereo();
    return std::move(mol_);
  }

 private:
  struct BranchPoint {
    int atom;
    int atoms_before;
    std::size_t offset;
  };

  [[noreturn]] static void fail(GrammarErrorKind kind, std::size_t offset, const std::string& msg) {
    throw GrammarError(kind, offset, msg);
  }

  void step() {
    const char c = s_[pos_];
    switch (c) {
      case '(':
        open_branch();
        return;
      case ')':
        close_branch();
        return;
      case '.':
        if (pending_) {
          fail(GrammarErrorKind::DanglingBond, pending_->offset, "bond before '.'");
        }
        if (prev_ < 0 || pos_ + 1 == s_.size()) {
          fail(GrammarErrorKind::Empty, pos_, "empty fragment");
        }
        prev_ = -1;
        ++pos_;
        return;
      case '-':
      case '=':
      case '#':
      case ':':
      case '/':
      case '\\':
        read_bond();
        return;
      case '%':
        read_ring_bond();
        return;
      case '[':
        read_bracket_atom();
        return;
      default:
        break;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      read_ring_bond();
      return;
    }
    read_organic_atom();
  }

  void open_branch() {
    if (prev_ < 0) {
      fail(GrammarErrorKind::UnbalancedBranch, pos_, "branch without a preceding atom");
    }
    if (pending_) {
      fail(GrammarErrorKind::DanglingBond, pending_->offset, "bond before '('");
    }
    branches_.push_back(BranchPoint{prev_, mol_.atom_count(), pos_});
    ++pos_;
  }

  void close_branch() {
    if (branches_.empty()) {
      fail(GrammarErrorKind::UnbalancedBranch, pos_, "unmatched ')'");
    }
    if (pending_) {
      fail(GrammarErrorKind::DanglingBond, pending_->offset, "bond before ')'");
    }
    if (branches_.back().atoms_before == mol_.atom_count()) {
      fail(GrammarErrorKind::UnbalancedBranch, pos_, "empty branch");
    }
    prev_ = branches_.back().atom;
    branches_.pop_back();
    ++pos_;
  }

  void read_bond() {
    if (pending_) {
      fail(GrammarErrorKind::DanglingBond, pos_, "two consecutive bond symbols");
    }
    BondSpec spec;
    spec.offset = pos_;
    switch (s_[pos_]) {
      case '=':
        spec.order = BondOrder::Double;
        break;
      case '#':
        spec.order = BondOrder::Triple;
        break;
      case ':':
        spec.order = BondOrder::Aromatic;
        break;
      case '/':
        spec.direction = BondDirection::Up;
        break;
      case '\\':
        spec.direction = BondDirection::Down;
        break;
      default:
        break;
    }
    pending_ = spec;
    ++pos_;
  }

  void read_ring_bond() {
    const std::size_t start = pos_;
    int digit = 0;
    if (s_[pos_] == '%') {
      if (pos_ + 2 >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[pos_ + 1])) ||
          !std::isdigit(static_cast<unsigned char>(s_[pos_ + 2]))) {
        fail(GrammarErrorKind::BadRingBond, pos_, "'%' must be followed by two digits");
      }
      digit = (s_[pos_ + 1] - '0') * 10 + (s_[pos_ + 2] - '0');
      pos_ += 3;
    } else {
      digit = s_[pos_] - '0';
      ++pos_;
    }
    if (prev_ < 0) {
      fail(GrammarErrorKind::BadRingBond, start, "ring bond without a preceding atom");
    }
    const auto spec = pending_;
    pending_.reset();
    auto it = rings_.find(digit);
    if (it == rings_.end()) {
      order_[static_cast<std::size_t>(prev_)].push_back(kPendingRing);
      rings_.emplace(digit, RingOpening{prev_, order_[static_cast<std::size_t>(prev_)].size() - 1,
                                        spec, start});
      return;
    }
    const RingOpening open = it->second;
    rings_.erase(it);
    if (open.atom == prev_) {
      fail(GrammarErrorKind::BadRingBond, start, "ring bond closes on its own atom");
    }
    if (open.bond && spec && open.bond->order != spec->order) {
      fail(GrammarErrorKind::BadRingBond, start, "conflicting ring bond orders");
    }
    int begin = open.atom;
    int end = prev_;
    BondOrder order = default_order(open.atom, prev_);
    BondDirection direction = BondDirection::None;
    if (open.bond) {
      order = open.bond->order;
      direction = open.bond->direction;
    } else if (spec) {
      order = spec->order;
      direction = spec->direction;
      std::swap(begin, end);
    }
    if (mol_.find_bond(begin, end)) {
      fail(GrammarErrorKind::BadRingBond, start, "ring bond duplicates an existing bond");
    }
    mol_.add_bond(begin, end, order, direction);
    order_[static_cast<std::size_t>(open.atom)][open.slot] = prev_;
    order_[static_cast<std::size_t>(prev_)].push_back(open.atom);
  }

  BondOrder default_order(int a, int b) const {
    return mol_.atom(a).aromatic && mol_.atom(b).aromatic ? BondOrder::Aromatic
                                                          : BondOrder::Single;
  }

  // Reads an element symbol at pos_; advances past it.
  std::pair<Element, bool> read_element(bool in_bracket) {
    const std::size_t start = pos_;
    const char c = s_[pos_];
    if (std::isupper(static_cast<unsigned char>(c))) {
      std::string sym(1, c);
      ++pos_;
      if (pos_ < s_.size() && std::islower(static_cast<unsigned char>(s_[pos_]))) {
        std::string two = sym + s_[pos_];
        if (element_from_symbol(two)) {
          ++pos_;
          return {*element_from_symbol(two), false};
        }
        if (in_bracket) {
          fail(GrammarErrorKind::UnsupportedElement, start, "unsupported element '" + two + "'");
        }
      }
      const auto e = element_from_symbol(sym);
      if (!e) {
        fail(in_bracket ? GrammarErrorKind::UnsupportedElement : GrammarErrorKind::UnknownSymbol,
             start, "unsupported element '" + sym + "'");
      }
      if (!in_bracket && *e == Element::H) {
        fail(GrammarErrorKind::UnknownSymbol, start, "hydrogen must be written in brackets");
      }
      return {*e, false};
    }
    if (std::islower(static_cast<unsigned char>(c))) {
      if (in_bracket && pos_ + 1 < s_.size() &&
          std::islower(static_cast<unsigned char>(s_[pos_ + 1]))) {
        fail(GrammarErrorKind::UnsupportedElement, start,
             "unsupported aromatic element '" + std::string(s_.substr(pos_, 2)) + "'");
      }
      const auto e = element_from_symbol(std::string(1, static_cast<char>(std::toupper(c))));
      if (!e || !supports_aromatic(*e)) {
        fail(GrammarErrorKind::UnknownSymbol, start, std::string("unknown symbol '") + c + "'");
      }
      ++pos_;
      return {*e, true};
    }
    fail(GrammarErrorKind::UnknownSymbol, start, std::string("unknown symbol '") + c + "'");
  }

  void read_organic_atom() {
    const std::size_t start = pos_;
    const auto [element, aromatic] = read_element(false);
    Atom atom;
    atom.element = element;
    atom.aromatic = aromatic;
    add_atom(atom, false, std::nullopt, start);
  }

  int read_number() {
    int value = 0;
    bool any = false;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
      value = value * 10 + (s_[pos_] - '0');
      ++pos_;
      any = true;
    }
    return any ? value : -1;
  }

  void read_bracket_atom() {
    const std::size_t start = pos_;
    ++pos_;
    if (pos_ >= s_.size()) {
      fail(GrammarErrorKind::BadBracketAtom, start, "unterminated bracket atom");
    }
    if (std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
      fail(GrammarErrorKind::BadBracketAtom, pos_, "isotopes are not supported");
    }
    const auto [element, aromatic] = read_element(true);
    Atom atom;
    atom.element = element;
    atom.aromatic = aromatic;

    std::optional<Chirality> chirality;
    if (pos_ < s_.size() && s_[pos_] == '@') {
      ++pos_;
      chirality = Chirality::CounterClockwise;
      if (pos_ < s_.size() && s_[pos_] == '@') {
        ++pos_;
        chirality = Chirality::Clockwise;
      }
      if (pos_ < s_.size() && std::isupper(static_cast<unsigned char>(s_[pos_])) &&
          s_[pos_] != 'H') {
        fail(GrammarErrorKind::BadChirality, pos_, "only tetrahedral @/@@ is supported");
      }
    }
    if (pos_ < s_.size() && s_[pos_] == 'H') {
      ++pos_;
      const int n = read_number();
      atom.hydrogens = n < 0 ? 1 : n;
    }
    if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) {
      const char sign = s_[pos_];
      const int unit = sign == '+' ? 1 : -1;
      ++pos_;
      int magnitude = 1;
      if (pos_ < s_.size() && s_[pos_] == sign) {
        while (pos_ < s_.size() && s_[pos_] == sign) {
          ++magnitude;
          ++pos_;
        }
      } else {
        const int n = read_number();
        if (n >= 0) {
          magnitude = n;
        }
      }
      atom.charge = unit * magnitude;
    }
    if (pos_ < s_.size() && s_[pos_] == ':') {
      ++pos_;
      if (read_number() < 0) {
        fail(GrammarErrorKind::BadBracketAtom, pos_, "atom class must be numeric");
      }
    }
    if (pos_ >= s_.size() || s_[pos_] != ']') {
      fail(GrammarErrorKind::BadBracketAtom, start, "malformed bracket atom");
    }
    ++pos_;
    add_atom(atom, true, chirality, start);
  }

  void add_atom(const Atom& atom, bool bracket, std::optional<Chirality> chirality,
                std::size_t offset) {
    if (pending_ && prev_ < 0) {
      fail(GrammarErrorKind::DanglingBond, pending_->offset, "bond without a preceding atom");
    }
    const int idx = mol_.add_atom(atom);
    order_.emplace_back();
    bracket_.push_back(bracket);
    has_from_.push_back(prev_ >= 0);
    chirality_.push_back(chirality);
    chirality_offset_.push_back(offset);
    if (prev_ >= 0) {
      BondOrder order = default_order(prev_, idx);
      BondDirection direction = BondDirection::None;
      if (pending_) {
        order = pending_->order;
        direction = pending_->direction;
      }
      mol_.add_bond(prev_, idx, order, direction);
      order_[static_cast<std::size_t>(idx)].push_back(prev_);
      order_[static_cast<std::size_t>(prev_)].push_back(idx);
    }
    pending_.reset();
    if (chirality && atom.hydrogens == 1) {
      order_[static_cast<std::size_t>(idx)].push_back(kImplicitNeighbor);
    }
    prev_ = idx;
  }

  void finish_hydrogens() {
    for (int i = 0; i < mol_.atom_count(); ++i) {
      if (!bracket_[static_cast<std::size_t>(i)]) {
        mol_.atom(i).hydrogens = default_hydrogens(mol_, i);
      }
    }
  }

  void finish_stereo() {
    for (int i = 0; i < mol_.atom_count(); ++i) {
      const auto ui = static_cast<std::size_t>(i);
      if (!chirality_[ui]) {
        continue;
      }
      if (mol_.atom(i).hydrogens > 1) {
        fail(GrammarErrorKind::BadChirality, chirality_offset_[ui],
             "stereocenter with more than one hydrogen");
      }
      auto refs = order_[ui];
      if (refs.size() == 3 && mol_.atom(i).hydrogens == 0) {
        refs.insert(refs.begin() + (has_from_[ui] ? 1 : 0), kImplicitNeighbor);
      }
      if (refs.size() != 4) {
        fail(GrammarErrorKind::BadChirality, chirality_offset_[ui],
             "stereocenter needs three or four neighbors");
      }
      TetrahedralCenter center;
      center.atom = i;
      center.chirality = *chirality_[ui];
      std::copy(refs.begin(), refs.end(), center.neighbors.begin());
      mol_.add_stereocenter(center);
    }
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  Molecule mol_;
  int prev_ = -1;
  std::optional<BondSpec> pending_;
  std::vector<BranchPoint> branches_;
  std::map<int, RingOpening> rings_;
  std::vector<std::vector<int>> order_;
  std::vector<bool> bracket_;
  std::vector<bool> has_from_;
  std::vector<std::optional<Chirality>> chirality_;
  std::vector<std::size_t> chirality_offset_;
};

}  // namespace

Molecule parse_smiles(std::string_view smiles) { return Parser(smiles).run(); }

}  // namespace chemlab::mol
