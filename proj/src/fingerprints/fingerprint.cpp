// Copyright 2026 The chemlab Authors.
// SPDX-License-Identifier: Apache-2.0

#include "chemlab/fingerprints/fingerprint.hpp"

#include <algorithm>
#include <bit>


namespace chemlab::fp {

void FingerprintConfig::validate() const {
  if (width <= 0 || !std::has_single_bit(static_cast<unsigned>(width))) {
    throw std::invalid_argument("fingerprint width must be a power of two");
  }
  if (radius < 0 || radius > 3) {
    throw std::invalid_argument("ECFP radius must be in 0..3");
  }
  if (max_path < 1) {
    throw std::invalid_argument("path length must be positive");
  }
}

std::string FingerprintConfig::name() const {
  return kind == FingerprintKind::Ecfp ? "ecfp" + std::to_string(radius)
                                       : "path" + std::to_string(max_path);
}

Fingerprint::Fingerprint(const FingerprintConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  words_.assign(static_cast<std::size_t>((cfg_.width + 63) / 64), 0);
}

bool Fingerprint::test(int bit) const {
  return (words_[static_cast<std::size_t>(bit / 64)] >> (bit % 64)) & 1U;
}

void Fingerprint::set(int bit) {
  words_[static_cast<std::size_t>(bit / 64)] |= std::uint64_t{1} << (bit % 64);
}

int Fingerprint::count() const noexcept {
  int n = 0;
  for (const auto w : words_) {
    n += std::popcount(w);
  }
  return n;
}

std::vector<int> Fingerprint::on_bits() const {
  std::vector<int> out;
  for (int i = 0; i < cfg_.width; ++i) {
    if (test(i)) {
      out.push_back(i);
    }
  }
  return out;
}

std::string Fingerprint::hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  for (int byte = 0; byte * 8 < cfg_.width; ++byte) {
    int v = 0;
    for (int k = 0; k < 8 && byte * 8 + k < cfg_.width; ++k) {
      v |= test(byte * 8 + k) ? 1 << k : 0;
    }
    out += kDigits[v >> 4];
    out += kDigits[v & 15];
  }
  return out;
}

std::uint64_t fnv1a(std::span<const std::int64_t> values) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto v : values) {
    auto u = static_cast<std::uint64_t>(v);
    for (int b = 0; b < 8; ++b) {
      h ^= u & 0xff;
      h *= 0x100000001b3ULL;
      u >>= 8;
    }
  }
  return h;
}

namespace {

int bond_code(mol::BondOrder o) { return static_cast<int>(o); }

void fold(Fingerprint& f, std::uint64_t id) {
  f.set(static_cast<int>(id & static_cast<std::uint64_t>(f.width() - 1)));
}

// 0 when the center has no configuration or its neighbors are not all
// distinguishable by `ids`; otherwise 1 or 2 for the two handednesses.
std::int64_t parity_class(const mol::Molecule& m, int atom, const std::vector<std::uint64_t>& ids) {
  const auto* center = m.stereocenter_at(atom);
  if (center == nullptr) {
    return 0;
  }
  std::array<int, 4> order = center->neighbors;
  const auto key = [&](int n) -> std::uint64_t {
    return n == mol::kImplicitNeighbor ? 0 : ids[static_cast<std::size_t>(n)] | 1;
  };
  std::sort(order.begin(), order.end(), [&](int x, int y) { return key(x) < key(y); });
  for (std::size_t k = 1; k < 4; ++k) {
    if (key(order[k]) == key(order[k - 1])) {
      return 0;
    }
  }
  return center->chirality_for(order) == mol::Chirality::Clockwise ? 2 : 1;
}

}  // namespace

Fingerprint ecfp(const mol::Molecule& m, const FingerprintConfig& cfg) {
  Fingerprint f(cfg);
  const auto n = static_cast<std::size_t>(m.atom_count());
  const auto rings = mol::ring_atoms(m);
  std::vector<std::uint64_t> ids(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = m.atom(static_cast<int>(i));
    const std::int64_t inv[] = {static_cast<std::int64_t>(a.element), a.charge,
                                m.degree(static_cast<int>(i)), a.hydrogens, rings[i] ? 1 : 0};
    ids[i] = fnv1a(inv);
    fold(f, ids[i]);
  }
  std::vector<std::int64_t> buf;
  std::vector<std::pair<int, std::uint64_t>> env;
  for (int r = 1; r <= cfg.radius; ++r) {
    std::vector<std::uint64_t> next(n);
    for (std::size_t i = 0; i < n; ++i) {
      env.clear();
      for (const auto& nb : m.neighbors(static_cast<int>(i))) {
        env.emplace_back(bond_code(m.bond(nb.bond).order), ids[static_cast<std::size_t>(nb.atom)]);
      }
      std::sort(env.begin(), env.end());
      buf.assign({r, static_cast<std::int64_t>(ids[i])});
      for (const auto& [order, id] : env) {
        buf.push_back(order);
        buf.push_back(static_cast<std::int64_t>(id));
      }
      if (r >= 2) {
        buf.push_back(parity_class(m, static_cast<int>(i), ids));
      }
      next[i] = fnv1a(buf);
      fold(f, next[i]);
    }
    ids = std::move(next);
  }
  return f;
}

namespace {

class PathWalker {
 public:
  PathWalker(const mol::Molecule& m, Fingerprint& f, int max_atoms)
      : m_(m), f_(f), max_atoms_(max_atoms), on_path_(static_cast<std::size_t>(m.atom_count()), false) {}

  void run() {
    for (int a = 0; a < m_.atom_count(); ++a) {
      atoms_.assign(1, a);
      on_path_[static_cast<std::size_t>(a)] = true;
      emit();
      extend();
      on_path_[static_cast<std::size_t>(a)] = false;
    }
  }

 private:
  std::int64_t atom_code(int a) const {
    const auto& atom = m_.atom(a);
    return static_cast<std::int64_t>(atom.element) * 2 + (atom.aromatic ? 1 : 0);
  }

  void emit() {
    std::vector<std::int64_t> fwd;
    std::vector<std::int64_t> rev;
    const auto k = atoms_.size();
    for (std::size_t i = 0; i < k; ++i) {
      fwd.push_back(atom_code(atoms_[i]));
      rev.push_back(atom_code(atoms_[k - 1 - i]));
      if (i + 1 < k) {
        fwd.push_back(100 + static_cast<int>(orders_[i]));
        rev.push_back(100 + static_cast<int>(orders_[k - 2 - i]));
      }
    }
    fold(f_, fnv1a(std::min(fwd, rev)));
  }

  void extend() {
    if (static_cast<int>(atoms_.size()) >= max_atoms_) {
      return;
    }
    for (const auto& nb : m_.neighbors(atoms_.back())) {
      const auto u = static_cast<std::size_t>(nb.atom);
      if (on_path_[u]) {
        continue;
      }
      on_path_[u] = true;
      atoms_.push_back(nb.atom);
      orders_.push_back(m_.bond(nb.bond).order);
      emit();
      extend();
      orders_.pop_back();
      atoms_.pop_back();
      on_path_[u] = false;
    }
  }

  const mol::Molecule& m_;
  Fingerprint& f_;
  int max_atoms_;
  std::vector<bool> on_path_;
  std::vector<int> atoms_;
  std::vector<mol::BondOrder> orders_;
};

}  // namespace

Fingerprint path_keys(const mol::Molecule& m, const FingerprintConfig& cfg) {
  Fingerprint f(cfg);
  PathWalker(m, f, cfg.max_path).run();
  return f;
}

Fingerprint fingerprint(const mol::Molecule& m, const FingerprintConfig& cfg) {
  return cfg.kind == FingerprintKind::Ecfp ? ecfp(m, cfg) : path_keys(m, cfg);
}

double tanimoto(const Fingerprint& a, const Fingerprint& b) {
  if (!(a.config() == b.config())) {
    throw ConfigMismatch("tanimoto: fingerprints use different configurations");
  }
  long both = 0;
  long either = 0;
  const auto wa = a.words();
  const auto wb = b.words();
  for (std::size_t i = 0; i < wa.size(); ++i) {
    both += std::popcount(wa[i] & wb[i]);
    either += std::popcount(wa[i] | wb[i]);
  }
  return either == 0 ? 1.0 : static_cast<double>(both) / static_cast<double>(either);
}

}  // namespace chemlab::fp
