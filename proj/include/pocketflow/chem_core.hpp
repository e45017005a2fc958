//
// PocketFlow - Copyright 2026 The PocketFlow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "pocketflow/errors.hpp"

namespace pocketflow {

using Vec3 = Eigen::Vector3d;

struct ElementKind {
  std::string symbol;
  int atomic_number;
  double covalent_radius; // Å
  int max_valence;
};

namespace internal {
  inline std::string normalize_symbol(std::string_view sym) {
    std::string out;
    for (char c: sym) {
      if (std::isspace(static_cast<unsigned char>(c)))
        continue;
      out.push_back(out.empty()
                        ? static_cast<char>(std::toupper(
                              static_cast<unsigned char>(c)))
                        : static_cast<char>(std::tolower(
                              static_cast<unsigned char>(c))));
    }
    return out;
  }

  inline int atomic_number_of(std::string_view sym) {
    static constexpr std::pair<std::string_view, int> kTable[] = {
      { "H", 1 },   { "He", 2 },  { "Li", 3 },  { "Be", 4 },  { "B", 5 },
      { "C", 6 },   { "N", 7 },   { "O", 8 },   { "F", 9 },   { "Ne", 10 },
      { "Na", 11 }, { "Mg", 12 }, { "Al", 13 }, { "Si", 14 }, { "P", 15 },
      { "S", 16 },  { "Cl", 17 }, { "Ar", 18 }, { "K", 19 },  { "Ca", 20 },
      { "Fe", 26 }, { "Zn", 30 }, { "Se", 34 }, { "Br", 35 }, { "I", 53 },
    };
    for (auto [s, z]: kTable)
      if (s == sym)
        return z;
    return 0;
  }
} // namespace internal

/// Fixed element vocabulary. Element identity elsewhere in the library is an
/// index into this table, so the order of entries is part of a model's
/// layout.
class ElementTable {
public:
  ElementTable() = default;

  explicit ElementTable(std::vector<ElementKind> kinds) {
    for (auto &k: kinds)
      add(std::move(k));
  }

  /// H, C, N, O, F, P, S, Cl, Br, I with single-bond covalent radii.
  static const ElementTable &standard() {
    static const ElementTable table({
        { "H", 1, 0.31, 1 },
        { "C", 6, 0.77, 4 },
        { "N", 7, 0.75, 3 },
        { "O", 8, 0.73, 2 },
        { "F", 9, 0.71, 1 },
        { "P", 15, 1.06, 5 },
        { "S", 16, 1.02, 6 },
        { "Cl", 17, 0.99, 1 },
        { "Br", 35, 1.14, 1 },
        { "I", 53, 1.33, 1 },
    });
    return table;
  }

  /// Reads `symbol radius max_valence [atomic_number]` lines. Blank lines and
  /// `#` comments are skipped.
  static ElementTable parse(std::istream &is) {
    ElementTable table;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      if (auto hash = line.find('#'); hash != std::string::npos)
        line.erase(hash);
      std::istringstream ls(line);
      std::string sym;
      if (!(ls >> sym))
        continue;

      ElementKind kind;
      kind.symbol = internal::normalize_symbol(sym);
      if (!(ls >> kind.covalent_radius >> kind.max_valence))
        throw ParseError("element table line " + std::to_string(lineno)
                         + ": expected symbol, radius and max valence");
      if (!(ls >> kind.atomic_number))
        kind.atomic_number = internal::atomic_number_of(kind.symbol);
      if (kind.atomic_number <= 0)
        throw VocabularyError("element table line " + std::to_string(lineno)
                              + ": unknown atomic number for "
                              + kind.symbol);
      table.add(std::move(kind));
    }
    if (table.empty())
      throw VocabularyError("element table is empty");
    return table;
  }

  static ElementTable load(const std::string &path) {
    std::ifstream ifs(path);
    if (!ifs)
      throw InputError("cannot open element table " + path);
    return parse(ifs);
  }

  int size() const { return static_cast<int>(kinds_.size()); }
  bool empty() const { return kinds_.empty(); }

  const ElementKind &operator[](int idx) const {
    if (idx < 0 || idx >= size())
      throw VocabularyError("element index " + std::to_string(idx)
                            + " outside vocabulary");
    return kinds_[idx];
  }

  /// Index of a symbol, or -1.
  int find(std::string_view symbol) const {
    const std::string norm = internal::normalize_symbol(symbol);
    for (int i = 0; i < size(); ++i)
      if (kinds_[i].symbol == norm)
        return i;
    return -1;
  }

  int index_of(std::string_view symbol) const {
    const int idx = find(symbol);
    if (idx < 0)
      throw VocabularyError("element '" + std::string(symbol)
                            + "' not in vocabulary");
    return idx;
  }

  auto begin() const { return kinds_.begin(); }
  auto end() const { return kinds_.end(); }

  friend bool operator==(const ElementTable &a, const ElementTable &b) {
    return a.symbols() == b.symbols();
  }

  std::vector<std::string> symbols() const {
    std::vector<std::string> out;
    for (const auto &k: kinds_)
      out.push_back(k.symbol);
    return out;
  }

private:
  void add(ElementKind kind) {
    if (!(kind.covalent_radius > 0))
      throw VocabularyError("covalent radius of " + kind.symbol
                            + " must be positive");
    if (kind.max_valence < 1)
      throw VocabularyError("max valence of " + kind.symbol
                            + " must be at least 1");
    if (find(kind.symbol) >= 0)
      throw VocabularyError("duplicate element " + kind.symbol);
    kinds_.push_back(std::move(kind));
  }

  std::vector<ElementKind> kinds_;
};

inline int max_valence(const ElementTable &table, int element) {
  return table[element].max_valence;
}

inline int max_valence(const ElementTable &table, std::string_view symbol) {
  return table[table.index_of(symbol)].max_valence;
}

struct Atom {
  int element;
  Vec3 position;

  friend bool operator==(const Atom &a, const Atom &b) {
    return a.element == b.element && a.position == b.position;
  }
};

struct Bond {
  int i;
  int j;
  int order = 1;

  friend bool operator==(const Bond &, const Bond &) = default;
  friend auto operator<=>(const Bond &, const Bond &) = default;
};

struct Molecule {
  std::vector<Atom> atoms;
  std::vector<Bond> bonds;

  int size() const { return static_cast<int>(atoms.size()); }
  bool empty() const { return atoms.empty(); }
};

struct Pocket {
  std::vector<Atom> atoms;
  std::vector<double> bfactors; // Å², one per atom

  int size() const { return static_cast<int>(atoms.size()); }
  bool empty() const { return atoms.empty(); }

  Vec3 centroid() const {
    Vec3 c = Vec3::Zero();
    for (const auto &a: atoms)
      c += a.position;
    return atoms.empty() ? c : Vec3(c / static_cast<double>(atoms.size()));
  }
};

/// Distance windows for covalent bond perception.
struct BondRules {
  double tolerance = 0.45;
  double clash_factor = 0.4;

  double lower(double ri, double rj) const { return clash_factor * (ri + rj); }
  double upper(double ri, double rj) const { return ri + rj + tolerance; }
};

struct BondPerception {
  std::vector<Bond> bonds;
  std::vector<std::pair<int, int>> clashes;
};

/// Like infer_bonds(), but reports clashing pairs instead of throwing.
inline BondPerception perceive_bonds(const ElementTable &table,
                                     const std::vector<Atom> &atoms,
                                     const BondRules &rules = {}) {
  BondPerception out;
  const int n = static_cast<int>(atoms.size());
  for (int i = 0; i < n; ++i) {
    const double ri = table[atoms[i].element].covalent_radius;
    for (int j = i + 1; j < n; ++j) {
      const double rj = table[atoms[j].element].covalent_radius;
      const double d = (atoms[i].position - atoms[j].position).norm();
      if (d < rules.lower(ri, rj))
        out.clashes.emplace_back(i, j);
      else if (d <= rules.upper(ri, rj))
        out.bonds.push_back({ i, j, 1 });
    }
  }
  return out;
}

inline std::vector<Bond> infer_bonds(const ElementTable &table,
                                     const std::vector<Atom> &atoms,
                                     const BondRules &rules = {}) {
  if (atoms.empty())
    throw InputError("bond inference needs at least one atom");
  for (const auto &a: atoms)
    if (!a.position.allFinite())
      throw InputError("non-finite atom coordinate");

  auto perceived = perceive_bonds(table, atoms, rules);
  if (!perceived.clashes.empty()) {
    std::string msg = "atom clash:";
    for (auto [i, j]: perceived.clashes)
      msg += " (" + std::to_string(i) + "," + std::to_string(j) + ")";
    throw ClashError(msg);
  }
  return std::move(perceived.bonds);
}

inline int used_valence(const Molecule &mol, int atom) {
  int used = 0;
  for (const auto &b: mol.bonds)
    if (b.i == atom || b.j == atom)
      used += b.order;
  return used;
}

/// Remaining bond-order capacity; negative when the atom is over-bonded.
inline int open_valence(const ElementTable &table, const Molecule &mol,
                        int atom) {
  if (atom < 0 || atom >= mol.size())
    throw RangeError("atom index " + std::to_string(atom) + " out of range");
  return table[mol.atoms[atom].element].max_valence - used_valence(mol, atom);
}

struct ValidityReport {
  bool valid = true;
  std::vector<std::pair<int, std::string>> violations;

  void add(int atom, std::string reason) {
    valid = false;
    violations.emplace_back(atom, std::move(reason));
  }
};

/// Valence, clash, connectivity and non-emptiness checks. Bond indices are
/// validated too; bonds are expected to come from infer_bonds().
inline ValidityReport check_validity(const ElementTable &table,
                                     const Molecule &mol,
                                     const BondRules &rules = {}) {
  ValidityReport report;
  const int n = mol.size();
  if (n == 0) {
    report.add(-1, "empty");
    return report;
  }

  std::vector<std::pair<int, int>> seen;
  for (const auto &b: mol.bonds) {
    if (b.i < 0 || b.j >= n || b.i >= b.j) {
      report.add(std::clamp(b.i, 0, n - 1), "malformed bond");
      continue;
    }
    if (std::find(seen.begin(), seen.end(), std::make_pair(b.i, b.j))
        != seen.end())
      report.add(b.i, "duplicate bond");
    seen.emplace_back(b.i, b.j);
  }

  std::vector<int> used(n, 0);
  for (const auto &b: mol.bonds) {
    if (b.i < 0 || b.j >= n || b.i >= b.j)
      continue;
    used[b.i] += b.order;
    used[b.j] += b.order;
  }
  for (int i = 0; i < n; ++i) {
    const auto &kind = table[mol.atoms[i].element];
    if (used[i] > kind.max_valence)
      report.add(i, kind.symbol + " exceeds valence "
                        + std::to_string(kind.max_valence) + " with "
                        + std::to_string(used[i]));
    else if (used[i] < 0)
      report.add(i, "negative bond order sum");
  }

  for (auto [i, j]: perceive_bonds(table, mol.atoms, rules).clashes)
    report.add(i, "clash with atom " + std::to_string(j));

  // Union-find over bonds for connectivity.
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto root = [&](int x) {
    while (parent[x] != x)
      x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto &b: mol.bonds)
    if (b.i >= 0 && b.j < n && b.i < b.j)
      parent[root(b.i)] = root(b.j);
  const int r0 = root(0);
  for (int i = 1; i < n; ++i) {
    if (root(i) != r0) {
      report.add(i, "disconnected fragment");
      break;
    }
  }

  return report;
}

} // namespace pocketflow
