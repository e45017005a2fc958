//
// PocketFlow - Copyright 2026 The PocketFlow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "pocketflow/chem_core.hpp"
#include "pocketflow/errors.hpp"

namespace pocketflow {

enum class RecordKind { kAtom, kHetatm };

/// One ATOM/HETATM line. Text columns are kept verbatim (including padding)
/// so that a parsed line serializes back to the same bytes; use the trimmed
/// accessors for lookups.
struct StructureRecord {
  RecordKind kind = RecordKind::kAtom;
  int serial = 0;
  std::string atom_name = "    ";    // columns 13-16
  char alt_loc = ' ';                // column 17
  std::string residue_name = "   ";  // columns 18-20
  char chain = ' ';                  // column 22
  int residue_seq = 0;               // columns 23-26
  char insertion_code = ' ';         // column 27
  Vec3 position = Vec3::Zero();      // columns 31-54
  double occupancy = 1.0;            // columns 55-60
  double bfactor = 0.0;              // columns 61-66
  std::string element;               // columns 77-78, trimmed
  std::string charge;                // columns 79-80, verbatim when present

  std::string name() const;
  std::string residue() const;

  friend bool operator==(const StructureRecord &,
                         const StructureRecord &) = default;
};

namespace internal {
  inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
      s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
      s.remove_suffix(1);
    return s;
  }

  // 1-based inclusive columns; short lines yield a shorter (possibly empty)
  // field.
  inline std::string_view columns(std::string_view line, int first, int last) {
    const size_t begin = static_cast<size_t>(first - 1);
    if (begin >= line.size())
      return {};
    return line.substr(begin, std::min<size_t>(last - first + 1,
                                               line.size() - begin));
  }

  inline std::string padded(std::string_view field, size_t width) {
    std::string out(field);
    out.resize(width, ' ');
    return out;
  }

  template <class T>
  T parse_number(std::string_view field, int lineno, const char *what) {
    const auto text = trim(field);
    T value {};
    const char *end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (text.empty() || ec != std::errc() || ptr != end)
      throw ParseError("line " + std::to_string(lineno) + ": malformed "
                       + what + " field '" + std::string(field) + "'");
    return value;
  }

  inline std::string element_from_name(std::string_view name) {
    const std::string raw = padded(name, 4);
    const auto alpha = [](char c) {
      return std::isalpha(static_cast<unsigned char>(c)) != 0;
    };
    if (alpha(raw[0]) && alpha(raw[1])) {
      auto two = normalize_symbol(raw.substr(0, 2));
      if (atomic_number_of(two) > 0)
        return two;
      return normalize_symbol(raw.substr(0, 1));
    }
    if (alpha(raw[0]))
      return normalize_symbol(raw.substr(0, 1));
    if (alpha(raw[1]))
      return normalize_symbol(raw.substr(1, 1));
    return {};
  }
} // namespace internal

inline std::string StructureRecord::name() const {
  return std::string(internal::trim(atom_name));
}

inline std::string StructureRecord::residue() const {
  return std::string(internal::trim(residue_name));
}

/// Parses ATOM/HETATM records from the first model of a PDB file. Every other
/// record type is skipped.
inline std::vector<StructureRecord> parse_pdb(std::istream &is) {
  using internal::columns;
  std::vector<StructureRecord> records;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    const std::string_view sv(line);
    const auto kind = columns(sv, 1, 6);
    if (kind == "ENDMDL")
      break;
    StructureRecord rec;
    if (kind == "ATOM  " || kind == "ATOM")
      rec.kind = RecordKind::kAtom;
    else if (kind == "HETATM")
      rec.kind = RecordKind::kHetatm;
    else
      continue;

    if (sv.size() < 54)
      throw ParseError("line " + std::to_string(lineno)
                       + ": truncated coordinate columns");

    rec.serial = internal::parse_number<int>(columns(sv, 7, 11), lineno,
                                             "serial");
    rec.atom_name = internal::padded(columns(sv, 13, 16), 4);
    rec.alt_loc = sv[16];
    rec.residue_name = internal::padded(columns(sv, 18, 20), 3);
    rec.chain = sv[21];
    rec.residue_seq = internal::parse_number<int>(columns(sv, 23, 26), lineno,
                                                  "residue sequence");
    rec.insertion_code = sv[26];
    rec.position = Vec3(
        internal::parse_number<double>(columns(sv, 31, 38), lineno, "x"),
        internal::parse_number<double>(columns(sv, 39, 46), lineno, "y"),
        internal::parse_number<double>(columns(sv, 47, 54), lineno, "z"));
    if (!rec.position.allFinite())
      throw ParseError("line " + std::to_string(lineno)
                       + ": non-finite coordinate");

    if (auto f = columns(sv, 55, 60); !internal::trim(f).empty())
      rec.occupancy = internal::parse_number<double>(f, lineno, "occupancy");
    if (auto f = columns(sv, 61, 66); !internal::trim(f).empty())
      rec.bfactor = internal::parse_number<double>(f, lineno, "B-factor");
    if (!(rec.bfactor >= 0) || !std::isfinite(rec.bfactor))
      throw ParseError("line " + std::to_string(lineno)
                       + ": negative or non-finite B-factor");

    rec.element = std::string(internal::trim(columns(sv, 77, 78)));
    if (rec.element.empty())
      rec.element = internal::element_from_name(rec.atom_name);
    else
      rec.element = internal::normalize_symbol(rec.element);
    rec.charge = std::string(columns(sv, 79, 80));
    if (internal::trim(rec.charge).empty())
      rec.charge.clear();

    records.push_back(std::move(rec));
  }
  return records;
}

inline std::vector<StructureRecord> parse_pdb(const std::string &text) {
  std::istringstream is(text);
  return parse_pdb(is);
}

inline std::vector<StructureRecord> read_pdb_file(const std::string &path) {
  std::ifstream ifs(path);
  if (!ifs)
    throw InputError("cannot open " + path);
  return parse_pdb(ifs);
}

inline std::string format_record(const StructureRecord &r) {
  const auto fits = [](double v) {
    return std::isfinite(v) && std::abs(v) < 9999.9995;
  };
  for (int i = 0; i < 3; ++i)
    if (!fits(r.position[i]))
      throw RangeError("coordinate " + std::to_string(r.position[i])
                       + " does not fit in 8 columns");
  if (!(r.occupancy > -99.995 && r.occupancy < 999.995))
    throw RangeError("occupancy does not fit in 6 columns");
  if (!(r.bfactor >= 0 && r.bfactor < 999.995))
    throw RangeError("B-factor does not fit in 6 columns");
  if (r.serial < -9999 || r.serial > 99999)
    throw RangeError("serial does not fit in 5 columns");
  if (r.residue_seq < -999 || r.residue_seq > 9999)
    throw RangeError("residue sequence does not fit in 4 columns");
  if (r.element.size() > 2)
    throw RangeError("element symbol longer than 2 characters");

  char buf[96];
  std::snprintf(buf, sizeof(buf),
                "%-6s%5d %-4.4s%c%-3.3s %c%4d%c   %8.3f%8.3f%8.3f%6.2f%6.2f"
                "          %2s",
                r.kind == RecordKind::kAtom ? "ATOM" : "HETATM", r.serial,
                internal::padded(r.atom_name, 4).c_str(), r.alt_loc,
                internal::padded(r.residue_name, 3).c_str(), r.chain,
                r.residue_seq, r.insertion_code, r.position.x(),
                r.position.y(), r.position.z(), r.occupancy, r.bfactor,
                r.element.c_str());
  std::string line(buf);
  line += r.charge;
  return line;
}

inline std::string serialize_pdb(const std::vector<StructureRecord> &records) {
  std::string out;
  for (const auto &r: records) {
    out += format_record(r);
    out += '\n';
  }
  return out;
}

/// Atom-name field for an element symbol, following the convention that
/// one-letter elements start in column 14.
inline std::string conventional_atom_name(const std::string &element,
                                          int ordinal) {
  std::string name = element + std::to_string(ordinal);
  if (element.size() == 1 && name.size() < 4)
    name = " " + name;
  return internal::padded(name.substr(0, 4), 4);
}

inline std::vector<StructureRecord>
molecule_to_records(const ElementTable &table, const Molecule &mol,
                    const std::string &residue = "LIG", char chain = 'L') {
  std::vector<StructureRecord> out;
  for (int i = 0; i < mol.size(); ++i) {
    StructureRecord r;
    r.kind = RecordKind::kHetatm;
    r.serial = i + 1;
    r.element = table[mol.atoms[i].element].symbol;
    r.atom_name = conventional_atom_name(r.element, i + 1);
    r.residue_name = internal::padded(residue, 3);
    r.chain = chain;
    r.residue_seq = 1;
    r.position = mol.atoms[i].position;
    out.push_back(std::move(r));
  }
  return out;
}

/// Keeps the first conformer of atoms that carry alternate-location
/// indicators.
inline std::vector<StructureRecord>
drop_alternate_locations(const std::vector<StructureRecord> &records) {
  using Key = std::tuple<char, int, char, std::string, std::string>;
  std::set<Key> seen;
  std::vector<StructureRecord> out;
  for (const auto &r: records) {
    Key key { r.chain, r.residue_seq, r.insertion_code, r.residue(),
              r.name() };
    if (r.alt_loc != ' ' && seen.count(key) > 0)
      continue;
    seen.insert(std::move(key));
    out.push_back(r);
  }
  return out;
}

struct ComplexEntry {
  std::string entry_id;
  Pocket pocket;
  Molecule ligand;
};

/// Ligand = first HETATM residue named `ligand_residue` (waters never count);
/// pocket = ATOM records within `cutoff` of any ligand atom. Pocket atoms whose
/// element is outside the vocabulary (metals, selenium) are dropped.
inline ComplexEntry split_pocket_ligand(const ElementTable &table,
                                        const std::vector<StructureRecord> &all,
                                        const std::string &ligand_residue,
                                        double cutoff = 10.0,
                                        std::string entry_id = {}) {
  if (!(cutoff > 0))
    throw InputError("pocket cutoff must be positive");
  const auto records = drop_alternate_locations(all);

  ComplexEntry entry;
  entry.entry_id = std::move(entry_id);

  const StructureRecord *first = nullptr;
  for (const auto &r: records) {
    if (r.kind != RecordKind::kHetatm || r.residue() == "HOH"
        || r.residue() != ligand_residue)
      continue;
    if (first == nullptr)
      first = &r;
    if (r.chain != first->chain || r.residue_seq != first->residue_seq
        || r.insertion_code != first->insertion_code)
      continue;
    const int el = table.find(r.element);
    if (el < 0)
      throw VocabularyError("ligand atom " + r.name() + " has element '"
                            + r.element + "' outside vocabulary");
    entry.ligand.atoms.push_back({ el, r.position });
  }
  if (entry.ligand.empty())
    throw LookupError("ligand residue '" + ligand_residue + "' not found");

  const double cut2 = cutoff * cutoff;
  for (const auto &r: records) {
    if (r.kind != RecordKind::kAtom)
      continue;
    const int el = table.find(r.element);
    if (el < 0)
      continue;
    const bool near = std::any_of(
        entry.ligand.atoms.begin(), entry.ligand.atoms.end(),
        [&](const Atom &a) {
          return (a.position - r.position).squaredNorm() <= cut2;
        });
    if (near) {
      entry.pocket.atoms.push_back({ el, r.position });
      entry.pocket.bfactors.push_back(r.bfactor);
    }
  }
  if (entry.pocket.empty())
    throw DataError("no pocket atoms within " + std::to_string(cutoff)
                    + " A of ligand '" + ligand_residue + "'");
  return entry;
}

/// Every ATOM record (vocabulary elements only) as a pocket; used when a
/// structure file already holds just the binding site.
inline Pocket pocket_from_records(const ElementTable &table,
                                  const std::vector<StructureRecord> &records) {
  Pocket pocket;
  for (const auto &r: drop_alternate_locations(records)) {
    if (r.kind != RecordKind::kAtom)
      continue;
    const int el = table.find(r.element);
    if (el < 0)
      continue;
    pocket.atoms.push_back({ el, r.position });
    pocket.bfactors.push_back(r.bfactor);
  }
  return pocket;
}

/// Min-max normalized B-factors; a flat profile maps to 0.5 everywhere.
inline std::vector<double> normalize_bfactors(const Pocket &pocket) {
  if (pocket.empty())
    throw InputError("cannot normalize B-factors of an empty pocket");
  if (pocket.bfactors.size() != pocket.atoms.size())
    throw DataError("B-factor count does not match pocket atom count");
  for (double b: pocket.bfactors)
    if (!(b >= 0) || !std::isfinite(b))
      throw DataError("negative or non-finite B-factor "
                      + std::to_string(b));

  const auto [lo, hi] =
      std::minmax_element(pocket.bfactors.begin(), pocket.bfactors.end());
  std::vector<double> w(pocket.bfactors.size(), 0.5);
  if (*hi > *lo) {
    const double range = *hi - *lo;
    for (size_t j = 0; j < w.size(); ++j)
      w[j] = (pocket.bfactors[j] - *lo) / range;
  }
  return w;
}

struct ManifestEntry {
  std::string entry_id;
  std::string path;
  std::string ligand_residue;
};

/// Tab-separated `entry_id<TAB>path<TAB>ligand_residue`. Relative paths are
/// resolved against `base_dir`.
inline std::vector<ManifestEntry>
parse_manifest(std::istream &is, const std::filesystem::path &base_dir = {}) {
  std::vector<ManifestEntry> out;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (internal::trim(line).empty() || line.front() == '#')
      continue;
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ls(line);
    while (std::getline(ls, field, '\t'))
      fields.push_back(field);
    if (fields.size() != 3)
      throw ParseError("manifest line " + std::to_string(lineno)
                       + ": expected 3 tab-separated fields");
    std::filesystem::path p(fields[1]);
    if (p.is_relative() && !base_dir.empty())
      p = base_dir / p;
    out.push_back({ fields[0], p.string(), fields[2] });
  }
  return out;
}

} // namespace pocketflow
