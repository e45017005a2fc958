//
// PocketFlow - Copyright 2026 The PocketFlow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <istream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "pocketflow/chem_core.hpp"
#include "pocketflow/errors.hpp"
#include "pocketflow/io.hpp"
#include "pocketflow/pdb.hpp"

namespace pocketflow {

// Dataset archive, one block per complex:
//
//   pocketflow-dataset 1
//   entry <id> <pocket atoms> <ligand atoms>
//   P <symbol> <x> <y> <z> <bfactor>
//   L <symbol> <x> <y> <z>

inline std::string serialize_dataset(const ElementTable &table,
                                     const std::vector<ComplexEntry> &entries) {
  std::ostringstream os;
  os << "pocketflow-dataset 1\n";
  for (const auto &e: entries) {
    os << "entry " << e.entry_id << ' ' << e.pocket.size() << ' '
       << e.ligand.size() << '\n';
    for (int j = 0; j < e.pocket.size(); ++j) {
      const auto &a = e.pocket.atoms[j];
      os << "P " << table[a.element].symbol << ' '
         << format_double(a.position.x()) << ' '
         << format_double(a.position.y()) << ' '
         << format_double(a.position.z()) << ' '
         << format_double(e.pocket.bfactors[j]) << '\n';
    }
    for (const auto &a: e.ligand.atoms)
      os << "L " << table[a.element].symbol << ' '
         << format_double(a.position.x()) << ' '
         << format_double(a.position.y()) << ' '
         << format_double(a.position.z()) << '\n';
  }
  return os.str();
}

inline std::vector<ComplexEntry> parse_dataset(const ElementTable &table,
                                               std::istream &is) {
  std::string line, tag;
  if (!std::getline(is, line) || line != "pocketflow-dataset 1")
    throw ParseError("not a pocketflow dataset archive");

  std::vector<ComplexEntry> out;
  int lineno = 1;
  auto next = [&](const char *want) {
    do {
      if (!std::getline(is, line))
        throw ParseError(std::string("dataset truncated, expected ") + want);
      ++lineno;
    } while (line.empty());
    return std::istringstream(line);
  };
  auto coord = [&](std::istringstream &ls) {
    std::string x, y, z;
    ls >> x >> y >> z;
    const std::string where = "dataset line " + std::to_string(lineno);
    return Vec3(parse_double(x, where), parse_double(y, where),
                parse_double(z, where));
  };

  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty())
      continue;
    std::istringstream ls(line);
    ComplexEntry e;
    int np = 0, nl = 0;
    if (!(ls >> tag >> e.entry_id >> np >> nl) || tag != "entry" || np < 1
        || nl < 1)
      throw ParseError("dataset line " + std::to_string(lineno)
                       + ": malformed entry header");
    for (int j = 0; j < np; ++j) {
      auto as = next("pocket atom");
      std::string sym, b;
      as >> tag >> sym;
      if (tag != "P")
        throw ParseError("dataset line " + std::to_string(lineno)
                         + ": expected pocket atom");
      const Vec3 pos = coord(as);
      as >> b;
      e.pocket.atoms.push_back({ table.index_of(sym), pos });
      e.pocket.bfactors.push_back(
          parse_double(b, "dataset line " + std::to_string(lineno)));
    }
    for (int i = 0; i < nl; ++i) {
      auto as = next("ligand atom");
      std::string sym;
      as >> tag >> sym;
      if (tag != "L")
        throw ParseError("dataset line " + std::to_string(lineno)
                         + ": expected ligand atom");
      e.ligand.atoms.push_back({ table.index_of(sym), coord(as) });
    }
    out.push_back(std::move(e));
  }
  return out;
}

inline std::vector<ComplexEntry>
read_dataset_file(const ElementTable &table, const std::string &path) {
  std::istringstream is(read_text_file(path));
  return parse_dataset(table, is);
}

/// Five-atom pocket around a three-atom C-C-O ligand. Each copy perturbs the
/// ligand coordinates with isotropic Gaussian noise of `noise` Å per axis.
inline std::vector<ComplexEntry> make_toy_dataset(const ElementTable &table,
                                                  int copies = 50,
                                                  double noise = 0.1,
                                                  std::uint64_t seed = 7) {
  Pocket pocket;
  const std::pair<const char *, Vec3> pocket_atoms[] = {
    { "N", { 0.0, -3.5, 0.5 } },  { "O", { 3.6, 0.5, 0.0 } },
    { "C", { -3.8, 1.0, 0.5 } },  { "C", { 0.5, 1.0, 3.6 } },
    { "S", { 0.0, 0.5, -3.7 } },
  };
  const double bfactors[] = { 12.0, 18.0, 25.0, 30.0, 40.0 };
  for (int j = 0; j < 5; ++j) {
    pocket.atoms.push_back(
        { table.index_of(pocket_atoms[j].first), pocket_atoms[j].second });
    pocket.bfactors.push_back(bfactors[j]);
  }

  const std::pair<const char *, Vec3> ligand_atoms[] = {
    { "C", { -1.25, -0.2, 0.0 } },
    { "C", { 0.27, 0.0, 0.0 } },
    { "O", { 0.75, 1.35, 0.0 } },
  };

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, noise);
  std::vector<ComplexEntry> out;
  for (int c = 0; c < copies; ++c) {
    ComplexEntry e;
    char id[32];
    std::snprintf(id, sizeof(id), "toy_%03d", c);
    e.entry_id = id;
    e.pocket = pocket;
    for (const auto &[sym, pos]: ligand_atoms) {
      Vec3 jitter;
      for (int d = 0; d < 3; ++d) // sequenced, unlike constructor arguments
        jitter[d] = normal(rng);
      e.ligand.atoms.push_back({ table.index_of(sym), pos + jitter });
    }
    out.push_back(std::move(e));
  }
  return out;
}

} // namespace pocketflow
