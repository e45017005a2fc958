//
// PocketFlow - Copyright 2026 The PocketFlow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <array>
#include <cstdio>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "pocketflow/chem_core.hpp"
#include "pocketflow/errors.hpp"

namespace pocketflow {

/// Shortest decimal text that parses back to exactly `v`.
inline std::string format_double(double v) {
  std::array<char, 32> buf;
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc())
    throw RangeError("cannot format number");
  return std::string(buf.data(), ptr);
}

inline double parse_double(std::string_view text, const std::string &what) {
  double v = 0;
  const char *end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (text.empty() || ec != std::errc() || ptr != end)
    throw ParseError("malformed number '" + std::string(text) + "' in "
                     + what);
  return v;
}

inline long long parse_integer(std::string_view text, const std::string &what) {
  long long v = 0;
  const char *end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (text.empty() || ec != std::errc() || ptr != end)
    throw ParseError("malformed integer '" + std::string(text) + "' in "
                     + what);
  return v;
}

inline std::string read_text_file(const std::filesystem::path &path) {
  std::ifstream ifs(path, std::ios::binary);
  if (!ifs)
    throw InputError("cannot open " + path.string());
  std::ostringstream ss;
  ss << ifs.rdbuf();
  return ss.str();
}

/// Writes through a sibling temporary file and renames it into place, so
/// readers never observe a partially written file.
inline void write_file_atomic(const std::filesystem::path &path,
                              std::string_view contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream ofs(tmp, std::ios::binary | std::ios::trunc);
    if (!ofs)
      throw InputError("cannot write " + tmp.string());
    ofs.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!ofs)
      throw InputError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec)
    throw InputError("cannot move " + tmp.string() + " to " + path.string()
                     + ": " + ec.message());
}

inline std::string format_xyz(const ElementTable &table, const Molecule &mol,
                              const std::string &comment = {}) {
  std::string out = std::to_string(mol.size()) + "\n" + comment + "\n";
  char buf[96];
  for (const auto &a: mol.atoms) {
    std::snprintf(buf, sizeof(buf), "%-2s %.6f %.6f %.6f\n",
                  table[a.element].symbol.c_str(), a.position.x(),
                  a.position.y(), a.position.z());
    out += buf;
  }
  return out;
}

inline Molecule parse_xyz(const ElementTable &table, std::istream &is) {
  std::string line;
  if (!std::getline(is, line))
    throw ParseError("xyz: missing atom count line");
  long long n = 0;
  {
    std::istringstream ls(line);
    if (!(ls >> n) || n < 0)
      throw ParseError("xyz: malformed atom count line");
  }
  std::getline(is, line); // comment

  Molecule mol;
  for (long long i = 0; i < n; ++i) {
    if (!std::getline(is, line))
      throw ParseError("xyz: expected " + std::to_string(n) + " atoms, got "
                       + std::to_string(i));
    std::istringstream ls(line);
    std::string sym;
    double x, y, z;
    if (!(ls >> sym >> x >> y >> z))
      throw ParseError("xyz: malformed atom line " + std::to_string(i + 3));
    mol.atoms.push_back({ table.index_of(sym), Vec3(x, y, z) });
  }
  return mol;
}

} // namespace pocketflow
