//
// PocketFlow - Copyright 2026 The PocketFlow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "pocketflow/pdb.hpp"
#include "test_utils.hpp"

namespace pocketflow {
namespace {
const ElementTable &kTable = ElementTable::standard();

constexpr const char *kMetLine =
    "ATOM      1  N   MET A   1      11.104  13.207   2.100  1.00 25.00"
    "           N";

TEST(ParsePdb, FixedColumns) {
  const auto recs = parse_pdb(std::string(kMetLine) + "\n");
  ASSERT_EQ(recs.size(), 1);
  const auto &r = recs[0];
  EXPECT_EQ(r.kind, RecordKind::kAtom);
  EXPECT_EQ(r.serial, 1);
  EXPECT_EQ(r.name(), "N");
  EXPECT_EQ(r.residue(), "MET");
  EXPECT_EQ(r.chain, 'A');
  EXPECT_EQ(r.residue_seq, 1);
  EXPECT_EQ(r.position, Vec3(11.104, 13.207, 2.100));
  EXPECT_EQ(r.occupancy, 1.0);
  EXPECT_EQ(r.bfactor, 25.0);
  EXPECT_EQ(r.element, "N");
}

TEST(ParsePdb, SkipsOtherRecordsAndStopsAfterFirstModel) {
  const std::string text = std::string("REMARK   1 nothing here\n")
                           + "MODEL        1\n" + kMetLine + "\nENDMDL\n"
                           + "MODEL        2\n" + kMetLine + "\nENDMDL\n";
  EXPECT_EQ(parse_pdb(text).size(), 1);
  EXPECT_TRUE(parse_pdb("REMARK   2 RESOLUTION.\n").empty());
}

TEST(ParsePdb, Errors) {
  std::string bad = kMetLine;
  bad.replace(60, 6, "   abc");
  try {
    parse_pdb("REMARK\n" + bad + "\n");
    FAIL();
  } catch (const ParseError &e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
  EXPECT_THROW(parse_pdb(std::string(kMetLine).substr(0, 50)), ParseError);

  std::string negative = kMetLine;
  negative.replace(60, 6, " -1.00");
  EXPECT_THROW(parse_pdb(negative), ParseError);
}

TEST(ParsePdb, ElementFallsBackToAtomName) {
  std::string line = std::string(kMetLine).substr(0, 66);
  EXPECT_EQ(parse_pdb(line)[0].element, "N");
  line.replace(12, 4, " CA ");
  EXPECT_EQ(parse_pdb(line)[0].element, "C");
  line.replace(12, 4, "CL1 ");
  EXPECT_EQ(parse_pdb(line)[0].element, "Cl");
  line.replace(12, 4, "HD21");
  EXPECT_EQ(parse_pdb(line)[0].element, "H");
}

TEST(SerializePdb, Examples) {
  EXPECT_EQ(serialize_pdb(parse_pdb(kMetLine)), std::string(kMetLine) + "\n");
  EXPECT_EQ(serialize_pdb({}), "");

  StructureRecord far;
  far.position = { 123456.789, 0, 0 };
  far.element = "C";
  EXPECT_THROW(serialize_pdb({ far }), RangeError);
}

TEST(SerializePdb, RoundTripProperty) {
  std::mt19937_64 rng(2024);
  std::vector<StructureRecord> records;
  for (int i = 0; i < 200; ++i)
    records.push_back(test::random_record(rng, kTable, i));

  const std::string text = serialize_pdb(records);
  EXPECT_EQ(parse_pdb(text), records);
  EXPECT_EQ(serialize_pdb(parse_pdb(text)), text);
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line))
    EXPECT_GE(line.size(), 78);
}

std::vector<StructureRecord> synthetic_complex() {
  auto atom = [](RecordKind kind, int serial, const char *res, Vec3 pos,
                 double b, const char *el) {
    StructureRecord r;
    r.kind = kind;
    r.serial = serial;
    r.element = el;
    r.atom_name = conventional_atom_name(el, serial);
    r.residue_name = res;
    r.chain = 'A';
    r.residue_seq = serial;
    r.position = pos;
    r.bfactor = b;
    return r;
  };
  return {
    atom(RecordKind::kAtom, 1, "ALA", { 4, 0, 0 }, 20, "C"),
    atom(RecordKind::kAtom, 2, "ALA", { 0, 12, 0 }, 30, "N"),
    atom(RecordKind::kHetatm, 3, "HOH", { 1, 0, 0 }, 10, "O"),
    atom(RecordKind::kHetatm, 4, "LIG", { 0, 0, 0 }, 15, "C"),
  };
}

TEST(SplitPocketLigand, DistanceFilter) {
  const auto recs = synthetic_complex();
  const auto e10 = split_pocket_ligand(kTable, recs, "LIG", 10.0, "x");
  ASSERT_EQ(e10.ligand.size(), 1);
  ASSERT_EQ(e10.pocket.size(), 1);
  EXPECT_EQ(e10.pocket.atoms[0].position, Vec3(4, 0, 0));
  EXPECT_EQ(e10.pocket.bfactors[0], 20.0);
  EXPECT_EQ(e10.entry_id, "x");

  const auto e15 = split_pocket_ligand(kTable, recs, "LIG", 15.0);
  EXPECT_EQ(e15.pocket.size(), 2);

  EXPECT_THROW(split_pocket_ligand(kTable, recs, "ATP", 10.0), LookupError);
  EXPECT_THROW(split_pocket_ligand(kTable, recs, "HOH", 10.0), LookupError);
  EXPECT_THROW(split_pocket_ligand(kTable, recs, "LIG", 1.0), DataError);
}

TEST(SplitPocketLigand, OrderIndependent) {
  std::mt19937_64 rng(8);
  auto recs = synthetic_complex();
  for (int i = 0; i < 30; ++i) {
    StructureRecord r = recs[0];
    r.serial = 10 + i;
    r.residue_seq = 10 + i;
    r.position = test::random_point(rng, 12);
    recs.push_back(r);
  }
  auto key = [](const Pocket &p) {
    std::vector<std::tuple<double, double, double, double>> out;
    for (int j = 0; j < p.size(); ++j)
      out.emplace_back(p.atoms[j].position.x(), p.atoms[j].position.y(),
                       p.atoms[j].position.z(), p.bfactors[j]);
    std::sort(out.begin(), out.end());
    return out;
  };
  const auto ref = key(split_pocket_ligand(kTable, recs, "LIG").pocket);
  for (int t = 0; t < 10; ++t) {
    std::shuffle(recs.begin(), recs.end(), rng);
    EXPECT_EQ(key(split_pocket_ligand(kTable, recs, "LIG").pocket), ref);
  }
}

TEST(SplitPocketLigand, KeepsFirstAlternateLocation) {
  auto recs = synthetic_complex();
  recs[0].alt_loc = 'A';
  StructureRecord alt = recs[0];
  alt.alt_loc = 'B';
  alt.position = { 3, 0, 0 };
  recs.insert(recs.begin() + 1, alt);
  const auto e = split_pocket_ligand(kTable, recs, "LIG");
  ASSERT_EQ(e.pocket.size(), 1);
  EXPECT_EQ(e.pocket.atoms[0].position, Vec3(4, 0, 0));
}

TEST(NormalizeBfactors, MinMax) {
  Pocket p;
  p.atoms.assign(3, Atom { 1, Vec3::Zero() });
  p.bfactors = { 10, 20, 30 };
  EXPECT_EQ(normalize_bfactors(p), (std::vector<double> { 0, 0.5, 1 }));
  p.bfactors = { 7, 7, 7 };
  EXPECT_EQ(normalize_bfactors(p), (std::vector<double> { 0.5, 0.5, 0.5 }));
  p.atoms.resize(2);
  p.bfactors = { -1, 5 };
  EXPECT_THROW(normalize_bfactors(p), DataError);
  EXPECT_THROW(normalize_bfactors(Pocket {}), InputError);
}

TEST(NormalizeBfactors, WeightsInUnitInterval) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> b(0, 200);
  for (int t = 0; t < 100; ++t) {
    Pocket p;
    for (int j = 0; j < 1 + t % 9; ++j) {
      p.atoms.push_back({ 1, Vec3::Zero() });
      p.bfactors.push_back(b(rng));
    }
    for (double w: normalize_bfactors(p)) {
      EXPECT_GE(w, 0.0);
      EXPECT_LE(w, 1.0);
    }
  }
}

TEST(Manifest, TabSeparated) {
  std::istringstream is("# id path residue\n1abc\tcomplexes/1abc.pdb\tATP\n"
                        "2xyz\t/abs/2xyz.pdb\tLIG\n");
  const auto m = parse_manifest(is, "/data");
  ASSERT_EQ(m.size(), 2);
  EXPECT_EQ(m[0].path, "/data/complexes/1abc.pdb");
  EXPECT_EQ(m[0].ligand_residue, "ATP");
  EXPECT_EQ(m[1].path, "/abs/2xyz.pdb");

  std::istringstream bad("1abc complexes/1abc.pdb ATP\n");
  EXPECT_THROW(parse_manifest(bad), ParseError);
}

} // namespace
} // namespace pocketflow
