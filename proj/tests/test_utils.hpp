//
// PocketFlow - Copyright 2026 The PocketFlow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "pocketflow/pocketflow.hpp"

namespace pocketflow::test {

/// H, C, O only; keeps flow widths small enough for derivative checks.
inline const ElementTable &tiny_table() {
  static const ElementTable table({
      { "H", 1, 0.31, 1 },
      { "C", 6, 0.77, 4 },
      { "O", 8, 0.73, 2 },
  });
  return table;
}

/// 192 parameters with the tiny table.
inline ModelConfig tiny_model_config(bool gating = true) {
  ModelConfig cfg;
  cfg.encoder.width = 2;
  cfg.encoder.mlp_width = 3;
  cfg.encoder.layers = 1;
  cfg.encoder.rbf_count = 4;
  cfg.encoder.rbf_max = 6.0;
  cfg.encoder.bfactor_gating = gating;
  cfg.type_layers = 2;
  cfg.coord_layers = 2;
  return cfg;
}

template <class URBG>
void randomize(ParameterSet &params, URBG &rng, double scale = 0.5) {
  std::uniform_real_distribution<double> u(-scale, scale);
  for (Eigen::Index i = 0; i < params.size(); ++i)
    params.values()[i] = u(rng);
}

template <class URBG>
Vec3 random_point(URBG &rng, double span) {
  std::uniform_real_distribution<double> u(-span, span);
  return { u(rng), u(rng), u(rng) };
}

/// Pocket of `m` atoms and a placed ligand of `n` atoms, random elements,
/// coordinates in a cube of half-width `span`.
template <class URBG>
Context random_context(URBG &rng, const ElementTable &table, int m, int n,
                       double span = 4.0) {
  std::uniform_int_distribution<int> el(0, table.size() - 1);
  std::uniform_real_distribution<double> b(5.0, 60.0);
  Pocket pocket;
  for (int j = 0; j < m; ++j) {
    pocket.atoms.push_back({ el(rng), random_point(rng, span) });
    pocket.bfactors.push_back(b(rng));
  }
  Molecule placed;
  for (int i = 0; i < n; ++i)
    placed.atoms.push_back({ el(rng), random_point(rng, span) });
  return Context::from(pocket, placed);
}

inline Molecule methane(const ElementTable &table) {
  const double a = 1.09 / std::sqrt(3.0);
  Molecule m;
  m.atoms = {
    { table.index_of("C"), { 0, 0, 0 } },  { table.index_of("H"), { a, a, a } },
    { table.index_of("H"), { a, -a, -a } }, { table.index_of("H"), { -a, a, -a } },
    { table.index_of("H"), { -a, -a, a } },
  };
  m.bonds = infer_bonds(table, m.atoms);
  return m;
}

/// Arbitrary ATOM/HETATM record whose every field survives the fixed-column
/// format: three-decimal coordinates, two-decimal occupancy and B-factor.
template <class URBG>
StructureRecord random_record(URBG &rng, const ElementTable &table, int i) {
  std::uniform_int_distribution<int> coord(-999999, 9999999);
  std::uniform_int_distribution<int> occ(0, 100), bf(0, 99999);
  std::uniform_int_distribution<int> serial(1, 99999), seq(-999, 9999);
  std::uniform_int_distribution<int> el(0, table.size() - 1), coin(0, 1);
  static const char *residues[] = { "ALA", "GLY", "LIG", "HOH", "MSE" };
  StructureRecord r;
  r.kind = coin(rng) ? RecordKind::kAtom : RecordKind::kHetatm;
  r.serial = serial(rng);
  r.element = table[el(rng)].symbol;
  r.atom_name = conventional_atom_name(r.element, i % 99 + 1);
  r.alt_loc = coin(rng) ? ' ' : 'A';
  r.residue_name = residues[i % 5];
  r.chain = static_cast<char>('A' + i % 26);
  r.residue_seq = seq(rng);
  for (int d = 0; d < 3; ++d)
    r.position[d] = coord(rng) / 1000.0;
  r.occupancy = occ(rng) / 100.0;
  r.bfactor = bf(rng) / 100.0;
  r.charge = coin(rng) ? "" : "1+";
  return r;
}

/// Carbon with five hydrogens at 1.09 A (trigonal bipyramid).
inline Molecule pentavalent_carbon(const ElementTable &table) {
  const double r = 1.09;
  const int h = table.index_of("H");
  Molecule m;
  m.atoms.push_back({ table.index_of("C"), { 0, 0, 0 } });
  m.atoms.push_back({ h, { 0, 0, r } });
  m.atoms.push_back({ h, { 0, 0, -r } });
  for (int k = 0; k < 3; ++k) {
    const double t = 2 * 3.14159265358979323846 * k / 3;
    m.atoms.push_back({ h, { r * std::cos(t), r * std::sin(t), 0 } });
  }
  m.bonds = infer_bonds(table, m.atoms);
  return m;
}

} // namespace pocketflow::test
