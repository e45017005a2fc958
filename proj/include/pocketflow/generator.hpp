//
// PocketFlow - Copyright 2026 The PocketFlow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "pocketflow/chem_core.hpp"
#include "pocketflow/encoder.hpp"
#include "pocketflow/errors.hpp"
#include "pocketflow/model.hpp"

namespace pocketflow {

struct GenConfig {
  int max_atoms = 24;
  bool valence_constrained = true;
  int clash_retries = 10;
  BondRules rules;
};

/// Growing ligand inside a fixed pocket. The context is the pocket followed
/// by the placed atoms, so context index = pocket size + ligand index.
class GenerationState {
public:
  GenerationState(const ElementTable &table, Pocket pocket)
      : table_(&table), pocket_(std::move(pocket)) {
    if (pocket_.empty())
      throw InputError("generation needs a non-empty pocket");
    if (pocket_.bfactors.empty())
      pocket_.bfactors.assign(pocket_.atoms.size(), 0.0);
    base_ = Context::from(pocket_);
    centroid_ = pocket_.centroid();
  }

  const Pocket &pocket() const { return pocket_; }
  const Molecule &placed() const { return placed_; }
  int step() const { return placed_.size(); }
  const Vec3 &centroid() const { return centroid_; }
  const std::vector<int> &open_valences() const { return open_; }

  int total_open_valence() const {
    int sum = 0;
    for (int v: open_)
      sum += v;
    return sum;
  }

  Context context() const {
    Context ctx = base_;
    for (const auto &a: placed_.atoms)
      ctx.push(a, false);
    return ctx;
  }

  /// Appends an atom and refreshes bonds and the open-valence cache.
  void place(const Atom &atom, const BondRules &rules) {
    placed_.atoms.push_back(atom);
    placed_.bonds = infer_bonds(*table_, placed_.atoms, rules);
    refresh();
  }

private:
  void refresh() {
    open_.resize(placed_.size());
    for (int i = 0; i < placed_.size(); ++i)
      open_[i] = open_valence(*table_, placed_, i);
  }

  const ElementTable *table_;
  Pocket pocket_;
  Context base_;
  Vec3 centroid_;
  Molecule placed_;
  std::vector<int> open_;
};

struct FocalAtom {
  int context_index;
  Vec3 position;
};

/// Pocket atom nearest the pocket centroid at t = 0; afterwards the placed
/// atom with open valence nearest the centroid. nullopt means stop.
inline std::optional<FocalAtom> select_focal(const GenerationState &state) {
  const Vec3 &c = state.centroid();
  const int m = state.pocket().size();
  std::optional<FocalAtom> best;
  double best_d = std::numeric_limits<double>::infinity();
  if (state.step() == 0) {
    for (int j = 0; j < m; ++j) {
      const double d = (state.pocket().atoms[j].position - c).norm();
      if (d < best_d) {
        best_d = d;
        best = FocalAtom { j, state.pocket().atoms[j].position };
      }
    }
    return best;
  }
  for (int i = 0; i < state.step(); ++i) {
    if (state.open_valences()[i] <= 0)
      continue;
    const Vec3 &p = state.placed().atoms[i].position;
    const double d = (p - c).norm();
    if (d < best_d) {
      best_d = d;
      best = FocalAtom { m + i, p };
    }
  }
  return best;
}

inline Eigen::VectorXd focal_readout(const Model &model,
                                     const GenerationState &state,
                                     const FocalAtom &focal) {
  const auto h = model.encoder().encode(model.params(), state.context());
  return aggregate_readout(h, focal.context_index);
}

/// Argmax decode of a type-flow output. Under valence constraints,
/// monovalent elements are masked once the ligand is down to its last open
/// slot, so growth is not capped early.
inline int decode_type(const Model &model, const GenerationState &state,
                       const Eigen::VectorXd &x, const GenConfig &cfg) {
  const auto &table = model.elements();
  const bool mask = cfg.valence_constrained && state.step() > 0
                    && state.total_open_valence() == 1;
  int best = -1;
  for (int d = 0; d < x.size(); ++d) {
    if (mask && table[d].max_valence == 1)
      continue;
    if (best < 0 || x[d] > x[best])
      best = d;
  }
  if (best < 0) {
    Eigen::Index idx;
    x.maxCoeff(&idx);
    best = static_cast<int>(idx);
  }
  return best;
}

template <class URBG>
int generate_type(const Model &model, const GenerationState &state,
                  const Eigen::VectorXd &readout, URBG &rng,
                  const GenConfig &cfg = {}) {
  const auto s = model.type_flow().sample(model.params(), readout, rng);
  return decode_type(model, state, s.x, cfg);
}

template <class URBG>
Vec3 generate_coord(const Model &model, const FocalAtom &focal,
                    const Eigen::VectorXd &readout, int element, URBG &rng) {
  const auto s = model.coord_flow().sample(
      model.params(), model.coord_condition(readout, element), rng);
  return focal.position + Vec3(s.x[0], s.x[1], s.x[2]);
}

namespace internal {
  inline bool clashes(const ElementTable &table, const Context &ctx,
                      const Atom &atom, const BondRules &rules) {
    const double r = table[atom.element].covalent_radius;
    for (int k = 0; k < ctx.size(); ++k) {
      const double rk = table[ctx.elements[k]].covalent_radius;
      if ((ctx.positions[k] - atom.position).norm() < rules.lower(r, rk))
        return true;
    }
    return false;
  }

  // New atom must bond to the growing ligand and leave no atom over-bonded.
  inline bool valence_ok(const ElementTable &table, const Molecule &placed,
                         const Atom &atom, const BondRules &rules) {
    Molecule trial = placed;
    trial.atoms.push_back(atom);
    const auto perceived = perceive_bonds(table, trial.atoms, rules);
    if (!perceived.clashes.empty())
      return false;
    trial.bonds = perceived.bonds;
    const int last = trial.size() - 1;
    if (last > 0 && used_valence(trial, last) == 0)
      return false;
    for (int i = 0; i < trial.size(); ++i)
      if (open_valence(table, trial, i) < 0)
        return false;
    return true;
  }
} // namespace internal

enum class StepResult { kPlaced, kFinished };

/// One autoregressive step: focal selection, type and coordinate sampling,
/// context update. Clashing (or, under valence constraints, over-bonding or
/// detached) proposals are redrawn up to `clash_retries` times before the
/// step is rejected and generation stops.
template <class URBG>
StepResult step(const Model &model, GenerationState &state,
                const GenConfig &cfg, URBG &rng) {
  if (state.step() >= cfg.max_atoms)
    return StepResult::kFinished;
  const auto focal = select_focal(state);
  if (!focal)
    return StepResult::kFinished;

  const auto &table = model.elements();
  const Context ctx = state.context();
  const auto readout = aggregate_readout(
      model.encoder().encode(model.params(), ctx), focal->context_index);

  for (int attempt = 0; attempt <= cfg.clash_retries; ++attempt) {
    const int element = generate_type(model, state, readout, rng, cfg);
    const Atom atom { element,
                      generate_coord(model, *focal, readout, element, rng) };
    if (!atom.position.allFinite()
        || internal::clashes(table, ctx, atom, cfg.rules))
      continue;
    if (cfg.valence_constrained
        && !internal::valence_ok(table, state.placed(), atom, cfg.rules))
      continue;
    state.place(atom, cfg.rules);
    return state.step() >= cfg.max_atoms ? StepResult::kFinished
                                         : StepResult::kPlaced;
  }
  return StepResult::kFinished;
}

template <class URBG>
Molecule generate_ligand(const Model &model, const Pocket &pocket,
                         const GenConfig &cfg, URBG &rng) {
  if (cfg.max_atoms < 1)
    throw ConfigError("max_atoms must be at least 1");
  GenerationState state(model.elements(), pocket);
  while (step(model, state, cfg, rng) == StepResult::kPlaced) { }
  return state.placed();
}

inline Molecule generate_ligand(const Model &model, const Pocket &pocket,
                                const GenConfig &cfg, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return generate_ligand(model, pocket, cfg, rng);
}

} // namespace pocketflow
