//
// PocketFlow - Copyright 2026 The PocketFlow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "pocketflow/dataset.hpp"
#include "pocketflow/model.hpp"
#include "pocketflow/trainer.hpp"
#include "test_utils.hpp"

namespace pocketflow {
namespace {
const ElementTable &kTiny = test::tiny_table();

ComplexEntry line_entry() {
  ComplexEntry e;
  e.entry_id = "line";
  e.pocket.atoms = { { 1, { 0, 0, 0 } }, { 2, { 0, 4, 0 } } };
  e.pocket.bfactors = { 10, 30 };
  // Centroid (0,2,0); atom 1 is nearest to it, then 2 (next to 1), then 0.
  e.ligand.atoms = {
    { 1, { 3.0, 2.0, 0 } },
    { 1, { 0.5, 2.0, 0 } },
    { 2, { 1.8, 2.0, 0 } },
  };
  return e;
}

template <class URBG>
std::vector<TrajectoryStep> random_steps(URBG &rng, int count) {
  std::vector<TrajectoryStep> out;
  for (int i = 0; i < count; ++i) {
    ComplexEntry e;
    for (int j = 0; j < 4; ++j) {
      e.pocket.atoms.push_back(
          { j % kTiny.size(), test::random_point(rng, 3.0) });
      e.pocket.bfactors.push_back(10.0 + 7 * j);
    }
    for (int j = 0; j < 2; ++j)
      e.ligand.atoms.push_back({ (i + j) % kTiny.size(),
                                 test::random_point(rng, 2.0) });
    auto s = sequentialize(e, kTiny.size(), 0.25, rng);
    out.insert(out.end(), s.begin(), s.end());
  }
  return out;
}

TEST(Sequentialize, CountsAndContexts) {
  std::mt19937_64 rng(1);
  auto e = line_entry();
  const auto steps = sequentialize(e, kTiny.size(), 0.25, rng);
  ASSERT_EQ(steps.size(), 3);
  for (int t = 0; t < 3; ++t)
    EXPECT_EQ(steps[t].context.size(), 2 + t);

  e.ligand.atoms.resize(1);
  const auto one = sequentialize(e, kTiny.size(), 0.25, rng);
  ASSERT_EQ(one.size(), 1);
  EXPECT_EQ(one[0].context.size(), 2);
  EXPECT_TRUE(std::all_of(one[0].context.protein.begin(),
                          one[0].context.protein.end(),
                          [](char p) { return p == 1; }));

  e.ligand.atoms.clear();
  EXPECT_THROW(sequentialize(e, kTiny.size(), 0.25, rng), InputError);
}

TEST(Sequentialize, NearestFirstOrder) {
  const auto e = line_entry();
  EXPECT_EQ(growth_order(e), (std::vector<int> { 1, 2, 0 }));

  std::mt19937_64 rng(2);
  const auto steps = sequentialize(e, kTiny.size(), 0.25, rng);
  // Step 0: target (0.5,2,0); both pocket atoms are 2.06 A away, lower
  // index wins.
  EXPECT_EQ(steps[0].focal, 0);
  EXPECT_TRUE(steps[0].target_offset.isApprox(Vec3(0.5, 2.0, 0)));
  // Step 1: target (1.8,2,0) is nearest the first placed atom.
  EXPECT_EQ(steps[1].focal, 2);
  EXPECT_TRUE(steps[1].target_offset.isApprox(Vec3(1.3, 0, 0)));
  EXPECT_EQ(steps[2].focal, 3);
  EXPECT_EQ(steps[2].target_element, 1);
}

TEST(Sequentialize, DequantizedTargets) {
  std::mt19937_64 rng(3);
  for (const auto &s: sequentialize(line_entry(), kTiny.size(), 0.25, rng)) {
    for (int d = 0; d < kTiny.size(); ++d) {
      const double base = d == s.target_element ? 1.0 : 0.0;
      EXPECT_GE(s.target_type[d], base);
      EXPECT_LT(s.target_type[d], base + 0.25);
    }
    Eigen::Index arg;
    s.target_type.maxCoeff(&arg);
    EXPECT_EQ(arg, s.target_element);
  }
}

TEST(NllLoss, ClosedFormWithIdentityFlows) {
  auto cfg = test::tiny_model_config();
  cfg.flow_init_scale = 0;
  const Model m = Model::create(kTiny, cfg, 4);
  std::mt19937_64 rng(4);
  auto steps = random_steps(rng, 3);
  for (auto &s: steps) {
    s.target_type.setZero();
    s.target_offset.setZero();
  }
  const double expect =
      0.5 * (kTiny.size() + 3) * std::log(2 * std::numbers::pi);
  EXPECT_NEAR(nll_loss(m, steps), expect, 1e-12);

  auto &s = steps[0];
  s.target_type.setConstant(0.5);
  s.target_offset = Vec3(1, -1, 2);
  const double one =
      expect + 0.5 * (0.25 * kTiny.size() + s.target_offset.squaredNorm());
  EXPECT_NEAR(nll_loss(m, { s }), one, 1e-12);
}

TEST(NllLoss, MeanOverBatch) {
  const Model m = Model::create(kTiny, test::tiny_model_config(), 5);
  std::mt19937_64 rng(5);
  auto steps = random_steps(rng, 4);
  const double base = nll_loss(m, steps);
  auto doubled = steps;
  doubled.insert(doubled.end(), steps.begin(), steps.end());
  EXPECT_NEAR(nll_loss(m, doubled), base, 1e-12 * std::abs(base));
  EXPECT_THROW(nll_loss(m, {}), InputError);
}

TEST(NllLoss, FiniteForRandomParameters) {
  Model m = Model::create(kTiny, test::tiny_model_config(), 6);
  std::mt19937_64 rng(6);
  test::randomize(m.params(), rng, 0.3);
  const auto steps = random_steps(rng, 50);
  ASSERT_GE(steps.size(), 100);
  EXPECT_TRUE(std::isfinite(nll_loss(m, steps)));
  EXPECT_TRUE(grad(m, m.params(), steps).allFinite());
}

TEST(NllLoss, NonFiniteLossNamesTheStep) {
  const Model m = Model::create(kTiny, test::tiny_model_config(), 7);
  std::mt19937_64 rng(7);
  auto steps = random_steps(rng, 2);
  steps[2].target_offset.x() = std::numeric_limits<double>::infinity();
  try {
    nll_loss(m, steps);
    FAIL();
  } catch (const NumericError &e) {
    EXPECT_NE(std::string(e.what()).find("step 2"), std::string::npos);
  }
}

TEST(NllLoss, TranslationInvariant) {
  const Model m = Model::create(kTiny, test::tiny_model_config(), 8);
  std::mt19937_64 rng(8);
  auto steps = random_steps(rng, 5);
  const double ref = nll_loss(m, steps);
  for (int t = 0; t < 10; ++t) {
    const Vec3 shift = test::random_point(rng, 50.0);
    for (auto &s: steps)
      for (auto &p: s.context.positions)
        p += shift;
    EXPECT_NEAR(nll_loss(m, steps), ref, 1e-6);
  }
}

TEST(Gradient, MatchesCentralDifferences) {
  const auto cfg = test::tiny_model_config();
  Model m(kTiny, cfg);
  ASSERT_LE(m.params().size(), 200);
  std::mt19937_64 rng(9);
  const auto steps = random_steps(rng, 3);

  for (int point = 0; point < 5; ++point) {
    test::randomize(m.params(), rng, 0.4);
    const auto analytic = grad(m, m.params(), steps);
    ParameterSet probe = m.params();
    const auto fd = oracle::central_difference(
        [&](const Eigen::VectorXd &x) {
          probe.values() = x;
          return nll_loss(m, probe, steps);
        },
        m.params().values(), 1e-5);
    double worst = 0;
    for (Eigen::Index i = 0; i < fd.size(); ++i)
      worst = std::max(worst, oracle::relative_error(analytic[i], fd[i]));
    EXPECT_LT(worst, 1e-3) << "parameter point " << point;
  }
}

TEST(Gradient, UnusedParametersHaveZeroGradient) {
  // Ungated encoder ignores its gates; H never appears in these contexts.
  Model m = Model::create(kTiny, test::tiny_model_config(false), 10);
  std::mt19937_64 rng(10);
  test::randomize(m.params(), rng, 0.4);
  ComplexEntry e;
  e.pocket.atoms = { { 1, { 0, 0, 0 } }, { 2, { 2, 0, 0 } } };
  e.pocket.bfactors = { 1, 2 };
  e.ligand.atoms = { { 1, { 1, 1, 0 } }, { 2, { 1, 2, 0 } } };
  const auto g = grad(m, m.params(), sequentialize(e, 3, 0.25, rng));

  const auto &enc = m.encoder();
  const auto &p = m.params();
  EXPECT_EQ(p.view(g, enc.gate_block()).cwiseAbs().maxCoeff(), 0.0);
  const auto table = p.view(g, enc.embedding_block());
  EXPECT_EQ(table.row(enc.table_row(0, false)).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(table.row(enc.table_row(0, true)).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_GT(table.row(enc.table_row(1, true)).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Gradient, FiniteWithZeroOutputLayers) {
  Model m = Model::create(kTiny, test::tiny_model_config(), 11);
  std::mt19937_64 rng(11);
  const auto g = grad(m, m.params(), random_steps(rng, 3));
  EXPECT_TRUE(g.allFinite());
}

TEST(Train, ZeroLearningRateKeepsLossConstant) {
  const auto data = make_toy_dataset(ElementTable::standard(), 4);
  Model std_model =
      Model::create(ElementTable::standard(), test::tiny_model_config(), 12);
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.learning_rate = 0;
  const auto before = std_model.params().values();
  const auto r = train(std_model, data, cfg);
  ASSERT_EQ(r.history.size(), 5);
  for (double h: r.history)
    EXPECT_EQ(h, r.history.front());
  EXPECT_EQ(std_model.params().values(), before);
}

TEST(Train, DeterministicPerSeed) {
  const auto data = make_toy_dataset(ElementTable::standard(), 6);
  TrainConfig cfg;
  cfg.epochs = 8;
  cfg.learning_rate = 1e-2;
  cfg.batch_size = 5;
  cfg.seed = 77;
  Model a = Model::create(ElementTable::standard(), test::tiny_model_config(), 1);
  Model b = Model::create(ElementTable::standard(), test::tiny_model_config(), 1);
  EXPECT_EQ(train(a, data, cfg).history, train(b, data, cfg).history);
  EXPECT_EQ(a.params().values(), b.params().values());
}

TEST(Train, ToyLossMostlyMonotone) {
  const auto data = make_toy_dataset(ElementTable::standard(), 10);
  Model m = Model::create(ElementTable::standard(), ModelConfig {}, 3);
  TrainConfig cfg;
  cfg.epochs = 40;
  const auto r = train(m, data, cfg);
  ASSERT_EQ(r.history.size(), 40);
  int rises = 0;
  for (size_t i = 1; i < r.history.size(); ++i)
    rises += r.history[i] > r.history[i - 1];
  EXPECT_LE(rises, 2);
  EXPECT_LT(r.history.back(), r.history.front());
}

TEST(Train, DivergenceAbortsWithHistory) {
  const auto data = make_toy_dataset(ElementTable::standard(), 3);
  Model m = Model::create(ElementTable::standard(), test::tiny_model_config(), 2);
  TrainConfig cfg;
  cfg.epochs = 50;
  cfg.learning_rate = 1e3;
  const auto r = train(m, data, cfg);
  EXPECT_TRUE(r.diverged);
  EXPECT_FALSE(r.failure.empty());
  EXPECT_LT(r.history.size(), 50);
}

TEST(Checkpoint, RoundTripIsExact) {
  Model m = Model::create(ElementTable::standard(), test::tiny_model_config(), 5);
  std::mt19937_64 rng(5);
  test::randomize(m.params(), rng, 1.0);
  std::istringstream is(m.to_checkpoint().serialize());
  const Model back = Model::from_checkpoint(Checkpoint::parse(is));
  EXPECT_EQ(back.params().values(), m.params().values());
  EXPECT_EQ(back.elements().symbols(), m.elements().symbols());
  EXPECT_EQ(back.to_checkpoint().serialize(), m.to_checkpoint().serialize());
}

TEST(Checkpoint, RejectsCorruptInput) {
  std::istringstream bad("pocketflow-checkpoint 9\n");
  EXPECT_THROW(Checkpoint::parse(bad), ParseError);
  const Model m = Model::create(kTiny, test::tiny_model_config(), 5);
  std::string text = m.to_checkpoint().serialize();
  text.resize(text.size() / 2);
  std::istringstream cut(text);
  EXPECT_THROW(Checkpoint::parse(cut), ParseError);
}

TEST(Dataset, ArchiveRoundTrip) {
  const auto &table = ElementTable::standard();
  const auto data = make_toy_dataset(table, 5);
  const std::string text = serialize_dataset(table, data);
  std::istringstream is(text);
  const auto back = parse_dataset(table, is);
  ASSERT_EQ(back.size(), 5);
  EXPECT_EQ(serialize_dataset(table, back), text);
  EXPECT_EQ(back[2].entry_id, "toy_002");
  EXPECT_EQ(back[2].ligand.atoms, data[2].ligand.atoms);
}

} // namespace
} // namespace pocketflow
