//
// PocketFlow - Copyright 2026 The PocketFlow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "pocketflow/encoder.hpp"
#include "pocketflow/geometry.hpp"
#include "test_utils.hpp"

namespace pocketflow {
namespace {
Molecule points(std::vector<Vec3> ps) {
  Molecule m;
  for (auto &p: ps)
    m.atoms.push_back({ 1, p });
  return m;
}

TEST(Geometry, PairwiseDistance) {
  EXPECT_DOUBLE_EQ(pairwise_distance({ 0, 0, 0 }, { 3, 4, 0 }), 5.0);
  EXPECT_DOUBLE_EQ(pairwise_distance({ 1, 2, 3 }, { 1, 2, 3 }), 0.0);
  EXPECT_NEAR(pairwise_distance({ 1, 1, 1 }, { 2, 2, 2 }), 1.7320508075688772,
              1e-15);
}

TEST(Geometry, RbfExpand) {
  const RbfBank bank({ 0.0, 1.0, 2.0 }, 0.5);
  const auto at_center = rbf_expand(1.0, bank);
  EXPECT_DOUBLE_EQ(at_center[1], 1.0);
  EXPECT_NEAR(rbf_expand(1.5, bank)[1], 0.6065306597126334, 1e-15);
  EXPECT_NEAR(rbf_expand(2.5, bank)[1], 0.011108996538242306, 1e-15);
  for (double d: { 0.0, 0.7, 3.0, 7.9 }) {
    const auto g = rbf_expand(d, bank);
    EXPECT_TRUE((g.array() > 0).all() && (g.array() <= 1).all());
  }
}

TEST(Geometry, DefaultRbfBank) {
  const auto bank = EncoderConfig {}.rbf();
  EXPECT_EQ(bank.size(), 16);
  EXPECT_DOUBLE_EQ(bank.centers().front(), 0.0);
  EXPECT_DOUBLE_EQ(bank.centers().back(), 8.0);
  EXPECT_NEAR(bank.width(), 8.0 / 15, 1e-15);
  EXPECT_THROW(RbfBank({ 1.0, 1.0 }, 0.5), ConfigError);
  EXPECT_THROW(RbfBank({ 1.0, 2.0 }, 0.0), ConfigError);
}

TEST(Geometry, Rmsd) {
  const auto a = points({ { 0, 0, 0 }, { 1, 0, 0 } });
  EXPECT_EQ(rmsd(a, a), 0.0);
  EXPECT_EQ(rmsd(points({ { 0, 0, 0 } }), points({ { 3, 4, 0 } })), 5.0);
  EXPECT_NEAR(rmsd(a, points({ { 1, 0, 0 }, { 1, 0, 0 } })),
              0.7071067811865476, 1e-12);
  EXPECT_THROW(rmsd(a, points({ { 0, 0, 0 } })), ShapeError);
}

TEST(Geometry, RmsdProperties) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 100; ++t) {
    Molecule a, b;
    for (int i = 0; i < 5; ++i) {
      a.atoms.push_back({ 0, test::random_point(rng, 5) });
      b.atoms.push_back({ 0, test::random_point(rng, 5) });
    }
    EXPECT_EQ(rmsd(a, b), rmsd(b, a));
    EXPECT_GE(rmsd(a, b), 0.0);
    EXPECT_LE(kabsch_rmsd(a, b), rmsd(a, b) + 1e-12);
    EXPECT_LE(mean_atom_distance(a, b), rmsd(a, b) + 1e-12);
  }
}

TEST(Geometry, KabschRemovesRigidMotion) {
  std::mt19937_64 rng(9);
  Molecule a;
  for (int i = 0; i < 6; ++i)
    a.atoms.push_back({ 0, test::random_point(rng, 3) });
  Molecule b = a;
  b.atoms = apply_rigid(RigidTransform::random(rng), a.atoms);
  EXPECT_GT(rmsd(a, b), 0.1);
  EXPECT_NEAR(kabsch_rmsd(a, b), 0.0, 1e-9);
}

TEST(Geometry, ApplyRigid) {
  const std::vector<Vec3> p { { 1, 0, 0 } };
  EXPECT_EQ(apply_rigid(RigidTransform {}, p)[0], p[0]);

  RigidTransform shift;
  shift.translation = { 1, 2, 3 };
  EXPECT_EQ(apply_rigid(shift, { Vec3::Zero() })[0], Vec3(1, 2, 3));

  RigidTransform rot;
  rot.rotation << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  const auto r = apply_rigid(rot, p)[0];
  EXPECT_NEAR((r - Vec3(0, 1, 0)).norm(), 0.0, 1e-12);

  RigidTransform skew;
  skew.rotation(0, 1) = 0.1;
  EXPECT_THROW(apply_rigid(skew, p), TransformError);
  RigidTransform mirror;
  mirror.rotation(2, 2) = -1;
  EXPECT_THROW(apply_rigid(mirror, p), TransformError);
}

TEST(Geometry, RigidPreservesDistancesAndRbf) {
  std::mt19937_64 rng(21);
  std::vector<Vec3> ps;
  for (int i = 0; i < 8; ++i)
    ps.push_back(test::random_point(rng, 6));
  const auto bank = EncoderConfig {}.rbf();
  for (int t = 0; t < 100; ++t) {
    const auto tf = RigidTransform::random(rng);
    EXPECT_NO_THROW(tf.validate());
    const auto qs = apply_rigid(tf, ps);
    for (size_t i = 0; i < ps.size(); ++i)
      for (size_t j = i + 1; j < ps.size(); ++j) {
        const double d0 = pairwise_distance(ps[i], ps[j]);
        const double d1 = pairwise_distance(qs[i], qs[j]);
        ASSERT_NEAR(d0, d1, 1e-10);
        ASSERT_LT((rbf_expand(d0, bank) - rbf_expand(d1, bank))
                      .cwiseAbs()
                      .maxCoeff(),
                  1e-9);
      }
  }
}

} // namespace
} // namespace pocketflow
