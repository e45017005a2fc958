//
// PocketFlow - Copyright 2026 The PocketFlow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pocketflow/chem_core.hpp"
#include "pocketflow/errors.hpp"

namespace pocketflow {

inline double pairwise_distance(const Vec3 &a, const Vec3 &b) {
  return (a - b).norm();
}

/// Gaussian radial basis with a shared width.
class RbfBank {
public:
  RbfBank(std::vector<double> centers, double width)
      : centers_(std::move(centers)), width_(width) {
    if (centers_.empty())
      throw ConfigError("RBF bank needs at least one center");
    for (size_t i = 1; i < centers_.size(); ++i)
      if (!(centers_[i] > centers_[i - 1]))
        throw ConfigError("RBF centers must be strictly increasing");
    if (!(width_ > 0))
      throw ConfigError("RBF width must be positive");
  }

  /// `count` centers evenly spaced on [lo, hi]; width defaults to the spacing.
  static RbfBank uniform(int count, double lo, double hi, double width = 0) {
    if (count < 2 || !(hi > lo))
      throw ConfigError("RBF bank needs count >= 2 and hi > lo");
    std::vector<double> centers(count);
    const double step = (hi - lo) / (count - 1);
    for (int i = 0; i < count; ++i)
      centers[i] = lo + step * i;
    return RbfBank(std::move(centers), width > 0 ? width : step);
  }

  int size() const { return static_cast<int>(centers_.size()); }
  const std::vector<double> &centers() const { return centers_; }
  double width() const { return width_; }

private:
  std::vector<double> centers_;
  double width_;
};

inline Eigen::VectorXd rbf_expand(double d, const RbfBank &bank) {
  Eigen::VectorXd g(bank.size());
  const double inv = 1.0 / (2 * bank.width() * bank.width());
  for (int i = 0; i < bank.size(); ++i) {
    const double x = d - bank.centers()[i];
    g[i] = std::exp(-x * x * inv);
  }
  return g;
}

namespace internal {
  inline void check_same_size(const Molecule &a, const Molecule &b) {
    if (a.size() != b.size())
      throw ShapeError("RMSD needs equal atom counts (" + std::to_string(a.size())
                       + " vs " + std::to_string(b.size()) + ")");
    if (a.empty())
      throw ShapeError("RMSD of empty molecules");
  }
} // namespace internal

/// Root-mean-square deviation under positional correspondence, no alignment.
inline double rmsd(const Molecule &a, const Molecule &b) {
  internal::check_same_size(a, b);
  double sq = 0;
  for (int i = 0; i < a.size(); ++i)
    sq += (a.atoms[i].position - b.atoms[i].position).squaredNorm();
  return std::sqrt(sq / a.size());
}

/// Mean of per-atom distances. Reported alongside rmsd() for comparison with
/// tools that use the mean-distance convention.
inline double mean_atom_distance(const Molecule &a, const Molecule &b) {
  internal::check_same_size(a, b);
  double sum = 0;
  for (int i = 0; i < a.size(); ++i)
    sum += (a.atoms[i].position - b.atoms[i].position).norm();
  return sum / a.size();
}

/// RMSD after optimal superposition (Kabsch).
inline double kabsch_rmsd(const Molecule &a, const Molecule &b) {
  internal::check_same_size(a, b);
  const int n = a.size();
  Eigen::Matrix3Xd pa(3, n), pb(3, n);
  for (int i = 0; i < n; ++i) {
    pa.col(i) = a.atoms[i].position;
    pb.col(i) = b.atoms[i].position;
  }
  const Vec3 ca = pa.rowwise().mean(), cb = pb.rowwise().mean();
  pa.colwise() -= ca;
  pb.colwise() -= cb;

  const Eigen::Matrix3d h = pa * pb.transpose();
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(h, Eigen::ComputeFullU
                                               | Eigen::ComputeFullV);
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  if ((svd.matrixV() * svd.matrixU().transpose()).determinant() < 0)
    d(2, 2) = -1;
  const Eigen::Matrix3d rot = svd.matrixV() * d * svd.matrixU().transpose();

  const double sq = (rot * pa - pb).colwise().squaredNorm().sum();
  return std::sqrt(std::max(sq, 0.0) / n);
}

struct RigidTransform {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Vec3 translation = Vec3::Zero();

  void validate() const {
    const double ortho =
        (rotation.transpose() * rotation - Eigen::Matrix3d::Identity())
            .cwiseAbs()
            .maxCoeff();
    if (!(ortho <= 1e-12))
      throw TransformError("rotation is not orthogonal");
    if (std::abs(rotation.determinant() - 1.0) > 1e-12)
      throw TransformError("rotation determinant is not +1");
    if (!translation.allFinite())
      throw TransformError("non-finite translation");
  }

  /// Uniform random rotation (from a unit quaternion) and a translation with
  /// components in [-span, span].
  template <class URBG>
  static RigidTransform random(URBG &rng, double span = 10.0) {
    std::normal_distribution<double> normal;
    Eigen::Vector4d v;
    for (int d = 0; d < 4; ++d)
      v[d] = normal(rng);
    Eigen::Quaterniond q(v[0], v[1], v[2], v[3]);
    q.normalize();
    std::uniform_real_distribution<double> shift(-span, span);
    RigidTransform t;
    t.rotation = q.toRotationMatrix();
    // Re-orthonormalize so the 1e-12 orthogonality contract holds exactly.
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(t.rotation, Eigen::ComputeFullU
                                                          | Eigen::ComputeFullV);
    t.rotation = svd.matrixU() * svd.matrixV().transpose();
    for (int d = 0; d < 3; ++d)
      t.translation[d] = shift(rng);
    return t;
  }
};

inline std::vector<Vec3> apply_rigid(const RigidTransform &t,
                                     const std::vector<Vec3> &points) {
  t.validate();
  std::vector<Vec3> out;
  out.reserve(points.size());
  for (const auto &p: points)
    out.push_back(t.rotation * p + t.translation);
  return out;
}

inline std::vector<Atom> apply_rigid(const RigidTransform &t,
                                     std::vector<Atom> atoms) {
  t.validate();
  for (auto &a: atoms)
    a.position = t.rotation * a.position + t.translation;
  return atoms;
}

} // namespace pocketflow
