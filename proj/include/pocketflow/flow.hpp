//
// PocketFlow - Copyright 2026 The PocketFlow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pocketflow/errors.hpp"
#include "pocketflow/params.hpp"

namespace pocketflow {

/// Standard normal log-density in natural-log units.
inline double base_log_prob(const Eigen::VectorXd &z) {
  return -0.5 * static_cast<double>(z.size())
             * std::log(2 * std::numbers::pi)
         - 0.5 * z.squaredNorm();
}

inline double softplus(double x) {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

inline double softplus_inverse(double y) {
  return y > 30 ? y : std::log(std::expm1(y));
}

inline double sigmoid(double x) {
  return x >= 0 ? 1.0 / (1.0 + std::exp(-x))
                : std::exp(x) / (1.0 + std::exp(x));
}

struct FlowResult {
  Eigen::VectorXd value;
  double logdet;
};

struct FlowSample {
  Eigen::VectorXd x;
  double log_density;
};

/// Stack of conditional elementwise affine layers. Layer i computes
/// s_i(c) * z + b_i(c), with [softplus^-1-space scale; shift] an affine map
/// of the conditioning vector c; the dimension order is reversed between
/// consecutive layers. The Jacobian of every layer is diagonal with entries
/// s_i > 0.
class ConditionalFlow {
public:
  ConditionalFlow() = default;

  ConditionalFlow(const std::string &name, int dim, int cond_dim, int layers,
                  ParameterSet &params, double scale_floor = 1e-4)
      : dim_(dim), cond_dim_(cond_dim), scale_floor_(scale_floor) {
    if (dim < 1 || cond_dim < 0 || layers < 1)
      throw ConfigError("flow " + name
                        + " needs dim >= 1 and at least one layer");
    if (!(scale_floor > 0))
      throw ConfigError("flow scale floor must be positive");
    for (int i = 0; i < layers; ++i) {
      const std::string p = name + ".layer" + std::to_string(i);
      weights_.push_back(params.add(p + ".weight", 2 * dim, std::max(cond_dim, 1)));
      biases_.push_back(params.add(p + ".bias", 2 * dim, 1));
    }
  }

  int dim() const { return dim_; }
  int cond_dim() const { return cond_dim_; }
  int layers() const { return static_cast<int>(weights_.size()); }
  double scale_floor() const { return scale_floor_; }
  int weight_block(int layer) const { return weights_.at(layer); }
  int bias_block(int layer) const { return biases_.at(layer); }

  /// Bias for a raw scale that maps to exactly s.
  double raw_for_scale(double s) const {
    return softplus_inverse(s - scale_floor_);
  }

  /// Identity transform at c = 0; conditioner weights uniform in
  /// [-scale, scale].
  template <class URBG>
  void initialize(ParameterSet &params, URBG &rng, double scale = 0.0) const {
    for (int i = 0; i < layers(); ++i) {
      if (scale > 0)
        params.fill_uniform(weights_[i], -scale, scale, rng);
      else
        params[weights_[i]].setZero();
      auto bias = params[biases_[i]];
      bias.topRows(dim_).setConstant(raw_for_scale(1.0));
      bias.bottomRows(dim_).setZero();
    }
  }

  /// Per-layer scale and shift for a conditioning vector.
  void coefficients(const ParameterSet &params, int layer,
                    const Eigen::VectorXd &cond, Eigen::VectorXd &raw,
                    Eigen::VectorXd &scale, Eigen::VectorXd &shift) const {
    Eigen::VectorXd out = params[biases_[layer]].col(0);
    if (cond_dim_ > 0)
      out += params[weights_[layer]] * cond;
    raw = out.head(dim_);
    shift = out.tail(dim_);
    scale.resize(dim_);
    for (int d = 0; d < dim_; ++d)
      scale[d] = softplus(raw[d]) + scale_floor_;
  }

  FlowResult forward(const ParameterSet &params, const Eigen::VectorXd &z,
                     const Eigen::VectorXd &cond) const {
    check(z, cond);
    Eigen::VectorXd x = z, raw, scale, shift;
    double logdet = 0;
    for (int i = 0; i < layers(); ++i) {
      if (i > 0)
        x.reverseInPlace();
      coefficients(params, i, cond, raw, scale, shift);
      x = scale.cwiseProduct(x) + shift;
      logdet += scale.array().log().sum();
    }
    return { std::move(x), logdet };
  }

  FlowResult inverse(const ParameterSet &params, const Eigen::VectorXd &x,
                     const Eigen::VectorXd &cond) const {
    check(x, cond);
    Eigen::VectorXd z = x, raw, scale, shift;
    double logdet = 0;
    for (int i = layers() - 1; i >= 0; --i) {
      coefficients(params, i, cond, raw, scale, shift);
      z = (z - shift).cwiseQuotient(scale);
      logdet -= scale.array().log().sum();
      if (i > 0)
        z.reverseInPlace();
    }
    return { std::move(z), logdet };
  }

  /// log p(x | c) = log N(f^-1(x)) + log|det d f^-1 / dx|.
  double log_prob(const ParameterSet &params, const Eigen::VectorXd &x,
                  const Eigen::VectorXd &cond) const {
    const auto inv = inverse(params, x, cond);
    return base_log_prob(inv.value) + inv.logdet;
  }

  template <class URBG>
  FlowSample sample(const ParameterSet &params, const Eigen::VectorXd &cond,
                    URBG &rng) const {
    std::normal_distribution<double> normal;
    Eigen::VectorXd z(dim_);
    for (int d = 0; d < dim_; ++d)
      z[d] = normal(rng);
    return push(params, z, cond);
  }

  /// Maps a given latent through the flow along with its density.
  FlowSample push(const ParameterSet &params, const Eigen::VectorXd &z,
                  const Eigen::VectorXd &cond) const {
    auto fwd = forward(params, z, cond);
    return { std::move(fwd.value), base_log_prob(z) - fwd.logdet };
  }

  /// Returns log p(x | c) and accumulates `upstream` * d log p / d params into
  /// `grad` and, when given, `upstream` * d log p / d c into `grad_cond`.
  double log_prob_backward(const ParameterSet &params,
                           const Eigen::VectorXd &x,
                           const Eigen::VectorXd &cond, double upstream,
                           Eigen::VectorXd &grad,
                           Eigen::VectorXd *grad_cond = nullptr) const {
    check(x, cond);
    const int k = layers();
    std::vector<Eigen::VectorXd> raws(k), scales(k), pre(k);
    Eigen::VectorXd z = x, shift;
    double logp = 0;
    for (int i = k - 1; i >= 0; --i) {
      coefficients(params, i, cond, raws[i], scales[i], shift);
      z = (z - shift).cwiseQuotient(scales[i]);
      pre[i] = z;
      logp -= scales[i].array().log().sum();
      if (i > 0)
        z.reverseInPlace();
    }
    logp += base_log_prob(z);

    Eigen::VectorXd g = -upstream * z; // d(upstream * log p) / d z_0
    Eigen::VectorXd grad_out(2 * dim_);
    for (int i = 0; i < k; ++i) {
      if (i > 0)
        g.reverseInPlace();
      const auto &s = scales[i];
      const Eigen::VectorXd grad_shift = -g.cwiseQuotient(s);
      const Eigen::VectorXd grad_scale =
          grad_shift.cwiseProduct(pre[i]) - upstream * s.cwiseInverse();
      for (int d = 0; d < dim_; ++d)
        grad_out[d] = grad_scale[d] * sigmoid(raws[i][d]);
      grad_out.tail(dim_) = grad_shift;

      params.view(grad, biases_[i]).col(0) += grad_out;
      if (cond_dim_ > 0) {
        params.view(grad, weights_[i]) += grad_out * cond.transpose();
        if (grad_cond != nullptr)
          *grad_cond += params[weights_[i]].transpose() * grad_out;
      }
      g = g.cwiseQuotient(s);
    }
    return logp;
  }

private:
  void check(const Eigen::VectorXd &v, const Eigen::VectorXd &cond) const {
    if (v.size() != dim_)
      throw ShapeError("flow input width " + std::to_string(v.size())
                       + " != " + std::to_string(dim_));
    if (cond.size() != cond_dim_)
      throw ShapeError("conditioning width " + std::to_string(cond.size())
                       + " != " + std::to_string(cond_dim_));
  }

  int dim_ = 0;
  int cond_dim_ = 0;
  double scale_floor_ = 1e-4;
  std::vector<int> weights_, biases_;
};

} // namespace pocketflow
