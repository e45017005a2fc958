//
// PocketFlow - Copyright 2026 The PocketFlow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pocketflow/chem_core.hpp"
#include "pocketflow/encoder.hpp"
#include "pocketflow/errors.hpp"
#include "pocketflow/model.hpp"
#include "pocketflow/pdb.hpp"

namespace pocketflow {

/// One autoregressive factor: predict (type, offset) of the next ligand atom
/// given everything placed before it.
struct TrajectoryStep {
  Context context;
  int focal;                    // index into context
  int target_element;
  Eigen::VectorXd target_type;  // one-hot plus dequantization noise
  Vec3 target_offset;           // target position minus focal position
};

/// Nearest-first atom ordering: start from the ligand atom closest to the
/// pocket centroid, then repeatedly take the unplaced atom closest to any
/// placed one. Ties go to the lower index.
inline std::vector<int> growth_order(const ComplexEntry &entry) {
  const auto &lig = entry.ligand.atoms;
  const int n = static_cast<int>(lig.size());
  const Vec3 center = entry.pocket.centroid();

  std::vector<int> order;
  std::vector<char> used(n, 0);
  int first = 0;
  for (int i = 1; i < n; ++i)
    if ((lig[i].position - center).norm()
        < (lig[first].position - center).norm())
      first = i;
  order.push_back(first);
  used[first] = 1;

  while (static_cast<int>(order.size()) < n) {
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      if (used[i])
        continue;
      for (int p: order) {
        const double d = (lig[i].position - lig[p].position).norm();
        if (d < best_d) {
          best_d = d;
          best = i;
        }
      }
    }
    order.push_back(best);
    used[best] = 1;
  }
  return order;
}

template <class URBG>
std::vector<TrajectoryStep> sequentialize(const ComplexEntry &entry,
                                          int vocab, double alpha,
                                          URBG &rng) {
  if (entry.ligand.empty())
    throw InputError("cannot sequentialize an empty ligand");
  if (!(alpha > 0 && alpha <= 0.5))
    throw ConfigError("dequantization scale must lie in (0, 0.5]");

  std::uniform_real_distribution<double> noise(0.0, alpha);
  Context ctx = Context::from(entry.pocket);
  std::vector<TrajectoryStep> steps;
  for (int idx: growth_order(entry)) {
    const Atom &target = entry.ligand.atoms[idx];
    if (target.element < 0 || target.element >= vocab)
      throw VocabularyError("ligand element outside model vocabulary");

    int focal = 0;
    for (int k = 1; k < ctx.size(); ++k)
      if ((ctx.positions[k] - target.position).norm()
          < (ctx.positions[focal] - target.position).norm())
        focal = k;

    TrajectoryStep step;
    step.context = ctx;
    step.focal = focal;
    step.target_element = target.element;
    step.target_type = Eigen::VectorXd::Zero(vocab);
    step.target_type[target.element] = 1.0;
    for (int d = 0; d < vocab; ++d)
      step.target_type[d] += noise(rng);
    step.target_offset = target.position - ctx.positions[focal];
    steps.push_back(std::move(step));

    ctx.push(target, false);
  }
  return steps;
}

template <class URBG>
std::vector<TrajectoryStep>
sequentialize_all(const std::vector<ComplexEntry> &entries, int vocab,
                  double alpha, URBG &rng) {
  std::vector<TrajectoryStep> out;
  for (const auto &e: entries) {
    auto steps = sequentialize(e, vocab, alpha, rng);
    out.insert(out.end(), std::make_move_iterator(steps.begin()),
               std::make_move_iterator(steps.end()));
  }
  return out;
}

namespace internal {
  /// -log p of one step; when `grad` is given, adds `weight` * d(-log p).
  inline double step_nll(const Model &model, const ParameterSet &params,
                         const TrajectoryStep &step, double weight,
                         Eigen::VectorXd *grad) {
    const auto &enc = model.encoder();
    EncoderTape tape;
    const Embeddings h =
        enc.encode(params, step.context, grad != nullptr ? &tape : nullptr);
    const Eigen::VectorXd readout = aggregate_readout(h, step.focal);
    const Eigen::VectorXd coord_cond =
        model.coord_condition(readout, step.target_element);
    const Eigen::VectorXd offset = step.target_offset;

    if (grad == nullptr)
      return -(model.type_flow().log_prob(params, step.target_type, readout)
               + model.coord_flow().log_prob(params, offset, coord_cond));

    Eigen::VectorXd g_type = Eigen::VectorXd::Zero(readout.size());
    Eigen::VectorXd g_coord = Eigen::VectorXd::Zero(coord_cond.size());
    const double lp_type = model.type_flow().log_prob_backward(
        params, step.target_type, readout, -weight, *grad, &g_type);
    const double lp_coord = model.coord_flow().log_prob_backward(
        params, offset, coord_cond, -weight, *grad, &g_coord);

    const Eigen::VectorXd g_readout = g_type + g_coord.head(readout.size());
    const int width = enc.width();
    Eigen::MatrixXd g_h = Eigen::MatrixXd::Zero(h.rows(), h.cols());
    g_h.colwise() += g_readout.tail(width) / static_cast<double>(h.cols());
    g_h.col(step.focal) += g_readout.head(width);
    enc.backward(params, tape, std::move(g_h), *grad);
    return -(lp_type + lp_coord);
  }
} // namespace internal

/// Mean negative log-likelihood over the batch.
inline double nll_loss(const Model &model, const ParameterSet &params,
                       const std::vector<TrajectoryStep> &steps) {
  if (steps.empty())
    throw InputError("loss over an empty batch");
  double total = 0;
  for (size_t i = 0; i < steps.size(); ++i) {
    const double l = internal::step_nll(model, params, steps[i], 0, nullptr);
    if (!std::isfinite(l))
      throw NumericError("non-finite loss at step " + std::to_string(i));
    total += l;
  }
  return total / static_cast<double>(steps.size());
}

inline double nll_loss(const Model &model,
                       const std::vector<TrajectoryStep> &steps) {
  return nll_loss(model, model.params(), steps);
}

struct LossAndGrad {
  double loss;
  Eigen::VectorXd grad;
};

/// Loss and its exact gradient with respect to every parameter.
inline LossAndGrad loss_and_grad(const Model &model, const ParameterSet &params,
                                 const std::vector<TrajectoryStep> &steps) {
  if (steps.empty())
    throw InputError("gradient over an empty batch");
  const double weight = 1.0 / static_cast<double>(steps.size());
  LossAndGrad out { 0.0, Eigen::VectorXd::Zero(params.size()) };
  for (size_t i = 0; i < steps.size(); ++i) {
    const double l =
        internal::step_nll(model, params, steps[i], weight, &out.grad);
    if (!std::isfinite(l))
      throw NumericError("non-finite loss at step " + std::to_string(i));
    out.loss += l;
  }
  out.loss *= weight;
  if (!out.grad.allFinite())
    throw NumericError("non-finite gradient");
  return out;
}

inline Eigen::VectorXd grad(const Model &model, const ParameterSet &params,
                            const std::vector<TrajectoryStep> &steps) {
  return loss_and_grad(model, params, steps).grad;
}

struct TrainConfig {
  int epochs = 200;
  double learning_rate = 1e-3;
  int batch_size = 0; // 0 = full batch
  std::uint64_t seed = 0;
  double dequant_alpha = 0.25;
  double divergence_threshold = 1e6;
};

struct TrainResult {
  std::vector<double> history; // mean NLL per epoch, before that epoch's updates
  bool diverged = false;
  std::string failure;
};

/// Plain SGD on a fixed set of trajectory steps; updates `model` in place.
inline TrainResult train_steps(Model &model,
                               const std::vector<TrajectoryStep> &steps,
                               const TrainConfig &cfg) {
  if (steps.empty())
    throw InputError("training needs at least one trajectory step");
  if (!(cfg.learning_rate >= 0))
    throw ConfigError("learning rate must be non-negative");

  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<size_t> order(steps.size());
  std::iota(order.begin(), order.end(), 0);
  const size_t batch = cfg.batch_size <= 0
                           ? steps.size()
                           : std::min<size_t>(cfg.batch_size, steps.size());

  TrainResult result;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (batch < steps.size())
      std::shuffle(order.begin(), order.end(), rng);
    double epoch_total = 0;
    try {
      for (size_t start = 0; start < steps.size(); start += batch) {
        std::vector<TrajectoryStep> mb;
        for (size_t i = start; i < std::min(start + batch, steps.size()); ++i)
          mb.push_back(steps[order[i]]);
        auto [loss, g] = loss_and_grad(model, model.params(), mb);
        epoch_total += loss * static_cast<double>(mb.size());
        if (loss > cfg.divergence_threshold)
          throw NumericError("loss " + std::to_string(loss)
                             + " exceeds divergence threshold");
        model.params().values() -= cfg.learning_rate * g;
      }
    } catch (const NumericError &e) {
      result.diverged = true;
      result.failure = "epoch " + std::to_string(epoch + 1) + ": " + e.what();
      return result;
    }
    result.history.push_back(epoch_total / static_cast<double>(steps.size()));
  }
  return result;
}

/// Builds trajectories (dequantization noise drawn from the seed) and trains.
inline TrainResult train(Model &model,
                         const std::vector<ComplexEntry> &dataset,
                         const TrainConfig &cfg) {
  if (dataset.empty())
    throw InputError("training needs at least one complex");
  std::mt19937_64 rng(cfg.seed);
  const auto steps =
      sequentialize_all(dataset, model.vocab(), cfg.dequant_alpha, rng);
  return train_steps(model, steps, cfg);
}

} // namespace pocketflow
