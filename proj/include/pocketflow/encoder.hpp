//
// PocketFlow - Copyright 2026 The PocketFlow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pocketflow/chem_core.hpp"
#include "pocketflow/errors.hpp"
#include "pocketflow/geometry.hpp"
#include "pocketflow/params.hpp"
#include "pocketflow/pdb.hpp"

namespace pocketflow {

/// Conditioning set: pocket atoms followed by the ligand atoms placed so far.
struct Context {
  std::vector<int> elements;
  std::vector<Vec3> positions;
  std::vector<char> protein;             // 1 for pocket atoms
  std::vector<double> bfactor_weights;   // normalized; 0 for ligand atoms

  int size() const { return static_cast<int>(elements.size()); }
  bool empty() const { return elements.empty(); }

  void push(const Atom &atom, bool from_protein, double bweight = 0.0) {
    elements.push_back(atom.element);
    positions.push_back(atom.position);
    protein.push_back(from_protein ? 1 : 0);
    bfactor_weights.push_back(bweight);
  }

  static Context from(const Pocket &pocket, const Molecule &placed = {}) {
    Context ctx;
    if (!pocket.empty()) {
      const auto w = normalize_bfactors(pocket);
      for (int j = 0; j < pocket.size(); ++j)
        ctx.push(pocket.atoms[j], true, w[j]);
    }
    for (const auto &a: placed.atoms)
      ctx.push(a, false);
    return ctx;
  }
};

struct GraphEdge {
  int source; // u
  int target; // k
  int pair;   // index of the unordered pair, shared by (u,k) and (k,u)
};

/// Radius graph over a context. Every unordered pair within the cutoff appears
/// as two directed edges sharing one pair distance.
struct ContextGraph {
  std::vector<int> elements;
  std::vector<char> protein;
  std::vector<double> bfactor_weights;
  std::vector<Vec3> positions;
  std::vector<GraphEdge> edges;
  std::vector<double> pair_distances;

  int size() const { return static_cast<int>(elements.size()); }
};

inline ContextGraph build_graph(const Context &ctx, double cutoff = 6.0) {
  if (ctx.empty())
    throw InputError("cannot build a graph over an empty context");
  if (!(cutoff > 0))
    throw InputError("graph cutoff must be positive");

  ContextGraph g;
  g.elements = ctx.elements;
  g.protein = ctx.protein;
  g.bfactor_weights = ctx.bfactor_weights;
  g.positions = ctx.positions;
  const int n = ctx.size();
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double d = pairwise_distance(ctx.positions[i], ctx.positions[j]);
      if (d <= cutoff) {
        const int p = static_cast<int>(g.pair_distances.size());
        g.pair_distances.push_back(d);
        g.edges.push_back({ i, j, p });
        g.edges.push_back({ j, i, p });
      }
    }
  }
  return g;
}

struct EncoderConfig {
  int width = 32;       // H
  int mlp_width = 64;
  int layers = 2;
  double cutoff = 6.0;
  int rbf_count = 16;
  double rbf_max = 8.0;
  double rbf_width = 0; // 0 selects the center spacing
  bool bfactor_gating = false;

  RbfBank rbf() const {
    return RbfBank::uniform(rbf_count, 0.0, rbf_max, rbf_width);
  }
};

/// Per-atom embeddings, one column per context atom.
using Embeddings = Eigen::MatrixXd;

/// Intermediate values of one encoder pass, kept for the backward sweep.
struct EncoderTape {
  ContextGraph graph;
  Eigen::MatrixXd rbf;                   // R x pairs
  std::vector<Eigen::MatrixXd> inputs;   // h^(l-1) for each layer
  std::vector<Eigen::MatrixXd> hidden;   // tanh activations, mlp x pairs
  std::vector<Eigen::MatrixXd> messages; // MLP outputs, H x pairs
};

/// Distance-only message passing: every layer adds, for each neighbor u of k,
/// h_u (optionally scaled by the B-factor gate) times an MLP of the RBF
/// expanded distance d_uk.
class ContextEncoder {
public:
  ContextEncoder() = default;

  ContextEncoder(const EncoderConfig &config, int vocab, ParameterSet &params)
      : config_(config), vocab_(vocab) {
    if (config.layers < 1 || config.width < 1 || config.mlp_width < 1)
      throw ConfigError("encoder needs at least one layer of positive width");
    const int r = config.rbf().size();
    table_ = params.add("encoder.embedding", 2 * vocab, config.width);
    for (int l = 0; l < config.layers; ++l) {
      const std::string p = "encoder.layer" + std::to_string(l);
      w1_.push_back(params.add(p + ".w1", config.mlp_width, r));
      b1_.push_back(params.add(p + ".b1", config.mlp_width, 1));
      w2_.push_back(params.add(p + ".w2", config.width, config.mlp_width));
      b2_.push_back(params.add(p + ".b2", config.width, 1));
    }
    gates_ = params.add("encoder.bfactor_gates", config.layers, 1);
  }

  const EncoderConfig &config() const { return config_; }
  int width() const { return config_.width; }
  int vocab() const { return vocab_; }
  int gate_block() const { return gates_; }
  int embedding_block() const { return table_; }
  int output_weight_block(int layer) const { return w2_.at(layer); }
  int output_bias_block(int layer) const { return b2_.at(layer); }

  /// Table and hidden MLP layers uniform in [-scale, scale]; output MLP
  /// layers and gates zero, so messages start at zero.
  template <class URBG>
  void initialize(ParameterSet &params, URBG &rng, double scale = 0.1) const {
    params.fill_uniform(table_, -scale, scale, rng);
    for (int l = 0; l < config_.layers; ++l) {
      params.fill_uniform(w1_[l], -scale, scale, rng);
      params.fill_uniform(b1_[l], -scale, scale, rng);
      params[w2_[l]].setZero();
      params[b2_[l]].setZero();
    }
    params[gates_].setZero();
  }

  int table_row(int element, bool protein) const {
    if (element < 0 || element >= vocab_)
      throw VocabularyError("element index " + std::to_string(element)
                            + " outside vocabulary");
    return 2 * element + (protein ? 1 : 0);
  }

  Embeddings initial(const ParameterSet &params, const ContextGraph &g) const {
    const auto table = params[table_];
    Embeddings h(width(), g.size());
    for (int k = 0; k < g.size(); ++k)
      h.col(k) = table.row(table_row(g.elements[k], g.protein[k])).transpose();
    return h;
  }

  Eigen::MatrixXd rbf_features(const ContextGraph &g) const {
    const auto bank = config_.rbf();
    Eigen::MatrixXd e(bank.size(), g.pair_distances.size());
    for (size_t p = 0; p < g.pair_distances.size(); ++p)
      e.col(static_cast<Eigen::Index>(p)) = rbf_expand(g.pair_distances[p], bank);
    return e;
  }

  /// One update of all node embeddings. `bfactor_weights` empty disables
  /// gating; otherwise protein neighbors' messages are scaled by
  /// (1 + gate_l * w_u).
  Embeddings message_layer(const ParameterSet &params, const Embeddings &h,
                           const ContextGraph &g, int layer,
                           std::span<const double> bfactor_weights = {},
                           EncoderTape *tape = nullptr) const {
    if (h.rows() != width() || h.cols() != g.size())
      throw ShapeError("embedding shape " + std::to_string(h.rows()) + "x"
                       + std::to_string(h.cols()) + " does not match encoder");
    if (layer < 0 || layer >= config_.layers)
      throw ShapeError("layer index out of range");
    if (!bfactor_weights.empty()
        && static_cast<int>(bfactor_weights.size()) != g.size())
      throw ShapeError("B-factor weight count does not match graph");

    const Eigen::MatrixXd e =
        tape != nullptr && tape->rbf.cols() == Eigen::Index(g.pair_distances.size())
            ? tape->rbf
            : rbf_features(g);
    Eigen::MatrixXd hidden =
        ((params[w1_[layer]] * e).colwise()
         + params[b1_[layer]].col(0))
            .array()
            .tanh()
            .matrix();
    Eigen::MatrixXd msg =
        (params[w2_[layer]] * hidden).colwise() + params[b2_[layer]].col(0);

    const double gate = params[gates_](layer, 0);
    Embeddings out = h;
    for (const auto &edge: g.edges) {
      if (!bfactor_weights.empty() && g.protein[edge.source]) {
        const double scale = 1.0 + gate * bfactor_weights[edge.source];
        out.col(edge.target) +=
            (scale * h.col(edge.source)).cwiseProduct(msg.col(edge.pair));
      } else {
        out.col(edge.target) +=
            h.col(edge.source).cwiseProduct(msg.col(edge.pair));
      }
    }

    if (tape != nullptr) {
      tape->inputs.push_back(h);
      tape->hidden.push_back(std::move(hidden));
      tape->messages.push_back(std::move(msg));
    }
    return out;
  }

  Embeddings encode(const ParameterSet &params, const Context &ctx,
                    EncoderTape *tape = nullptr) const {
    if (ctx.empty())
      throw InputError("cannot encode an empty context");
    ContextGraph g = build_graph(ctx, config_.cutoff);
    if (tape != nullptr) {
      *tape = EncoderTape {};
      tape->rbf = rbf_features(g);
    }
    const std::span<const double> weights =
        config_.bfactor_gating ? std::span<const double>(g.bfactor_weights)
                               : std::span<const double>();
    Embeddings h = initial(params, g);
    for (int l = 0; l < config_.layers; ++l)
      h = message_layer(params, h, g, l, weights, tape);
    if (tape != nullptr)
      tape->graph = std::move(g);
    return h;
  }

  /// Accumulates dL/dparams into `grad` given dL/d(final embeddings).
  void backward(const ParameterSet &params, const EncoderTape &tape,
                Eigen::MatrixXd grad_out, Eigen::VectorXd &grad) const {
    const auto &g = tape.graph;
    const bool gated = config_.bfactor_gating;
    for (int l = config_.layers - 1; l >= 0; --l) {
      const auto &h = tape.inputs[l];
      const auto &hidden = tape.hidden[l];
      const auto &msg = tape.messages[l];
      const double gate = params[gates_](l, 0);

      Eigen::MatrixXd grad_in = grad_out;
      Eigen::MatrixXd grad_msg = Eigen::MatrixXd::Zero(msg.rows(), msg.cols());
      double grad_gate = 0;
      for (const auto &edge: g.edges) {
        const auto go = grad_out.col(edge.target);
        double scale = 1.0;
        if (gated && g.protein[edge.source]) {
          const double w = g.bfactor_weights[edge.source];
          scale = 1.0 + gate * w;
          grad_gate += w
                       * go.cwiseProduct(h.col(edge.source))
                             .cwiseProduct(msg.col(edge.pair))
                             .sum();
        }
        grad_in.col(edge.source) += scale * go.cwiseProduct(msg.col(edge.pair));
        grad_msg.col(edge.pair) += scale * go.cwiseProduct(h.col(edge.source));
      }

      params.view(grad, w2_[l]) += grad_msg * hidden.transpose();
      params.view(grad, b2_[l]).col(0) += grad_msg.rowwise().sum();
      const Eigen::MatrixXd grad_pre =
          (params[w2_[l]].transpose() * grad_msg)
              .cwiseProduct((1.0 - hidden.array().square()).matrix());
      params.view(grad, w1_[l]) += grad_pre * tape.rbf.transpose();
      params.view(grad, b1_[l]).col(0) += grad_pre.rowwise().sum();
      params.view(grad, gates_)(l, 0) += grad_gate;

      grad_out = std::move(grad_in);
    }

    auto table_grad = params.view(grad, table_);
    for (int k = 0; k < g.size(); ++k)
      table_grad.row(table_row(g.elements[k], g.protein[k])) +=
          grad_out.col(k).transpose();
  }

private:
  EncoderConfig config_;
  int vocab_ = 0;
  int table_ = -1;
  std::vector<int> w1_, b1_, w2_, b2_;
  int gates_ = -1;
};

/// Focal embedding concatenated with the mean embedding (width 2H).
inline Eigen::VectorXd aggregate_readout(const Embeddings &h, int focal) {
  if (focal < 0 || focal >= h.cols())
    throw RangeError("focal index " + std::to_string(focal)
                     + " out of range");
  Eigen::VectorXd out(2 * h.rows());
  out.head(h.rows()) = h.col(focal);
  out.tail(h.rows()) = h.rowwise().mean();
  return out;
}

} // namespace pocketflow
