//
// PocketFlow - Copyright 2026 The PocketFlow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <Eigen/Dense>

#include "pocketflow/chem_core.hpp"
#include "pocketflow/encoder.hpp"
#include "pocketflow/errors.hpp"
#include "pocketflow/flow.hpp"
#include "pocketflow/io.hpp"
#include "pocketflow/params.hpp"

namespace pocketflow {

struct ModelConfig {
  EncoderConfig encoder;
  int type_layers = 6;
  int coord_layers = 6;
  double scale_floor = 1e-4;
  double encoder_init_scale = 0.1;
  double flow_init_scale = 0.1;
};

/// Shared context encoder feeding a type flow (width V, conditioned on the
/// 2H readout) and a coordinate flow (width 3, conditioned on the readout and
/// the one-hot atom type). All weights live in `params`.
class Model {
public:
  Model() = default;

  Model(ElementTable elements, const ModelConfig &config)
      : elements_(std::move(elements)), config_(config) {
    const int v = elements_.size();
    encoder_ = ContextEncoder(config.encoder, v, params_);
    const int readout = 2 * config.encoder.width;
    type_flow_ = ConditionalFlow("type_flow", v, readout, config.type_layers,
                                 params_, config.scale_floor);
    coord_flow_ = ConditionalFlow("coord_flow", 3, readout + v,
                                  config.coord_layers, params_,
                                  config.scale_floor);
  }

  static Model create(ElementTable elements, const ModelConfig &config,
                      std::uint64_t seed) {
    Model m(std::move(elements), config);
    std::mt19937_64 rng(seed);
    m.encoder_.initialize(m.params_, rng, config.encoder_init_scale);
    m.type_flow_.initialize(m.params_, rng, config.flow_init_scale);
    m.coord_flow_.initialize(m.params_, rng, config.flow_init_scale);
    return m;
  }

  const ElementTable &elements() const { return elements_; }
  const ModelConfig &config() const { return config_; }
  int vocab() const { return elements_.size(); }
  ParameterSet &params() { return params_; }
  const ParameterSet &params() const { return params_; }
  const ContextEncoder &encoder() const { return encoder_; }
  const ConditionalFlow &type_flow() const { return type_flow_; }
  const ConditionalFlow &coord_flow() const { return coord_flow_; }

  Eigen::VectorXd coord_condition(const Eigen::VectorXd &readout,
                                  int element) const {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(readout.size() + vocab());
    c.head(readout.size()) = readout;
    c[readout.size() + element] = 1.0;
    return c;
  }

  Checkpoint to_checkpoint() const {
    Checkpoint ckpt;
    std::string elements;
    for (const auto &e: elements_) {
      elements += (elements.empty() ? "" : ",") + e.symbol + ":"
                  + format_double(e.covalent_radius) + ":"
                  + std::to_string(e.max_valence) + ":"
                  + std::to_string(e.atomic_number);
    }
    const auto &enc = config_.encoder;
    ckpt.meta = {
      { "elements", elements },
      { "encoder.width", std::to_string(enc.width) },
      { "encoder.mlp_width", std::to_string(enc.mlp_width) },
      { "encoder.layers", std::to_string(enc.layers) },
      { "encoder.cutoff", format_double(enc.cutoff) },
      { "encoder.rbf_count", std::to_string(enc.rbf_count) },
      { "encoder.rbf_max", format_double(enc.rbf_max) },
      { "encoder.rbf_width", format_double(enc.rbf_width) },
      { "encoder.bfactor_gating", enc.bfactor_gating ? "1" : "0" },
      { "flow.type_layers", std::to_string(config_.type_layers) },
      { "flow.coord_layers", std::to_string(config_.coord_layers) },
      { "flow.scale_floor", format_double(config_.scale_floor) },
    };
    ckpt.params = params_;
    return ckpt;
  }

  static Model from_checkpoint(const Checkpoint &ckpt) {
    std::vector<ElementKind> kinds;
    std::istringstream es(ckpt.get("elements"));
    std::string item;
    while (std::getline(es, item, ',')) {
      std::istringstream is(item);
      std::string sym, radius, valence, z;
      std::getline(is, sym, ':');
      std::getline(is, radius, ':');
      std::getline(is, valence, ':');
      std::getline(is, z, ':');
      kinds.push_back({ sym, static_cast<int>(parse_integer(z, "elements")),
                        parse_double(radius, "elements"),
                        static_cast<int>(parse_integer(valence, "elements")) });
    }

    const auto integer = [&](const char *key) {
      return static_cast<int>(parse_integer(ckpt.get(key), key));
    };
    const auto real = [&](const char *key) {
      return parse_double(ckpt.get(key), key);
    };
    ModelConfig cfg;
    cfg.encoder.width = integer("encoder.width");
    cfg.encoder.mlp_width = integer("encoder.mlp_width");
    cfg.encoder.layers = integer("encoder.layers");
    cfg.encoder.cutoff = real("encoder.cutoff");
    cfg.encoder.rbf_count = integer("encoder.rbf_count");
    cfg.encoder.rbf_max = real("encoder.rbf_max");
    cfg.encoder.rbf_width = real("encoder.rbf_width");
    cfg.encoder.bfactor_gating = integer("encoder.bfactor_gating") != 0;
    cfg.type_layers = integer("flow.type_layers");
    cfg.coord_layers = integer("flow.coord_layers");
    cfg.scale_floor = real("flow.scale_floor");

    Model m(ElementTable(std::move(kinds)), cfg);
    if (!m.params_.same_layout(ckpt.params))
      throw ParseError("checkpoint parameter layout does not match its "
                       "metadata");
    m.params_.values() = ckpt.params.values();
    return m;
  }

  void save(const std::filesystem::path &path) const {
    write_file_atomic(path, to_checkpoint().serialize());
  }

  static Model load(const std::filesystem::path &path) {
    std::ifstream ifs(path);
    if (!ifs)
      throw InputError("cannot open checkpoint " + path.string());
    return from_checkpoint(Checkpoint::parse(ifs));
  }

private:
  ElementTable elements_;
  ModelConfig config_;
  ParameterSet params_;
  ContextEncoder encoder_;
  ConditionalFlow type_flow_;
  ConditionalFlow coord_flow_;
};

} // namespace pocketflow
