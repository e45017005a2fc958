//
// PocketFlow - Copyright 2026 The PocketFlow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <istream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pocketflow/errors.hpp"
#include "pocketflow/io.hpp"

namespace pocketflow {

using RowMajorMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMajorMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMajorMatrix>;

struct ParamBlock {
  std::string name;
  int rows;
  int cols;
  Eigen::Index offset;

  Eigen::Index size() const { return Eigen::Index(rows) * cols; }
};

/// All learnable weights of a model in one flat vector, partitioned into named
/// row-major blocks. Gradients share the layout: block views can be taken on
/// any vector of size().
class ParameterSet {
public:
  int add(std::string name, int rows, int cols) {
    if (rows <= 0 || cols <= 0)
      throw ShapeError("parameter block " + name + " has empty shape");
    for (const auto &b: blocks_)
      if (b.name == name)
        throw ShapeError("duplicate parameter block " + name);
    blocks_.push_back({ std::move(name), rows, cols, values_.size() });
    values_.conservativeResize(values_.size() + blocks_.back().size());
    values_.tail(blocks_.back().size()).setZero();
    return static_cast<int>(blocks_.size()) - 1;
  }

  Eigen::Index size() const { return values_.size(); }
  const std::vector<ParamBlock> &blocks() const { return blocks_; }
  const ParamBlock &block(int idx) const { return blocks_.at(idx); }

  int find(const std::string &name) const {
    for (size_t i = 0; i < blocks_.size(); ++i)
      if (blocks_[i].name == name)
        return static_cast<int>(i);
    return -1;
  }

  Eigen::VectorXd &values() { return values_; }
  const Eigen::VectorXd &values() const { return values_; }

  MatrixMap operator[](int idx) { return view(values_, idx); }
  ConstMatrixMap operator[](int idx) const { return view(values_, idx); }

  MatrixMap view(Eigen::VectorXd &flat, int idx) const {
    check_flat(flat);
    const auto &b = blocks_.at(idx);
    return MatrixMap(flat.data() + b.offset, b.rows, b.cols);
  }

  ConstMatrixMap view(const Eigen::VectorXd &flat, int idx) const {
    check_flat(flat);
    const auto &b = blocks_.at(idx);
    return ConstMatrixMap(flat.data() + b.offset, b.rows, b.cols);
  }

  bool same_layout(const ParameterSet &other) const {
    if (blocks_.size() != other.blocks_.size())
      return false;
    for (size_t i = 0; i < blocks_.size(); ++i) {
      const auto &a = blocks_[i], &b = other.blocks_[i];
      if (a.name != b.name || a.rows != b.rows || a.cols != b.cols)
        return false;
    }
    return true;
  }

  template <class URBG>
  void fill_uniform(int idx, double lo, double hi, URBG &rng) {
    std::uniform_real_distribution<double> dist(lo, hi);
    auto m = (*this)[idx];
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c)
        m(r, c) = dist(rng);
  }

private:
  void check_flat(const Eigen::VectorXd &flat) const {
    if (flat.size() != values_.size())
      throw ShapeError("flat vector of size " + std::to_string(flat.size())
                       + " does not match parameter count "
                       + std::to_string(values_.size()));
  }

  std::vector<ParamBlock> blocks_;
  Eigen::VectorXd values_;
};

/// Checkpoint container: ordered metadata plus every parameter block.
///
///   pocketflow-checkpoint 1
///   meta <key> <value>
///   section <name> <rows> <cols>
///   <one line per row, space separated>
///   end
struct Checkpoint {
  static constexpr int kVersion = 1;

  std::vector<std::pair<std::string, std::string>> meta;
  ParameterSet params;

  const std::string &get(const std::string &key) const {
    for (const auto &[k, v]: meta)
      if (k == key)
        return v;
    throw ParseError("checkpoint missing meta key '" + key + "'");
  }

  std::string serialize() const {
    std::ostringstream os;
    os << "pocketflow-checkpoint " << kVersion << '\n';
    for (const auto &[k, v]: meta)
      os << "meta " << k << ' ' << v << '\n';
    for (int i = 0; i < static_cast<int>(params.blocks().size()); ++i) {
      const auto &b = params.block(i);
      os << "section " << b.name << ' ' << b.rows << ' ' << b.cols << '\n';
      const auto m = params[i];
      for (int r = 0; r < b.rows; ++r) {
        for (int c = 0; c < b.cols; ++c)
          os << (c ? " " : "") << format_double(m(r, c));
        os << '\n';
      }
    }
    os << "end\n";
    return os.str();
  }

  static Checkpoint parse(std::istream &is) {
    Checkpoint ckpt;
    std::string line, tag;
    if (!std::getline(is, line))
      throw ParseError("empty checkpoint");
    {
      std::istringstream ls(line);
      int version = 0;
      if (!(ls >> tag >> version) || tag != "pocketflow-checkpoint")
        throw ParseError("not a pocketflow checkpoint");
      if (version != kVersion)
        throw ParseError("unsupported checkpoint version "
                         + std::to_string(version));
    }

    bool ended = false;
    while (!ended && std::getline(is, line)) {
      std::istringstream ls(line);
      if (!(ls >> tag))
        continue;
      if (tag == "end") {
        ended = true;
      } else if (tag == "meta") {
        std::string key, value;
        ls >> key;
        std::getline(ls >> std::ws, value);
        ckpt.meta.emplace_back(key, value);
      } else if (tag == "section") {
        std::string name;
        int rows = 0, cols = 0;
        if (!(ls >> name >> rows >> cols))
          throw ParseError("malformed section header: " + line);
        const int idx = ckpt.params.add(name, rows, cols);
        auto m = ckpt.params[idx];
        for (int r = 0; r < rows; ++r) {
          if (!std::getline(is, line))
            throw ParseError("truncated section " + name);
          std::istringstream rs(line);
          std::string tok;
          for (int c = 0; c < cols; ++c) {
            if (!(rs >> tok))
              throw ParseError("short row in section " + name);
            m(r, c) = parse_double(tok, "section " + name);
          }
        }
      } else {
        throw ParseError("unexpected checkpoint line: " + line);
      }
    }
    if (!ended)
      throw ParseError("checkpoint is missing its end marker");
    return ckpt;
  }
};

} // namespace pocketflow
