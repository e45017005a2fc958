//
// PocketFlow - Copyright 2026 The PocketFlow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <istream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "pocketflow/chem_core.hpp"
#include "pocketflow/errors.hpp"
#include "pocketflow/evaluator.hpp"
#include "pocketflow/generator.hpp"
#include "pocketflow/io.hpp"
#include "pocketflow/model.hpp"
#include "pocketflow/pdb.hpp"
#include "pocketflow/trainer.hpp"

namespace pocketflow {

/// Every tunable of a run. Serialized as
///
///   [section]
///   key = value
///
/// with `#` comments. Unknown sections or keys are rejected.
struct RunConfig {
  // [chem]
  std::string elements_file;
  double bond_tolerance = 0.45;
  double clash_factor = 0.4;
  // [pdb]
  std::string ligand_residue = "LIG";
  double pocket_cutoff = 10.0;
  // [encoder]
  int hidden_width = 32;
  int mlp_width = 64;
  int layers = 2;
  double graph_cutoff = 6.0;
  int rbf_count = 16;
  double rbf_max = 8.0;
  double rbf_width = 0.0;
  bool bfactor_gating = false;
  double encoder_init_scale = 0.1;
  // [flow]
  int type_layers = 6;
  int coord_layers = 6;
  double scale_floor = 1e-4;
  double flow_init_scale = 0.1;
  // [generator]
  int max_atoms = 24;
  bool valence_constrained = true;
  int clash_retries = 10;
  // [trainer]
  int epochs = 200;
  double learning_rate = 1e-3;
  int batch_size = 0;
  double dequant_alpha = 0.25;
  // [evaluator]
  double contact_cutoff = 5.5;
  double w_polar_polar = -0.09;
  double w_polar_apolar = -0.04;
  double w_apolar_apolar = -0.02;
  double intercept = -2.0;
  double temperature = 298.15;
  double gas_constant = 1.9872e-3;
  // [run]
  std::uint64_t seed = 0;

  using Member =
      std::variant<std::string RunConfig::*, double RunConfig::*,
                   int RunConfig::*, bool RunConfig::*,
                   std::uint64_t RunConfig::*>;
  struct Field {
    const char *section;
    const char *key;
    Member member;
  };

  static const std::vector<Field> &fields() {
    static const std::vector<Field> f = {
      { "chem", "elements_file", &RunConfig::elements_file },
      { "chem", "bond_tolerance", &RunConfig::bond_tolerance },
      { "chem", "clash_factor", &RunConfig::clash_factor },
      { "pdb", "ligand_residue", &RunConfig::ligand_residue },
      { "pdb", "pocket_cutoff", &RunConfig::pocket_cutoff },
      { "encoder", "hidden_width", &RunConfig::hidden_width },
      { "encoder", "mlp_width", &RunConfig::mlp_width },
      { "encoder", "layers", &RunConfig::layers },
      { "encoder", "graph_cutoff", &RunConfig::graph_cutoff },
      { "encoder", "rbf_count", &RunConfig::rbf_count },
      { "encoder", "rbf_max", &RunConfig::rbf_max },
      { "encoder", "rbf_width", &RunConfig::rbf_width },
      { "encoder", "bfactor_gating", &RunConfig::bfactor_gating },
      { "encoder", "init_scale", &RunConfig::encoder_init_scale },
      { "flow", "type_layers", &RunConfig::type_layers },
      { "flow", "coord_layers", &RunConfig::coord_layers },
      { "flow", "scale_floor", &RunConfig::scale_floor },
      { "flow", "init_scale", &RunConfig::flow_init_scale },
      { "generator", "max_atoms", &RunConfig::max_atoms },
      { "generator", "valence_constrained", &RunConfig::valence_constrained },
      { "generator", "clash_retries", &RunConfig::clash_retries },
      { "trainer", "epochs", &RunConfig::epochs },
      { "trainer", "learning_rate", &RunConfig::learning_rate },
      { "trainer", "batch_size", &RunConfig::batch_size },
      { "trainer", "dequant_alpha", &RunConfig::dequant_alpha },
      { "evaluator", "contact_cutoff", &RunConfig::contact_cutoff },
      { "evaluator", "w_polar_polar", &RunConfig::w_polar_polar },
      { "evaluator", "w_polar_apolar", &RunConfig::w_polar_apolar },
      { "evaluator", "w_apolar_apolar", &RunConfig::w_apolar_apolar },
      { "evaluator", "intercept", &RunConfig::intercept },
      { "evaluator", "temperature", &RunConfig::temperature },
      { "evaluator", "gas_constant", &RunConfig::gas_constant },
      { "run", "seed", &RunConfig::seed },
    };
    return f;
  }

  void validate() const {
    auto require = [](bool ok, const char *what) {
      if (!ok)
        throw ConfigError(std::string("config: ") + what);
    };
    require(bond_tolerance >= 0, "chem.bond_tolerance must be >= 0");
    require(clash_factor > 0 && clash_factor < 1,
            "chem.clash_factor must lie in (0, 1)");
    require(!ligand_residue.empty(), "pdb.ligand_residue must be set");
    require(pocket_cutoff > 0, "pdb.pocket_cutoff must be > 0");
    require(hidden_width >= 1 && mlp_width >= 1,
            "encoder widths must be >= 1");
    require(layers >= 1, "encoder.layers must be >= 1");
    require(graph_cutoff > 0, "encoder.graph_cutoff must be > 0");
    require(rbf_count >= 2 && rbf_max > 0,
            "encoder.rbf_count must be >= 2 and rbf_max > 0");
    require(rbf_width >= 0, "encoder.rbf_width must be >= 0");
    require(encoder_init_scale >= 0 && flow_init_scale >= 0,
            "init scales must be >= 0");
    require(type_layers >= 1 && coord_layers >= 1,
            "flow layer counts must be >= 1");
    require(scale_floor > 0, "flow.scale_floor must be > 0");
    require(max_atoms >= 1, "generator.max_atoms must be >= 1");
    require(clash_retries >= 0, "generator.clash_retries must be >= 0");
    require(epochs >= 0, "trainer.epochs must be >= 0");
    require(learning_rate >= 0, "trainer.learning_rate must be >= 0");
    require(batch_size >= 0, "trainer.batch_size must be >= 0");
    require(dequant_alpha > 0 && dequant_alpha <= 0.5,
            "trainer.dequant_alpha must lie in (0, 0.5]");
    require(contact_cutoff > 0, "evaluator.contact_cutoff must be > 0");
    require(temperature > 0 && gas_constant > 0,
            "evaluator temperature and gas constant must be > 0");
  }

  std::string serialize() const {
    std::ostringstream os;
    const char *section = "";
    for (const auto &f: fields()) {
      if (std::string_view(section) != f.section) {
        os << (*section ? "\n" : "") << '[' << f.section << "]\n";
        section = f.section;
      }
      os << f.key << " = "
         << std::visit(
                [this](auto ptr) -> std::string {
                  using T = std::remove_cvref_t<decltype(this->*ptr)>;
                  const auto &v = this->*ptr;
                  if constexpr (std::is_same_v<T, std::string>)
                    return v;
                  else if constexpr (std::is_same_v<T, bool>)
                    return v ? "true" : "false";
                  else if constexpr (std::is_same_v<T, double>)
                    return format_double(v);
                  else
                    return std::to_string(v);
                },
                f.member)
         << '\n';
    }
    return os.str();
  }

  static RunConfig parse(std::istream &is) {
    RunConfig cfg;
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      if (auto hash = line.find('#'); hash != std::string::npos)
        line.erase(hash);
      const std::string_view text = internal::trim(line);
      if (text.empty())
        continue;
      const std::string where = "config line " + std::to_string(lineno);
      if (text.front() == '[') {
        if (text.back() != ']')
          throw ConfigError(where + ": malformed section header");
        section = std::string(internal::trim(text.substr(1, text.size() - 2)));
        continue;
      }
      const auto eq = text.find('=');
      if (eq == std::string_view::npos)
        throw ConfigError(where + ": expected key = value");
      const std::string key(internal::trim(text.substr(0, eq)));
      const std::string value(internal::trim(text.substr(eq + 1)));

      const Field *field = nullptr;
      for (const auto &f: fields())
        if (section == f.section && key == f.key)
          field = &f;
      if (field == nullptr)
        throw ConfigError(where + ": unknown key '"
                          + (section.empty() ? key : section + "." + key)
                          + "'");
      try {
        std::visit(
            [&](auto ptr) {
              using T = std::remove_cvref_t<decltype(cfg.*ptr)>;
              if constexpr (std::is_same_v<T, std::string>) {
                cfg.*ptr = value;
              } else if constexpr (std::is_same_v<T, bool>) {
                if (value == "true" || value == "1")
                  cfg.*ptr = true;
                else if (value == "false" || value == "0")
                  cfg.*ptr = false;
                else
                  throw ParseError("expected true or false");
              } else if constexpr (std::is_same_v<T, double>) {
                cfg.*ptr = parse_double(value, key);
              } else if constexpr (std::is_same_v<T, std::uint64_t>) {
                std::uint64_t v = 0;
                const char *end = value.data() + value.size();
                auto [p, ec] = std::from_chars(value.data(), end, v);
                if (value.empty() || ec != std::errc() || p != end)
                  throw ParseError("expected an unsigned integer");
                cfg.*ptr = v;
              } else {
                cfg.*ptr = static_cast<int>(parse_integer(value, key));
              }
            },
            field->member);
      } catch (const ParseError &e) {
        throw ConfigError(where + ": bad value for " + key + ": " + e.what());
      }
    }
    cfg.validate();
    return cfg;
  }

  static RunConfig parse(const std::string &text) {
    std::istringstream is(text);
    return parse(is);
  }

  ElementTable elements() const {
    return elements_file.empty() ? ElementTable::standard()
                                 : ElementTable::load(elements_file);
  }

  BondRules bond_rules() const { return { bond_tolerance, clash_factor }; }

  ModelConfig model() const {
    ModelConfig m;
    m.encoder.width = hidden_width;
    m.encoder.mlp_width = mlp_width;
    m.encoder.layers = layers;
    m.encoder.cutoff = graph_cutoff;
    m.encoder.rbf_count = rbf_count;
    m.encoder.rbf_max = rbf_max;
    m.encoder.rbf_width = rbf_width;
    m.encoder.bfactor_gating = bfactor_gating;
    m.type_layers = type_layers;
    m.coord_layers = coord_layers;
    m.scale_floor = scale_floor;
    m.encoder_init_scale = encoder_init_scale;
    m.flow_init_scale = flow_init_scale;
    return m;
  }

  TrainConfig trainer() const {
    TrainConfig t;
    t.epochs = epochs;
    t.learning_rate = learning_rate;
    t.batch_size = batch_size;
    t.seed = seed;
    t.dequant_alpha = dequant_alpha;
    return t;
  }

  GenConfig generator() const {
    GenConfig g;
    g.max_atoms = max_atoms;
    g.valence_constrained = valence_constrained;
    g.clash_retries = clash_retries;
    g.rules = bond_rules();
    return g;
  }

  AffinityModel affinity() const {
    return { w_polar_polar, w_polar_apolar, w_apolar_apolar,
             intercept,     temperature,    gas_constant };
  }

  EvalOptions evaluation() const { return { contact_cutoff, bond_rules() }; }

  friend bool operator==(const RunConfig &, const RunConfig &) = default;
};

} // namespace pocketflow
