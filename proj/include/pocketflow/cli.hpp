//
// PocketFlow - Copyright 2026 The PocketFlow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pocketflow/pocketflow.hpp"

namespace pocketflow::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsage = 1,
  kDataError = 2,
  kNumericFailure = 3,
};

namespace fs = std::filesystem;

/// Config from `--config`, else $POCKETFLOW_CONFIG, else built-in defaults;
/// `--seed` overrides the configured seed.
inline RunConfig load_config(const std::string &path,
                             std::optional<std::uint64_t> seed) {
  std::string source = path;
  if (source.empty())
    if (const char *env = std::getenv("POCKETFLOW_CONFIG"); env && *env)
      source = env;
  RunConfig cfg;
  if (!source.empty()) {
    std::ifstream ifs(source);
    if (!ifs)
      throw ConfigError("cannot open config " + source);
    cfg = RunConfig::parse(ifs);
  }
  if (seed)
    cfg.seed = *seed;
  return cfg;
}

/// Pocket from a structure file: the binding site around the configured
/// ligand residue when present, otherwise every ATOM record.
inline Pocket load_pocket(const RunConfig &cfg, const ElementTable &table,
                          const std::string &path) {
  const auto records = read_pdb_file(path);
  const bool has_ligand =
      std::any_of(records.begin(), records.end(), [&](const auto &r) {
        return r.kind == RecordKind::kHetatm
               && r.residue() == cfg.ligand_residue;
      });
  Pocket pocket =
      has_ligand ? split_pocket_ligand(table, records, cfg.ligand_residue,
                                       cfg.pocket_cutoff)
                       .pocket
                 : pocket_from_records(table, records);
  if (pocket.empty())
    throw DataError("no pocket atoms in " + path);
  return pocket;
}

/// Ligand-like molecule from an .xyz or .pdb file (HETATM records other than
/// water; ATOM records if there are none).
inline Molecule load_molecule(const ElementTable &table,
                              const fs::path &path) {
  if (path.extension() == ".xyz") {
    std::istringstream is(read_text_file(path));
    return parse_xyz(table, is);
  }
  const auto records = read_pdb_file(path.string());
  Molecule mol;
  for (const auto &r: records)
    if (r.kind == RecordKind::kHetatm && r.residue() != "HOH")
      mol.atoms.push_back({ table.index_of(r.element), r.position });
  if (mol.empty())
    for (const auto &r: records)
      mol.atoms.push_back({ table.index_of(r.element), r.position });
  return mol;
}

inline int cmd_ingest(const RunConfig &cfg, const std::string &manifest_path,
                      const std::string &out_path, std::ostream &out,
                      std::ostream &err) {
  const auto table = cfg.elements();
  std::ifstream ifs(manifest_path);
  if (!ifs)
    throw InputError("cannot open manifest " + manifest_path);
  const auto manifest =
      parse_manifest(ifs, fs::path(manifest_path).parent_path());
  if (manifest.empty())
    throw InputError("manifest " + manifest_path + " has no entries");

  std::vector<ComplexEntry> entries;
  for (const auto &m: manifest) {
    try {
      entries.push_back(split_pocket_ligand(table, read_pdb_file(m.path),
                                            m.ligand_residue,
                                            cfg.pocket_cutoff, m.entry_id));
      out << m.entry_id << "\tok\tpocket=" << entries.back().pocket.size()
          << "\tligand=" << entries.back().ligand.size() << '\n';
    } catch (const Error &e) {
      err << "warning: " << m.entry_id << " skipped: " << e.what() << '\n';
      out << m.entry_id << "\tskipped\n";
    }
  }
  if (entries.empty()) {
    err << "error: every manifest entry failed\n";
    return kDataError;
  }
  write_file_atomic(out_path, serialize_dataset(table, entries));
  out << "wrote " << entries.size() << " of " << manifest.size()
      << " entries to " << out_path << '\n';
  return kSuccess;
}

inline int cmd_train(const RunConfig &cfg, const std::string &dataset_path,
                     const std::string &ckpt_path, std::string log_path,
                     std::ostream &out, std::ostream &err) {
  const auto table = cfg.elements();
  const auto dataset = read_dataset_file(table, dataset_path);
  if (dataset.empty())
    throw InputError("dataset " + dataset_path + " has no entries");
  if (log_path.empty())
    log_path = ckpt_path + ".log";

  Model model = Model::create(table, cfg.model(), cfg.seed);
  const auto result = train(model, dataset, cfg.trainer());

  std::string log;
  for (size_t i = 0; i < result.history.size(); ++i)
    log += std::to_string(i + 1) + "\t" + format_double(result.history[i])
           + "\n";
  write_file_atomic(log_path, log);

  if (result.diverged) {
    err << "error: training diverged at " << result.failure << '\n';
    return kNumericFailure;
  }
  model.save(ckpt_path);
  if (result.history.empty())
    out << "no epochs run; wrote initial parameters to " << ckpt_path << '\n';
  else
    out << "final mean NLL " << format_double(result.history.back())
        << " (epoch 1: " << format_double(result.history.front()) << ")\n";
  return kSuccess;
}

inline int cmd_generate(const RunConfig &cfg, const std::string &ckpt_path,
                        const std::string &pocket_path, int count,
                        const std::string &out_dir, std::ostream &out) {
  if (count < 1)
    throw ConfigError("--count must be at least 1");
  const Model model = Model::load(ckpt_path);
  const Pocket pocket = load_pocket(cfg, model.elements(), pocket_path);
  const GenConfig gen = cfg.generator();

  fs::create_directories(out_dir);
  std::mt19937_64 rng(cfg.seed);
  for (int i = 0; i < count; ++i) {
    const Molecule mol = generate_ligand(model, pocket, gen, rng);
    char stem[32];
    std::snprintf(stem, sizeof(stem), "mol_%03d", i);
    const fs::path base = fs::path(out_dir) / stem;
    write_file_atomic(fs::path(base).replace_extension(".xyz"),
                      format_xyz(model.elements(), mol,
                                 std::string(stem) + " seed="
                                     + std::to_string(cfg.seed)));
    write_file_atomic(
        fs::path(base).replace_extension(".pdb"),
        serialize_pdb(molecule_to_records(model.elements(), mol)) + "END\n");
    out << stem << "\tatoms=" << mol.size() << '\n';
  }
  return kSuccess;
}

inline int cmd_evaluate(const RunConfig &cfg, const std::string &mol_dir,
                        const std::string &pocket_path,
                        const std::string &reference_path,
                        const std::string &out_path, bool json,
                        std::ostream &out) {
  const auto table = cfg.elements();
  if (!fs::is_directory(mol_dir))
    throw InputError(mol_dir + " is not a directory");

  // XYZ files take precedence so a generate output directory (which holds
  // both formats) is not counted twice.
  std::vector<fs::path> files;
  for (const char *ext: { ".xyz", ".pdb" }) {
    for (const auto &e: fs::directory_iterator(mol_dir))
      if (e.is_regular_file() && e.path().extension() == ext)
        files.push_back(e.path());
    if (!files.empty())
      break;
  }
  if (files.empty())
    throw InputError("no .xyz or .pdb molecules in " + mol_dir);
  std::sort(files.begin(), files.end());

  std::vector<NamedMolecule> molecules;
  for (const auto &f: files)
    molecules.push_back({ f.stem().string(), load_molecule(table, f) });

  const Pocket pocket = load_pocket(cfg, table, pocket_path);
  std::optional<Molecule> reference;
  if (!reference_path.empty())
    reference = load_molecule(table, reference_path);

  const auto report = evaluate_set(table, molecules, pocket, reference,
                                   cfg.affinity(), cfg.evaluation());
  const std::string text = json ? report_to_json(report).dump(2) + "\n"
                                : format_report_tsv(report);
  if (out_path.empty() || out_path == "-")
    out << text;
  else
    write_file_atomic(out_path, text);

  const auto tsv = format_report_tsv(report);
  out << tsv.substr(tsv.rfind("aggregate"));
  return kSuccess;
}

/// Writes the synthetic training complexes as PDB files plus a manifest.
inline int cmd_toy_data(const RunConfig &cfg, const std::string &out_dir,
                        int copies, double noise, std::ostream &out) {
  const auto table = cfg.elements();
  const auto entries = make_toy_dataset(table, copies, noise, cfg.seed);
  fs::create_directories(out_dir);
  std::string manifest;
  for (const auto &e: entries) {
    std::vector<StructureRecord> records;
    for (int j = 0; j < e.pocket.size(); ++j) {
      StructureRecord r;
      r.kind = RecordKind::kAtom;
      r.serial = j + 1;
      r.element = table[e.pocket.atoms[j].element].symbol;
      r.atom_name = conventional_atom_name(r.element, j + 1);
      r.residue_name = "GLY";
      r.chain = 'A';
      r.residue_seq = j + 1;
      r.position = e.pocket.atoms[j].position;
      r.bfactor = e.pocket.bfactors[j];
      records.push_back(r);
    }
    for (auto r: molecule_to_records(table, e.ligand, cfg.ligand_residue)) {
      r.serial += e.pocket.size();
      records.push_back(r);
    }
    write_file_atomic(fs::path(out_dir) / (e.entry_id + ".pdb"),
                      serialize_pdb(records) + "END\n");
    manifest += e.entry_id + "\t" + e.entry_id + ".pdb\t"
                + cfg.ligand_residue + "\n";
  }
  write_file_atomic(fs::path(out_dir) / "manifest.tsv", manifest);
  out << "wrote " << entries.size() << " complexes to " << out_dir << '\n';
  return kSuccess;
}

/// Parses `args` (without the program name) and runs one subcommand.
inline int run(std::vector<std::string> args, std::ostream &out,
               std::ostream &err) {
  CLI::App app { "Pocket-conditioned autoregressive flow for ligand "
                 "generation" };
  app.name("pocketflow");
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_path,
                 "key = value config file (fallback: $POCKETFLOW_CONFIG)");
  app.add_option("--seed", seed, "random seed (overrides the config)");

  std::string out_path;
  auto *ingest = app.add_subcommand("ingest", "split complexes into a dataset");
  std::string manifest;
  ingest->add_option("manifest", manifest, "entry_id<TAB>path<TAB>residue")
      ->required();
  ingest->add_option("--out", out_path, "dataset archive")->required();

  auto *train_cmd = app.add_subcommand("train", "fit encoder and flows");
  std::string dataset, log_path;
  std::optional<int> epochs;
  train_cmd->add_option("dataset", dataset, "dataset archive")->required();
  train_cmd->add_option("--out", out_path, "checkpoint path")->required();
  train_cmd->add_option("--log", log_path,
                        "loss log (default: <checkpoint>.log)");
  train_cmd->add_option("--epochs", epochs, "override trainer.epochs");

  auto *gen = app.add_subcommand("generate", "sample ligands for a pocket");
  std::string checkpoint, pocket;
  int count = 1;
  gen->add_option("checkpoint", checkpoint)->required();
  gen->add_option("pocket", pocket, "PDB file of the pocket or complex")
      ->required();
  gen->add_option("--count", count, "number of molecules");
  gen->add_option("--out", out_path, "output directory")->required();

  auto *eval = app.add_subcommand("evaluate", "score a set of molecules");
  std::string mol_dir, reference;
  bool json = false;
  eval->add_option("molecules", mol_dir, "directory of .xyz or .pdb files")
      ->required();
  eval->add_option("pocket", pocket, "PDB file of the pocket or complex")
      ->required();
  eval->add_option("--reference", reference, "reference ligand for RMSD");
  eval->add_option("--out", out_path, "report path ('-' for stdout)");
  eval->add_flag("--json", json, "structured report instead of TSV");

  auto *toy = app.add_subcommand("toy-data", "write the synthetic complexes");
  int copies = 50;
  double noise = 0.1;
  toy->add_option("--out", out_path, "output directory")->required();
  toy->add_option("--copies", copies, "number of noisy copies");
  toy->add_option("--noise", noise, "ligand coordinate noise in A");

  // The vector overload of CLI::App::parse consumes arguments from the back.
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError &e) {
    return e.get_exit_code() == 0 ? (out << app.help(), kSuccess)
                                  : (err << "error: " << e.what() << '\n'
                                         << app.help(),
                                     kUsage);
  }

  try {
    RunConfig cfg = load_config(config_path, seed);
    if (*ingest)
      return cmd_ingest(cfg, manifest, out_path, out, err);
    if (*train_cmd) {
      if (epochs) {
        cfg.epochs = *epochs;
        cfg.validate();
      }
      return cmd_train(cfg, dataset, out_path, log_path, out, err);
    }
    if (*gen)
      return cmd_generate(cfg, checkpoint, pocket, count, out_path, out);
    if (*eval)
      return cmd_evaluate(cfg, mol_dir, pocket, reference, out_path, json,
                          out);
    if (*toy)
      return cmd_toy_data(cfg, out_path, copies, noise, out);
  } catch (const Error &e) {
    err << "error: " << e.what() << '\n';
    switch (e.category()) {
    case Error::Category::kUsage:
      return kUsage;
    case Error::Category::kNumeric:
      return kNumericFailure;
    case Error::Category::kData:
      return kDataError;
    }
  } catch (const fs::filesystem_error &e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kUsage;
}

} // namespace pocketflow::cli
