//
// PocketFlow - Copyright 2026 The PocketFlow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pocketflow/chem_core.hpp"
#include "pocketflow/errors.hpp"
#include "pocketflow/geometry.hpp"
#include "pocketflow/io.hpp"

namespace pocketflow {

inline bool is_polar(const ElementKind &kind) {
  return kind.symbol == "N" || kind.symbol == "O" || kind.symbol == "S"
         || kind.symbol == "P";
}

struct ContactCounts {
  int polar_polar = 0;
  int polar_apolar = 0;
  int apolar_apolar = 0;

  int total() const { return polar_polar + polar_apolar + apolar_apolar; }
};

/// Pocket-ligand atom pairs within `cutoff`, by polarity of the two atoms.
inline ContactCounts count_contacts(const ElementTable &table,
                                    const Pocket &pocket,
                                    const std::vector<Atom> &ligand,
                                    double cutoff = 5.5) {
  ContactCounts c;
  for (const auto &p: pocket.atoms) {
    const bool pp = is_polar(table[p.element]);
    for (const auto &l: ligand) {
      if ((p.position - l.position).norm() > cutoff)
        continue;
      const bool lp = is_polar(table[l.element]);
      if (pp && lp)
        ++c.polar_polar;
      else if (pp || lp)
        ++c.polar_apolar;
      else
        ++c.apolar_apolar;
    }
  }
  return c;
}

/// Linear contact model for binding free energy. The default coefficients
/// are configuration, not fitted values.
struct AffinityModel {
  double w_polar_polar = -0.09;   // kcal/mol per contact
  double w_polar_apolar = -0.04;
  double w_apolar_apolar = -0.02;
  double intercept = -2.0;        // kcal/mol
  double temperature = 298.15;    // K
  double gas_constant = 1.9872e-3; // kcal/(mol K)

  double rt() const { return gas_constant * temperature; }
};

inline double predict_dg(const ContactCounts &c, const AffinityModel &m) {
  return m.intercept + m.w_polar_polar * c.polar_polar
         + m.w_polar_apolar * c.polar_apolar
         + m.w_apolar_apolar * c.apolar_apolar;
}

struct Dissociation {
  double kd;  // M
  double pkd;
};

/// K_d from dG = RT ln K_d.
inline Dissociation dg_to_kd(double dg, const AffinityModel &m) {
  if (!(m.temperature > 0) || !(m.gas_constant > 0))
    throw ConfigError("temperature and gas constant must be positive");
  const double exponent = dg / m.rt();
  if (!(std::abs(exponent) <= 700))
    throw RangeError("dG/RT = " + std::to_string(exponent)
                     + " overflows the K_d conversion");
  return { std::exp(exponent), -exponent / std::log(10.0) };
}

inline double kd_to_dg(double kd, const AffinityModel &m) {
  return m.rt() * std::log(kd);
}

struct NamedMolecule {
  std::string id;
  Molecule molecule;
};

struct EvalRow {
  std::string id;
  bool valid = false;
  std::vector<std::pair<int, std::string>> violations;
  std::optional<double> rmsd;
  ContactCounts contacts;
  double dg = 0;
  double kd = 0;
  double pkd = 0;
};

struct EvalReport {
  std::vector<EvalRow> rows;
  double validity_fraction = 0;
  std::optional<double> mean_pkd_valid;
};

struct EvalOptions {
  double contact_cutoff = 5.5;
  BondRules rules;
};

/// Validity, optional RMSD against a reference with the same atom count, and
/// contact-based affinity for each molecule. Per-molecule problems are
/// recorded in the row; nothing is thrown for them.
inline EvalReport evaluate_set(const ElementTable &table,
                               const std::vector<NamedMolecule> &molecules,
                               const Pocket &pocket,
                               const std::optional<Molecule> &reference,
                               const AffinityModel &model,
                               const EvalOptions &opts = {}) {
  if (molecules.empty())
    throw InputError("nothing to evaluate");

  EvalReport report;
  int n_valid = 0;
  double pkd_sum = 0;
  for (const auto &nm: molecules) {
    EvalRow row;
    row.id = nm.id;
    Molecule mol = nm.molecule;
    if (mol.bonds.empty() && !mol.empty())
      mol.bonds = perceive_bonds(table, mol.atoms, opts.rules).bonds;
    const auto validity = check_validity(table, mol, opts.rules);
    row.valid = validity.valid;
    row.violations = validity.violations;
    if (reference && reference->size() == mol.size() && !mol.empty())
      row.rmsd = rmsd(*reference, mol);

    row.contacts =
        count_contacts(table, pocket, mol.atoms, opts.contact_cutoff);
    row.dg = predict_dg(row.contacts, model);
    try {
      const auto kd = dg_to_kd(row.dg, model);
      row.kd = kd.kd;
      row.pkd = kd.pkd;
    } catch (const RangeError &e) {
      row.kd = row.pkd = std::nan("");
      row.violations.emplace_back(-1, e.what());
    }
    if (row.valid) {
      ++n_valid;
      pkd_sum += row.pkd;
    }
    report.rows.push_back(std::move(row));
  }
  report.validity_fraction =
      static_cast<double>(n_valid) / static_cast<double>(molecules.size());
  if (n_valid > 0)
    report.mean_pkd_valid = pkd_sum / n_valid;
  return report;
}

namespace internal {
  inline std::string fixed(double v, int digits) {
    if (std::isnan(v))
      return "NA";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
  }

  inline std::string sci(double v) {
    if (std::isnan(v))
      return "NA";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6e", v);
    return buf;
  }
} // namespace internal

/// One tab-separated line per molecule plus an `aggregate` footer.
inline std::string format_report_tsv(const EvalReport &r) {
  std::string out = "id\tvalid\trmsd\tdG_kcal_mol\tKd_M\tpKd\n";
  for (const auto &row: r.rows) {
    out += row.id + "\t" + (row.valid ? "1" : "0") + "\t"
           + (row.rmsd ? internal::fixed(*row.rmsd, 4) : "NA") + "\t"
           + internal::fixed(row.dg, 4) + "\t" + internal::sci(row.kd) + "\t"
           + internal::fixed(row.pkd, 4) + "\n";
  }
  out += "aggregate\tn=" + std::to_string(r.rows.size()) + "\tvalidity="
         + internal::fixed(r.validity_fraction, 4) + "\tmean_pKd_valid="
         + (r.mean_pkd_valid ? internal::fixed(*r.mean_pkd_valid, 4) : "NA")
         + "\n";
  return out;
}

inline nlohmann::json report_to_json(const EvalReport &r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto &row: r.rows) {
    nlohmann::json violations = nlohmann::json::array();
    for (const auto &[atom, reason]: row.violations)
      violations.push_back({ { "atom", atom }, { "reason", reason } });
    rows.push_back({
        { "id", row.id },
        { "valid", row.valid },
        { "rmsd", row.rmsd ? nlohmann::json(*row.rmsd) : nlohmann::json() },
        { "contacts",
          { { "polar_polar", row.contacts.polar_polar },
            { "polar_apolar", row.contacts.polar_apolar },
            { "apolar_apolar", row.contacts.apolar_apolar } } },
        { "dG_kcal_mol", row.dg },
        { "Kd_M", std::isnan(row.kd) ? nlohmann::json() : nlohmann::json(row.kd) },
        { "pKd", std::isnan(row.pkd) ? nlohmann::json() : nlohmann::json(row.pkd) },
        { "violations", violations },
    });
  }
  return {
    { "molecules", rows },
    { "aggregate",
      { { "count", r.rows.size() },
        { "validity_fraction", r.validity_fraction },
        { "mean_pKd_valid", r.mean_pkd_valid ? nlohmann::json(*r.mean_pkd_valid)
                                             : nlohmann::json() } } },
  };
}

} // namespace pocketflow
