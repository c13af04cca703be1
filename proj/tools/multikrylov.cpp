// Command-line front end: run, pair, ensemble, export, presets, verify.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "multikrylov/cli.hpp"
#include "multikrylov/errors.hpp"
#include "multikrylov/verify.hpp"

namespace fs = std::filesystem;
using namespace multikrylov;
using cli::json;

namespace {

struct Flags {
  std::string config;
  std::optional<int> precision_bits;
  bool long_run = false;
  std::size_t workers = 1;
  std::optional<std::string> output_dir;
  std::optional<std::uint64_t> rng_seed;
  std::optional<std::size_t> count;
  std::string figure;
  std::string output;
  std::vector<std::string> records;
};

cli::Overrides overrides(const Flags& f) {
  cli::Overrides o;
  o.precision_bits = f.precision_bits;
  o.output_dir = f.output_dir;
  o.rng_seed = f.rng_seed;
  o.long_run = f.long_run;
  o.workers = f.workers;
  return o;
}

std::string error_type(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return "ConfigError";
  if (dynamic_cast<const ParameterError*>(&e)) return "ParameterError";
  if (dynamic_cast<const DimensionError*>(&e)) return "DimensionError";
  if (dynamic_cast<const ContractViolation*>(&e)) return "ContractViolation";
  if (dynamic_cast<const PrecisionError*>(&e)) return "PrecisionError";
  if (dynamic_cast<const std::bad_alloc*>(&e)) return "ResourceError";
  return "Error";
}

cli::RunConfig load_run_config(const Flags& f) {
  cli::RunConfig c = cli::config_from_json(cli::read_json(f.config));
  cli::apply_overrides(c, overrides(f));
  c.validate();
  return c;
}

fs::path write_record(const std::string& dir, const std::string& stem, const json& j) {
  const fs::path path = fs::path(dir) / (stem + ".json");
  cli::write_atomic(path, j.dump(2) + "\n");
  return path;
}

void print_run(const cli::RunRecord& r, const fs::path& path) {
  const auto& s = r.value_stats;
  std::cout << r.config.stem() << ": plateau " << s.mean;
  if (s.count > 1) std::cout << " +- " << s.sem << " (" << s.count << " realizations)";
  std::cout << ", max M " << r.max_M;
  if (!r.realizations.empty()) {
    const auto& x = r.realizations.front();
    std::cout << ", normalized " << x.plateau.normalized << ", basis " << x.basis_size << ", bits "
              << x.precision_bits_used;
    if (x.oracle_value) std::cout << ", oracle " << *x.oracle_value;
  }
  std::cout << "\n  record: " << path.string() << "\n";
}

int cmd_run(const Flags& f, bool ensemble, json& echo, std::string& dir, std::string& stem) {
  cli::RunConfig c = load_run_config(f);
  if (ensemble && f.count) c.ensemble.count = *f.count;
  if (!ensemble && c.ensemble.count != 1)
    throw ConfigError("`run` executes one realization; use `ensemble` for count > 1");
  echo = cli::config_to_json(c);
  dir = c.output_dir;
  stem = c.stem();
  const cli::RunRecord r = cli::run(c, f.workers);
  print_run(r, write_record(dir, stem, cli::record_to_json(r)));
  return 0;
}

int cmd_pair(const Flags& f, json& echo, std::string& dir, std::string& stem) {
  const json j = cli::read_json(f.config);
  if (!j.is_object() || !j.contains("integrable") || !j.contains("chaotic"))
    throw ConfigError("pair config needs 'integrable' and 'chaotic' run configs");
  cli::RunConfig a = cli::config_from_json(j.at("integrable"));
  cli::RunConfig b = cli::config_from_json(j.at("chaotic"));
  const std::string tag = j.value("pair_tag", a.pair_tag.empty() ? b.pair_tag : a.pair_tag);
  if (tag.empty()) throw ConfigError("pair config needs a pair_tag");
  a.pair_tag = b.pair_tag = tag;
  cli::apply_overrides(a, overrides(f));
  cli::apply_overrides(b, overrides(f));
  a.validate();
  b.validate();
  echo = {{"pair_tag", tag}, {"integrable", cli::config_to_json(a)}, {"chaotic", cli::config_to_json(b)}};
  dir = a.output_dir;
  stem = "pair_" + tag;
  const cli::PairRecord p = cli::run_pair(a, b, f.workers);
  const fs::path path = write_record(dir, stem, cli::pair_to_json(p));
  std::cout << tag << ": integrable " << p.integrable_normalized << ", chaotic " << p.chaotic_normalized.mean;
  if (p.chaotic_normalized.count > 1) std::cout << " +- " << p.chaotic_normalized.sem;
  std::cout << " (denominator " << p.denominator << "), integrable below chaotic: "
            << (p.integrable_normalized < p.chaotic_normalized.mean ? "yes" : "no") << "\n  record: " << path.string()
            << "\n";
  return 0;
}

int cmd_export(const Flags& f, json& echo, std::string& dir, std::string& stem) {
  echo = {{"figure", f.figure}, {"records", f.records}};
  dir = f.output_dir.value_or("results");
  stem = "export_" + f.figure;
  std::vector<cli::PairRecord> pairs;
  for (const std::string& r : f.records) pairs.push_back(cli::pair_from_json(cli::read_json(r)));
  const std::string table = cli::figure_table(f.figure, cli::figure_rows(f.figure, pairs));
  const fs::path path = f.output.empty() ? fs::path(dir) / (f.figure + ".csv") : fs::path(f.output);
  cli::write_atomic(path, table);
  std::cout << table << "  table: " << path.string() << "\n";
  return 0;
}

int cmd_presets() {
  for (const cli::Preset& p : cli::presets()) std::cout << p.name << "  " << p.description << "\n";
  std::cout << "\nfigures:\n";
  for (const cli::FigureSpec& s : cli::figures()) std::cout << s.id << "  " << s.title << "\n";
  return 0;
}

int cmd_verify(json& echo, std::string& dir, std::string& stem, const Flags& f) {
  echo = json::object();
  dir = f.output_dir.value_or("results");
  stem = "verify";
  bool all = true;
  for (const verify::Check& c : verify::run_suite()) {
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << " | " << c.detail << "\n";
    all = all && c.passed;
  }
  if (!all) throw ContractViolation("verification suite failed");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiseed Krylov complexity plateaus for spin chains and resonant systems"};
  app.set_version_flag("--version", std::string(cli::kVersion));
  app.require_subcommand(1);

  Flags f;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--precision-bits", f.precision_bits, "working precision in bits (53..1000)");
    sub->add_flag("--long-run", f.long_run, "allow L >= 6 and N, M >= 9");
    sub->add_option("--workers", f.workers, "concurrent realizations")->check(CLI::PositiveNumber);
    sub->add_option("--output-dir", f.output_dir, "directory for records");
    sub->add_option("--rng-seed", f.rng_seed, "base rng seed for the ensemble");
  };

  auto* run = app.add_subcommand("run", "one realization of a run config");
  run->add_option("--config", f.config, "run config (JSON)")->required();
  add_common(run);
  auto* ens = app.add_subcommand("ensemble", "all realizations of a run config");
  ens->add_option("--config", f.config, "run config (JSON)")->required();
  ens->add_option("--count", f.count, "override the ensemble count")->check(CLI::PositiveNumber);
  add_common(ens);
  auto* pair = app.add_subcommand("pair", "integrable/chaotic pair with a shared denominator");
  pair->add_option("--config", f.config, "pair config (JSON)")->required();
  add_common(pair);
  auto* exp = app.add_subcommand("export", "figure table from pair records");
  exp->add_option("--figure", f.figure, "figure id (see `presets`)")->required();
  exp->add_option("--output", f.output, "table path (default <output-dir>/<figure>.csv)");
  exp->add_option("--output-dir", f.output_dir, "directory for the table");
  exp->add_option("records", f.records, "pair record files")->required();
  app.add_subcommand("presets", "list model presets and figure ids");
  auto* ver = app.add_subcommand("verify", "quick oracle and property checks");
  ver->add_option("--output-dir", f.output_dir, "directory for an error record");

  json echo = json::object();
  std::string dir = "results";
  std::string stem = "error";
  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    try {
      write_record(f.output_dir.value_or(dir), "error_usage", cli::error_record("UsageError", e.what(), echo));
    } catch (...) {
    }
    return 2;
  }

  try {
    if (run->parsed()) return cmd_run(f, false, echo, dir, stem);
    if (ens->parsed()) return cmd_run(f, true, echo, dir, stem);
    if (pair->parsed()) return cmd_pair(f, echo, dir, stem);
    if (exp->parsed()) return cmd_export(f, echo, dir, stem);
    if (ver->parsed()) return cmd_verify(echo, dir, stem, f);
    return cmd_presets();
  } catch (const std::exception& e) {
    if (f.output_dir) dir = *f.output_dir;
    const fs::path path = fs::path(dir) / (stem + ".json");
    std::cerr << "error (" << error_type(e) << "): " << e.what() << "\n";
    try {
      cli::write_atomic(path, cli::error_record(error_type(e), e.what(), echo).dump(2) + "\n");
      std::cerr << "  error record: " << path.string() << "\n";
    } catch (const std::exception& w) {
      std::cerr << "  could not write the error record: " << w.what() << "\n";
    }
    return 1;
  }
}
