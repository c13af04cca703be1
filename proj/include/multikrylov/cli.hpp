#pragma once

// Run configuration, orchestration and persistence: single runs, ensembles,
// integrable/chaotic pairs with shared normalization, and figure tables.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "multikrylov/complexity.hpp"
#include "multikrylov/models.hpp"
#include "multikrylov/seeds.hpp"

namespace multikrylov::cli {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kMaxPrecisionBits = 1000;

using json = nlohmann::json;

enum class Variant { Operator, State, Size };
std::string to_string(Variant v);
Variant variant_from_string(const std::string& s);

// ---------------------------------------------------------------- presets

struct Preset {
  std::string name;
  std::string description;
  models::ModelSpec spec;  ///< size fields left at zero
};

const std::vector<Preset>& presets();
/// Throws ConfigError for unknown names.
const Preset& find_preset(const std::string& name);

// ---------------------------------------------------------------- config

struct OracleSettings {
  bool enabled = false;
  double T = 0.0;  ///< 0 selects 200 / (smallest cluster gap)
  std::size_t samples = 4000;
};

struct EnsembleSettings {
  std::size_t count = 1;
  std::uint64_t base_rng_seed = 1;
};

struct RunConfig {
  models::ModelSpec model;
  std::string preset;  ///< empty when the model is given explicitly
  seeds::SeedKind seed_family = seeds::SeedKind::SingleSiteSpins;
  Variant variant = Variant::Operator;
  int precision_bits = 256;
  /// Raise the precision (doubling, up to kMaxPrecisionBits) while the Krylov
  /// basis outgrows the invariant-subspace dimension.
  bool auto_precision = true;
  double cluster_tol = 0.0;
  OracleSettings oracle;
  EnsembleSettings ensemble;
  std::string output_dir = "results";
  std::string pair_tag;
  bool long_run = false;
  /// Single-operator seeds on chains: site and axis of the spin operator.
  int seed_site = 0;
  models::Axis seed_axis = models::Axis::X;

  /// Throws ConfigError or ParameterError.
  void validate() const;
  /// Default file stem for the record.
  std::string stem() const;
};

RunConfig config_from_json(const json& j);
json config_to_json(const RunConfig& c);

/// Flag overrides applied on top of a config file.
struct Overrides {
  std::optional<int> precision_bits;
  std::optional<std::string> output_dir;
  std::optional<std::uint64_t> rng_seed;
  bool long_run = false;
  std::size_t workers = 1;
};

void apply_overrides(RunConfig& c, const Overrides& o);

// ---------------------------------------------------------------- runs

struct Realization {
  std::uint64_t rng_seed = 0;
  complexity::PlateauResult plateau;
  int precision_bits_used = 0;
  std::size_t precision_escalations = 0;
  std::size_t invariant_dimension = 0;
  std::size_t basis_size = 0;
  bool dimension_exceeded = false;
  std::optional<double> oracle_T;
  std::optional<double> oracle_value;
  double seconds = 0.0;
};

struct RunRecord {
  RunConfig config;
  std::vector<Realization> realizations;
  complexity::EnsembleStats value_stats;
  std::size_t max_M = 1;
  double seconds = 0.0;
};

/// Builds, seeds, runs the recursion and evaluates the plateau for one
/// Hamiltonian instance (the config's rng_seed).
Realization run_single(const RunConfig& config);

/// All ensemble members (rng_seed = base + r), `workers` at a time.
RunRecord run(const RunConfig& config, std::size_t workers = 1);

json record_to_json(const RunRecord& r);
RunRecord record_from_json(const json& j);

/// Error record written in place of a result.
json error_record(const std::string& type, const std::string& message, const json& config_echo);

// ---------------------------------------------------------------- pairs

struct PairRecord {
  std::string pair_tag;
  RunRecord integrable;
  RunRecord chaotic;
  std::size_t denominator = 0;  ///< max(M_int, M_cha) - 1 over all realizations
  double integrable_normalized = 0.0;
  complexity::EnsembleStats chaotic_normalized;
  int size = 0;  ///< L for chains, N for resonant systems
};

/// Both configs must describe the same family, size, seed family and variant.
PairRecord run_pair(const RunConfig& integrable, const RunConfig& chaotic, std::size_t workers = 1);
PairRecord normalize(std::string tag, RunRecord integrable, RunRecord chaotic);

json pair_to_json(const PairRecord& p);
PairRecord pair_from_json(const json& j);

// ---------------------------------------------------------------- figures

struct FigureSpec {
  std::string id;
  models::Family family;
  Variant variant;
  seeds::SeedKind seed_family;
  std::string title;
};

const std::vector<FigureSpec>& figures();
const FigureSpec& find_figure(const std::string& id);

struct FigureRow {
  int size = 0;
  double integrable = 0.0;
  double chaotic_mean = 0.0;
  double chaotic_sem = 0.0;
};

/// Rows sorted by size; throws ConfigError when a pair does not belong to
/// the figure or a size repeats.
std::vector<FigureRow> figure_rows(const std::string& figure_id, const std::vector<PairRecord>& pairs);
std::string figure_table(const std::string& figure_id, const std::vector<FigureRow>& rows);
std::vector<FigureRow> parse_figure_table(const std::string& text);

// ---------------------------------------------------------------- io

/// Write to a temporary file next to `path`, then rename over it.
void write_atomic(const std::filesystem::path& path, const std::string& contents);
json read_json(const std::filesystem::path& path);

/// Text matrix dump: header "rows cols precision_bits", then one row per
/// line of "re im" pairs, row-major.
void write_matrix_text(const std::filesystem::path& path, const Eigen::MatrixXcd& m, int precision_bits);
Eigen::MatrixXcd read_matrix_text(const std::filesystem::path& path, int* precision_bits = nullptr);

}  // namespace multikrylov::cli
