#include "multikrylov/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "multikrylov/errors.hpp"
#include "multikrylov/krylov.hpp"

namespace multikrylov::cli {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string short_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string axis_name(models::Axis a) {
  switch (a) {
    case models::Axis::X:
      return "x";
    case models::Axis::Y:
      return "y";
    case models::Axis::Z:
      return "z";
  }
  return "?";
}

models::Axis axis_from_string(const std::string& s) {
  if (s == "x") return models::Axis::X;
  if (s == "y") return models::Axis::Y;
  if (s == "z") return models::Axis::Z;
  throw ConfigError("unknown spin axis '" + s + "'");
}

// Reject keys outside `allowed` so that typos cannot silently fall back to defaults.
void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
T required(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError("missing key '" + std::string(key) + "' in " + where);
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("bad value for '" + std::string(key) + "' in " + where + ": " + e.what());
  }
}

template <typename T>
T optional_value(const json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("bad value for '" + std::string(key) + "' in " + where + ": " + e.what());
  }
}

bool is_long_run_size(const models::ModelSpec& m) {
  return m.is_chain() ? m.L >= 6 : (m.N >= 9 || m.M >= 9);
}

int system_size(const models::ModelSpec& m) { return m.is_chain() ? m.L : m.N; }

bool same_system(const RunConfig& a, const RunConfig& b) {
  if (a.model.family != b.model.family) return false;
  if (a.model.is_chain()) return a.model.L == b.model.L;
  return a.model.N == b.model.N && a.model.M == b.model.M;
}

seeds::SeedFamily make_seeds(const RunConfig& c, hiprec::Precision p) {
  const models::ModelSpec& m = c.model;
  switch (c.seed_family) {
    case seeds::SeedKind::SingleSiteSpins:
      return seeds::seeds_single_site_spins(m.L, m.convention, p);
    case seeds::SeedKind::ProductStates:
      return seeds::seeds_product_states(m.L, p);
    case seeds::SeedKind::ZeroBody:
      return seeds::seeds_zero_body(models::enumerate_fock(m.N, m.M), p);
    case seeds::SeedKind::NumberOperators:
      return seeds::seeds_number_operators(models::enumerate_fock(m.N, m.M), p);
    case seeds::SeedKind::SingleOperator: {
      const Eigen::MatrixXcd op = m.is_chain() ? models::spin_operator(m.L, c.seed_site, c.seed_axis, m.convention)
                                               : models::number_operator(models::enumerate_fock(m.N, m.M), c.seed_site);
      return seeds::seeds_single_operator(models::flatten_operator(op), p);
    }
  }
  throw ParameterError("unknown seed family");
}

json plateau_json(const complexity::PlateauResult& p) {
  return {{"value", p.value},
          {"M", p.M},
          {"normalized", p.normalized},
          {"per_seed", p.per_seed},
          {"diagnostics",
           {{"drift", p.diagnostics.drift},
            {"widths", p.diagnostics.widths},
            {"cluster_count", p.diagnostics.cluster_count},
            {"full_reorthogonalizations", p.diagnostics.full_reorthogonalizations}}}};
}

complexity::PlateauResult plateau_from_json(const json& j) {
  complexity::PlateauResult p;
  p.value = j.at("value").get<double>();
  p.M = j.at("M").get<std::size_t>();
  p.normalized = j.at("normalized").get<double>();
  p.per_seed = j.at("per_seed").get<std::vector<double>>();
  const json& d = j.at("diagnostics");
  p.diagnostics.drift = d.at("drift").get<double>();
  p.diagnostics.widths = d.at("widths").get<std::vector<std::size_t>>();
  p.diagnostics.cluster_count = d.at("cluster_count").get<std::size_t>();
  p.diagnostics.full_reorthogonalizations = d.at("full_reorthogonalizations").get<std::size_t>();
  return p;
}

json stats_json(const complexity::EnsembleStats& s) { return {{"mean", s.mean}, {"sem", s.sem}, {"count", s.count}}; }

complexity::EnsembleStats stats_from_json(const json& j) {
  return {j.at("mean").get<double>(), j.at("sem").get<double>(), j.at("count").get<std::size_t>()};
}

}  // namespace

std::string to_string(Variant v) {
  switch (v) {
    case Variant::Operator:
      return "operator";
    case Variant::State:
      return "state";
    case Variant::Size:
      return "size";
  }
  return "?";
}

Variant variant_from_string(const std::string& s) {
  if (s == "operator") return Variant::Operator;
  if (s == "state") return Variant::State;
  if (s == "size") return Variant::Size;
  throw ConfigError("unknown variant '" + s + "'");
}

// ---------------------------------------------------------------- presets

const std::vector<Preset>& presets() {
  static const std::vector<Preset> list = [] {
    auto ising = [](double hx, double hz) {
      models::ModelSpec s;
      s.family = models::Family::IsingMixedField;
      s.h_x = hx;
      s.h_z = hz;
      return s;
    };
    auto xyz = [](double jx, double jy, double jz, double hz) {
      models::ModelSpec s;
      s.family = models::Family::XYZChain;
      s.J_x = jx;
      s.J_y = jy;
      s.J_z = jz;
      s.h_z = hz;
      return s;
    };
    auto qrs = [](models::Coupling c) {
      models::ModelSpec s;
      s.family = models::Family::QRS;
      s.coupling = c;
      return s;
    };
    return std::vector<Preset>{
        {"ising-integrable", "Ising chain, (h_x, h_z) = (-1.05, 0)", ising(-1.05, 0.0)},
        {"ising-chaotic", "Ising chain, (h_x, h_z) = (-1.05, 0.5)", ising(-1.05, 0.5)},
        {"xyz-integrable-text", "XYZ chain, J = (-0.35, 0.5, -0.1), h_z = 0", xyz(-0.35, 0.5, -0.1, 0.0)},
        {"xyz-integrable-caption", "XYZ chain, J = (-0.35, 0.5, -1), h_z = 0", xyz(-0.35, 0.5, -1.0, 0.0)},
        {"xyz-chaotic", "XYZ chain, J = (-0.35, 0.5, -1), h_z = 0.8", xyz(-0.35, 0.5, -1.0, 0.8)},
        {"xyz-chaotic-text", "XYZ chain, J = (-0.35, 0.5, -0.1), h_z = 0.8", xyz(-0.35, 0.5, -0.1, 0.8)},
        {"qrs-integrable", "resonant system, C = 1 if any index is 0, else 0", qrs(models::Coupling::Integrable)},
        {"qrs-chaotic", "resonant system, random couplings (one realization per rng seed)",
         qrs(models::Coupling::Chaotic)},
    };
  }();
  return list;
}

const Preset& find_preset(const std::string& name) {
  for (const Preset& p : presets())
    if (p.name == name) return p;
  throw ConfigError("unknown preset '" + name + "'");
}

// ---------------------------------------------------------------- config

void RunConfig::validate() const {
  model.validate();
  if (!preset.empty()) (void)find_preset(preset);
  if (ensemble.count < 1) throw ConfigError("ensemble count must be >= 1");
  if (precision_bits < hiprec::Precision::kMinBits || precision_bits > kMaxPrecisionBits)
    throw ParameterError("precision_bits must lie in [" + std::to_string(hiprec::Precision::kMinBits) + ", " +
                         std::to_string(kMaxPrecisionBits) + "]");
  if (!(cluster_tol >= 0.0) || !std::isfinite(cluster_tol)) throw ParameterError("cluster_tol must be >= 0");
  if (oracle.enabled) {
    if (!(oracle.T >= 0.0) || !std::isfinite(oracle.T)) throw ParameterError("oracle T must be >= 0");
    if (oracle.samples < 1000) throw ParameterError("oracle samples must be >= 1000");
  }
  if (variant != Variant::Size) {
    const bool state_seeds = seed_family == seeds::SeedKind::ProductStates;
    if (variant == Variant::State && !state_seeds)
      throw ConfigError("the state variant needs a state seed family (product-states)");
    if (variant == Variant::Operator && state_seeds)
      throw ConfigError("product-states seeds only drive the state variant");
    const bool chain_seeds = seed_family == seeds::SeedKind::SingleSiteSpins || state_seeds;
    const bool qrs_seeds =
        seed_family == seeds::SeedKind::ZeroBody || seed_family == seeds::SeedKind::NumberOperators;
    if (model.is_chain() && qrs_seeds) throw ConfigError(seeds::to_string(seed_family) + " seeds need a resonant system");
    if (!model.is_chain() && chain_seeds) throw ConfigError(seeds::to_string(seed_family) + " seeds need a spin chain");
    if (seed_family == seeds::SeedKind::SingleOperator) {
      const int bound = model.is_chain() ? model.L : model.M + 1;
      if (seed_site < 0 || seed_site >= bound) throw ParameterError("seed operator site out of range");
    }
  }
  if (is_long_run_size(model) && !long_run)
    throw ConfigError("L >= 6 and N, M >= 9 are long runs (hours); pass --long-run to allow them");
}

std::string RunConfig::stem() const {
  std::ostringstream s;
  if (!preset.empty()) {
    s << preset;
  } else {
    s << models::to_string(model.family);
    switch (model.family) {
      case models::Family::IsingMixedField:
        s << "-hx" << short_double(model.h_x) << "-hz" << short_double(model.h_z);
        break;
      case models::Family::XYZChain:
        s << "-J" << short_double(model.J_x) << "," << short_double(model.J_y) << "," << short_double(model.J_z)
          << "-hz" << short_double(model.h_z);
        break;
      case models::Family::QRS:
        s << "-" << models::to_string(model.coupling);
        break;
    }
  }
  if (model.is_chain())
    s << "_L" << model.L;
  else
    s << "_N" << model.N << "M" << model.M;
  s << "_" << to_string(variant);
  if (variant != Variant::Size) s << "_" << seeds::to_string(seed_family);
  if (ensemble.count > 1) s << "_x" << ensemble.count;
  return s.str();
}

RunConfig config_from_json(const json& j) {
  check_keys(j,
             {"model", "seed_family", "variant", "precision_bits", "auto_precision", "cluster_tol", "oracle",
              "ensemble", "output_dir", "pair_tag", "long_run", "seed_operator"},
             "run config");
  RunConfig c;
  const json& m = j.contains("model") ? j.at("model") : throw ConfigError("missing key 'model' in run config");
  if (m.contains("preset")) {
    c.preset = required<std::string>(m, "preset", "model");
    const Preset& p = find_preset(c.preset);
    c.model = p.spec;
    if (c.model.is_chain()) {
      check_keys(m, {"preset", "L", "convention"}, "model (chain preset)");
      c.model.L = required<int>(m, "L", "model");
    } else {
      check_keys(m, {"preset", "N", "M"}, "model (resonant preset)");
      c.model.N = required<int>(m, "N", "model");
      c.model.M = required<int>(m, "M", "model");
    }
  } else {
    c.model.family = models::family_from_string(required<std::string>(m, "family", "model"));
    switch (c.model.family) {
      case models::Family::IsingMixedField:
        check_keys(m, {"family", "L", "h_x", "h_z", "convention"}, "model (ising)");
        c.model.L = required<int>(m, "L", "model");
        c.model.h_x = required<double>(m, "h_x", "model");
        c.model.h_z = required<double>(m, "h_z", "model");
        break;
      case models::Family::XYZChain:
        check_keys(m, {"family", "L", "J_x", "J_y", "J_z", "h_z", "convention"}, "model (xyz)");
        c.model.L = required<int>(m, "L", "model");
        c.model.J_x = required<double>(m, "J_x", "model");
        c.model.J_y = required<double>(m, "J_y", "model");
        c.model.J_z = required<double>(m, "J_z", "model");
        c.model.h_z = required<double>(m, "h_z", "model");
        break;
      case models::Family::QRS:
        check_keys(m, {"family", "N", "M", "coupling"}, "model (qrs)");
        c.model.N = required<int>(m, "N", "model");
        c.model.M = required<int>(m, "M", "model");
        c.model.coupling = models::coupling_from_string(required<std::string>(m, "coupling", "model"));
        break;
    }
  }
  if (m.contains("convention"))
    c.model.convention = models::convention_from_string(required<std::string>(m, "convention", "model"));

  c.variant = variant_from_string(required<std::string>(j, "variant", "run config"));
  if (c.variant == Variant::Size)
    c.seed_family = seeds::seed_kind_from_string(optional_value<std::string>(
        j, "seed_family", seeds::to_string(c.model.is_chain() ? seeds::SeedKind::SingleSiteSpins
                                                              : seeds::SeedKind::ZeroBody),
        "run config"));
  else
    c.seed_family = seeds::seed_kind_from_string(required<std::string>(j, "seed_family", "run config"));

  c.precision_bits = optional_value<int>(j, "precision_bits", c.precision_bits, "run config");
  c.auto_precision = optional_value<bool>(j, "auto_precision", c.auto_precision, "run config");
  c.cluster_tol = optional_value<double>(j, "cluster_tol", c.cluster_tol, "run config");
  c.output_dir = optional_value<std::string>(j, "output_dir", c.output_dir, "run config");
  c.pair_tag = optional_value<std::string>(j, "pair_tag", c.pair_tag, "run config");
  c.long_run = optional_value<bool>(j, "long_run", c.long_run, "run config");
  if (j.contains("oracle")) {
    const json& o = j.at("oracle");
    check_keys(o, {"enabled", "T", "samples"}, "oracle");
    c.oracle.enabled = optional_value<bool>(o, "enabled", true, "oracle");
    c.oracle.T = optional_value<double>(o, "T", 0.0, "oracle");
    c.oracle.samples = optional_value<std::size_t>(o, "samples", c.oracle.samples, "oracle");
  }
  if (j.contains("ensemble")) {
    const json& e = j.at("ensemble");
    check_keys(e, {"count", "base_rng_seed"}, "ensemble");
    c.ensemble.count = optional_value<std::size_t>(e, "count", 1, "ensemble");
    c.ensemble.base_rng_seed = optional_value<std::uint64_t>(e, "base_rng_seed", 1, "ensemble");
  }
  if (j.contains("seed_operator")) {
    const json& s = j.at("seed_operator");
    check_keys(s, {"site", "axis"}, "seed_operator");
    c.seed_site = required<int>(s, "site", "seed_operator");
    c.seed_axis = axis_from_string(optional_value<std::string>(s, "axis", "x", "seed_operator"));
  }
  c.model.rng_seed = c.ensemble.base_rng_seed;
  return c;
}

json config_to_json(const RunConfig& c) {
  json model;
  if (!c.preset.empty()) model["preset"] = c.preset;
  model["family"] = models::to_string(c.model.family);
  switch (c.model.family) {
    case models::Family::IsingMixedField:
      model["L"] = c.model.L;
      model["h_x"] = c.model.h_x;
      model["h_z"] = c.model.h_z;
      model["convention"] = models::to_string(c.model.convention);
      break;
    case models::Family::XYZChain:
      model["L"] = c.model.L;
      model["J_x"] = c.model.J_x;
      model["J_y"] = c.model.J_y;
      model["J_z"] = c.model.J_z;
      model["h_z"] = c.model.h_z;
      model["convention"] = models::to_string(c.model.convention);
      break;
    case models::Family::QRS:
      model["N"] = c.model.N;
      model["M"] = c.model.M;
      model["coupling"] = models::to_string(c.model.coupling);
      break;
  }
  json j{{"model", model},
         {"seed_family", seeds::to_string(c.seed_family)},
         {"variant", to_string(c.variant)},
         {"precision_bits", c.precision_bits},
         {"auto_precision", c.auto_precision},
         {"cluster_tol", c.cluster_tol},
         {"oracle", {{"enabled", c.oracle.enabled}, {"T", c.oracle.T}, {"samples", c.oracle.samples}}},
         {"ensemble", {{"count", c.ensemble.count}, {"base_rng_seed", c.ensemble.base_rng_seed}}},
         {"output_dir", c.output_dir},
         {"pair_tag", c.pair_tag},
         {"long_run", c.long_run}};
  if (c.seed_family == seeds::SeedKind::SingleOperator)
    j["seed_operator"] = {{"site", c.seed_site}, {"axis", axis_name(c.seed_axis)}};
  return j;
}

namespace {

// The echo spells out preset values; re-reading it must give the same run.
RunConfig config_from_echo(const json& j) {
  json copy = j;
  json& m = copy.at("model");
  if (m.contains("preset")) {
    const Preset& p = find_preset(m.at("preset").get<std::string>());
    json keep{{"preset", p.name}};
    if (p.spec.is_chain()) {
      keep["L"] = m.at("L");
      keep["convention"] = m.at("convention");
    } else {
      keep["N"] = m.at("N");
      keep["M"] = m.at("M");
    }
    m = keep;
  }
  return config_from_json(copy);
}

}  // namespace

void apply_overrides(RunConfig& c, const Overrides& o) {
  if (o.precision_bits) c.precision_bits = *o.precision_bits;
  if (o.output_dir) c.output_dir = *o.output_dir;
  if (o.rng_seed) {
    c.ensemble.base_rng_seed = *o.rng_seed;
    c.model.rng_seed = *o.rng_seed;
  }
  if (o.long_run) c.long_run = true;
}

// ---------------------------------------------------------------- runs

Realization run_single(const RunConfig& config) {
  config.validate();
  const auto t0 = Clock::now();
  Realization out;
  out.rng_seed = config.model.rng_seed;

  const models::HamiltonianTerms terms = models::hamiltonian_terms(config.model);
  const models::SpectralDecomposition sp = models::spectral(terms.dense(), config.cluster_tol);

  if (config.variant == Variant::Size) {
    const seeds::GradedBasis graded = config.model.is_chain()
                                          ? seeds::graded_pauli_basis(config.model.L)
                                          : seeds::graded_fock_basis(models::enumerate_fock(config.model.N, config.model.M));
    const std::vector<std::size_t> simple = seeds::simple_set(graded);
    out.plateau = complexity::plateau_size(sp, graded, simple);
    out.basis_size = graded.size();
    if (config.oracle.enabled) {
      out.oracle_T = config.oracle.T > 0.0 ? config.oracle.T : complexity::default_oracle_horizon(sp.frequencies);
      out.oracle_value = complexity::size_time_average_oracle(sp, graded, simple, *out.oracle_T, config.oracle.samples);
    }
    out.seconds = seconds_since(t0);
    return out;
  }

  const bool states = config.variant == Variant::State;
  const models::Clustering eclusters = states ? models::energy_clusters(sp, config.cluster_tol) : models::Clustering{};

  int bits = config.precision_bits;
  for (;;) {
    const hiprec::Precision p(bits);
    const seeds::SeedFamily family = make_seeds(config, p);
    if (out.invariant_dimension == 0)
      out.invariant_dimension = states ? complexity::state_invariant_dimension(sp, eclusters, family)
                                       : complexity::operator_invariant_dimension(sp, family);
    krylov::KrylovOptions opts;
    opts.precision = p;
    opts.dimension_limit = out.invariant_dimension;
    opts.norm_bound = states ? sp.hamiltonian_norm() : sp.liouvillian_norm();

    krylov::BlockKrylovBasis basis;
    if (states) {
      const hiprec::HMatrix h = terms.working(p);
      basis = krylov::block_lanczos([&](const hiprec::HVector& v) { return h.apply(v); }, family, opts);
    } else {
      const models::Liouvillian liou(terms, p);
      basis = krylov::block_lanczos([&](const hiprec::HVector& v) { return liou.apply(v); }, family, opts);
    }

    if (basis.dimension_exceeded) {
      if (config.auto_precision && bits < kMaxPrecisionBits) {
        bits = std::min(2 * bits, kMaxPrecisionBits);
        ++out.precision_escalations;
        continue;
      }
      throw PrecisionError("Krylov basis outgrew the invariant dimension " + std::to_string(out.invariant_dimension) +
                           " at " + std::to_string(bits) + " bits");
    }

    out.precision_bits_used = bits;
    out.basis_size = basis.size();
    out.plateau = states ? complexity::plateau_state(sp, eclusters, basis) : complexity::plateau_operator(sp, basis);
    if (config.oracle.enabled) {
      out.oracle_T = config.oracle.T > 0.0 ? config.oracle.T
                                           : complexity::default_oracle_horizon(states ? eclusters : sp.frequencies);
      out.oracle_value = states ? complexity::state_time_average_oracle(sp, basis, *out.oracle_T, config.oracle.samples)
                                : complexity::time_average_oracle(sp, basis, *out.oracle_T, config.oracle.samples);
    }
    break;
  }
  out.seconds = seconds_since(t0);
  return out;
}

RunRecord run(const RunConfig& config, std::size_t workers) {
  config.validate();
  const auto t0 = Clock::now();
  RunRecord rec;
  rec.config = config;
  const std::size_t n = config.ensemble.count;
  rec.realizations.resize(n);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t r = next++; r < n; r = next++) {
      try {
        RunConfig c = config;
        c.model.rng_seed = config.ensemble.base_rng_seed + r;
        rec.realizations[r] = run_single(c);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = n;
      }
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(workers, 1, n);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<double> values;
  for (const Realization& r : rec.realizations) {
    values.push_back(r.plateau.value);
    rec.max_M = std::max(rec.max_M, r.plateau.M);
  }
  rec.value_stats = complexity::ensemble_stats(values);
  rec.seconds = seconds_since(t0);
  return rec;
}

json record_to_json(const RunRecord& r) {
  json reals = json::array();
  json per_seconds = json::array();
  for (const Realization& x : r.realizations) {
    json o{{"rng_seed", x.rng_seed},
           {"plateau", plateau_json(x.plateau)},
           {"precision_bits_used", x.precision_bits_used},
           {"precision_escalations", x.precision_escalations},
           {"invariant_dimension", x.invariant_dimension},
           {"basis_size", x.basis_size},
           {"dimension_exceeded", x.dimension_exceeded}};
    o["oracle"] = x.oracle_value ? json{{"T", *x.oracle_T}, {"value", *x.oracle_value}} : json(nullptr);
    reals.push_back(std::move(o));
    per_seconds.push_back(x.seconds);
  }
  return {{"schema", "multikrylov.run/1"},
          {"version", kVersion},
          {"status", "ok"},
          {"config", config_to_json(r.config)},
          {"result", {{"value", stats_json(r.value_stats)}, {"max_M", r.max_M}}},
          {"realizations", reals},
          {"timing", {{"total_seconds", r.seconds}, {"realization_seconds", per_seconds}}}};
}

RunRecord record_from_json(const json& j) {
  try {
    if (j.value("status", "") != "ok") throw ConfigError("not a successful run record");
    RunRecord r;
    r.config = config_from_echo(j.at("config"));
    r.value_stats = stats_from_json(j.at("result").at("value"));
    r.max_M = j.at("result").at("max_M").get<std::size_t>();
    const json& timing = j.at("timing");
    r.seconds = timing.at("total_seconds").get<double>();
    const json& per = timing.at("realization_seconds");
    const json& reals = j.at("realizations");
    for (std::size_t i = 0; i < reals.size(); ++i) {
      const json& o = reals[i];
      Realization x;
      x.rng_seed = o.at("rng_seed").get<std::uint64_t>();
      x.plateau = plateau_from_json(o.at("plateau"));
      x.precision_bits_used = o.at("precision_bits_used").get<int>();
      x.precision_escalations = o.at("precision_escalations").get<std::size_t>();
      x.invariant_dimension = o.at("invariant_dimension").get<std::size_t>();
      x.basis_size = o.at("basis_size").get<std::size_t>();
      x.dimension_exceeded = o.at("dimension_exceeded").get<bool>();
      if (!o.at("oracle").is_null()) {
        x.oracle_T = o.at("oracle").at("T").get<double>();
        x.oracle_value = o.at("oracle").at("value").get<double>();
      }
      if (i < per.size()) x.seconds = per[i].get<double>();
      r.realizations.push_back(std::move(x));
    }
    return r;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed run record: ") + e.what());
  }
}

json error_record(const std::string& type, const std::string& message, const json& config_echo) {
  return {{"schema", "multikrylov.run/1"},
          {"version", kVersion},
          {"status", "error"},
          {"error", {{"type", type}, {"message", message}}},
          {"config", config_echo}};
}

// ---------------------------------------------------------------- pairs

PairRecord normalize(std::string tag, RunRecord integrable, RunRecord chaotic) {
  const RunConfig& a = integrable.config;
  const RunConfig& b = chaotic.config;
  if (!same_system(a, b)) throw ConfigError("pair halves describe different systems (family or size)");
  if (a.variant != b.variant) throw ConfigError("pair halves use different variants");
  if (a.variant != Variant::Size && a.seed_family != b.seed_family)
    throw ConfigError("pair halves use different seed families");

  PairRecord p;
  p.pair_tag = std::move(tag);
  p.size = system_size(a.model);
  const std::size_t shared_M = std::max(integrable.max_M, chaotic.max_M);
  p.denominator = shared_M - 1;
  p.integrable_normalized =
      complexity::normalize_pair(integrable.value_stats.mean, shared_M, 0.0, shared_M).first;
  std::vector<double> cha;
  for (const Realization& r : chaotic.realizations)
    cha.push_back(complexity::normalize_pair(0.0, shared_M, r.plateau.value, shared_M).second);
  p.chaotic_normalized = complexity::ensemble_stats(cha);
  p.integrable = std::move(integrable);
  p.chaotic = std::move(chaotic);
  return p;
}

PairRecord run_pair(const RunConfig& integrable, const RunConfig& chaotic, std::size_t workers) {
  if (!same_system(integrable, chaotic)) throw ConfigError("pair halves describe different systems (family or size)");
  std::string tag = integrable.pair_tag.empty() ? chaotic.pair_tag : integrable.pair_tag;
  RunRecord a = run(integrable, workers);
  RunRecord b = run(chaotic, workers);
  return normalize(std::move(tag), std::move(a), std::move(b));
}

json pair_to_json(const PairRecord& p) {
  const double upper = p.chaotic_normalized.mean - p.chaotic_normalized.sem;
  return {{"schema", "multikrylov.pair/1"},
          {"version", kVersion},
          {"status", "ok"},
          {"pair_tag", p.pair_tag},
          {"size", p.size},
          {"denominator", p.denominator},
          {"integrable_normalized", p.integrable_normalized},
          {"chaotic_normalized", stats_json(p.chaotic_normalized)},
          {"integrable_below_chaotic", p.integrable_normalized < p.chaotic_normalized.mean},
          {"integrable_below_chaotic_minus_sem", p.integrable_normalized < upper},
          {"bars", "integrable = white bar, chaotic = black bar (ensemble mean, error bar = standard error)"},
          {"integrable", record_to_json(p.integrable)},
          {"chaotic", record_to_json(p.chaotic)}};
}

PairRecord pair_from_json(const json& j) {
  try {
    if (j.value("status", "") != "ok") throw ConfigError("not a successful pair record");
    PairRecord p = normalize(j.at("pair_tag").get<std::string>(), record_from_json(j.at("integrable")),
                             record_from_json(j.at("chaotic")));
    if (p.integrable_normalized != j.at("integrable_normalized").get<double>() ||
        p.chaotic_normalized.mean != j.at("chaotic_normalized").at("mean").get<double>())
      throw ConfigError("pair record is inconsistent with its halves");
    return p;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed pair record: ") + e.what());
  }
}

// ---------------------------------------------------------------- figures

const std::vector<FigureSpec>& figures() {
  using models::Family;
  using seeds::SeedKind;
  static const std::vector<FigureSpec> list{
      {"fig1-left", Family::IsingMixedField, Variant::Operator, SeedKind::SingleSiteSpins,
       "multiseed operator plateau, Ising chain, single-site spin seeds"},
      {"fig1-right", Family::XYZChain, Variant::Operator, SeedKind::SingleSiteSpins,
       "multiseed operator plateau, XYZ chain, single-site spin seeds"},
      {"fig2-left", Family::QRS, Variant::Operator, SeedKind::ZeroBody,
       "multiseed operator plateau, resonant system, all 0-body seeds"},
      {"fig2-right", Family::QRS, Variant::Operator, SeedKind::NumberOperators,
       "multiseed operator plateau, resonant system, number-operator seeds"},
      {"fig3-left", Family::IsingMixedField, Variant::State, SeedKind::ProductStates,
       "multiseed state plateau, Ising chain, product-state seeds"},
      {"fig3-right", Family::XYZChain, Variant::State, SeedKind::ProductStates,
       "multiseed state plateau, XYZ chain, product-state seeds"},
      {"fig4-left", Family::XYZChain, Variant::Size, SeedKind::SingleSiteSpins,
       "operator size plateau, XYZ chain"},
      {"fig4-right", Family::QRS, Variant::Size, SeedKind::ZeroBody, "operator size plateau, resonant system"},
  };
  return list;
}

const FigureSpec& find_figure(const std::string& id) {
  for (const FigureSpec& f : figures())
    if (f.id == id) return f;
  throw ConfigError("unknown figure id '" + id + "'");
}

std::vector<FigureRow> figure_rows(const std::string& figure_id, const std::vector<PairRecord>& pairs) {
  const FigureSpec& f = find_figure(figure_id);
  if (pairs.empty()) throw ConfigError(figure_id + ": no pair records given");
  std::vector<FigureRow> rows;
  std::set<int> sizes;
  for (const PairRecord& p : pairs) {
    const RunConfig& c = p.integrable.config;
    if (c.model.family != f.family || c.variant != f.variant ||
        (f.variant != Variant::Size && c.seed_family != f.seed_family))
      throw ConfigError(figure_id + ": pair '" + p.pair_tag + "' does not belong to this figure");
    if (!sizes.insert(p.size).second)
      throw ConfigError(figure_id + ": size " + std::to_string(p.size) + " appears twice");
    rows.push_back({p.size, p.integrable_normalized, p.chaotic_normalized.mean, p.chaotic_normalized.sem});
  }
  std::sort(rows.begin(), rows.end(), [](const FigureRow& a, const FigureRow& b) { return a.size < b.size; });
  return rows;
}

std::string figure_table(const std::string& figure_id, const std::vector<FigureRow>& rows) {
  const FigureSpec& f = find_figure(figure_id);
  std::ostringstream s;
  s << "# figure: " << f.id << "\n"
    << "# " << f.title << "\n"
    << "# values: plateau / (max(M_integrable, M_chaotic) - 1), one shared denominator per size\n"
    << "# columns: size (L for chains, N = M for resonant systems), integrable (white bar),\n"
    << "#          chaotic_mean (black bar), chaotic_sem (standard error over realizations)\n"
    << "size,integrable,chaotic_mean,chaotic_sem\n";
  for (const FigureRow& r : rows)
    s << r.size << "," << format_double(r.integrable) << "," << format_double(r.chaotic_mean) << ","
      << format_double(r.chaotic_sem) << "\n";
  return s.str();
}

std::vector<FigureRow> parse_figure_table(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  bool header = false;
  std::vector<FigureRow> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line != "size,integrable,chaotic_mean,chaotic_sem") throw ConfigError("unexpected table header: " + line);
      header = true;
      continue;
    }
    std::istringstream fields(line);
    std::string cell[4];
    for (std::string& c : cell)
      if (!std::getline(fields, c, ',')) throw ConfigError("short table row: " + line);
    FigureRow r;
    try {
      std::size_t used = 0;
      r.size = std::stoi(cell[0], &used);
      r.integrable = std::stod(cell[1]);
      r.chaotic_mean = std::stod(cell[2]);
      r.chaotic_sem = std::stod(cell[3]);
    } catch (const std::exception&) {
      throw ConfigError("bad table row: " + line);
    }
    rows.push_back(r);
  }
  if (!header) throw ConfigError("table has no header");
  return rows;
}

// ---------------------------------------------------------------- io

void write_atomic(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw ConfigError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void write_matrix_text(const std::filesystem::path& path, const Eigen::MatrixXcd& m, int precision_bits) {
  std::ostringstream s;
  s << m.rows() << " " << m.cols() << " " << precision_bits << "\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index k = 0; k < m.cols(); ++k) {
      if (k) s << " ";
      s << format_double(m(i, k).real()) << " " << format_double(m(i, k).imag());
    }
    s << "\n";
  }
  write_atomic(path, s.str());
}

Eigen::MatrixXcd read_matrix_text(const std::filesystem::path& path, int* precision_bits) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  Eigen::Index rows = 0, cols = 0;
  int bits = 0;
  if (!(in >> rows >> cols >> bits) || rows < 0 || cols < 0) throw ConfigError(path.string() + ": bad matrix header");
  Eigen::MatrixXcd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index k = 0; k < cols; ++k) {
      double re = 0.0, im = 0.0;
      if (!(in >> re >> im)) throw ConfigError(path.string() + ": truncated matrix");
      m(i, k) = {re, im};
    }
  if (precision_bits) *precision_bits = bits;
  return m;
}

}  // namespace multikrylov::cli
