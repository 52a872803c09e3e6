#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bistable/dynamics.hpp"
#include "bistable/probability.hpp"
#include "bistable/statistics.hpp"

namespace bistable {

struct PceSettings {
  unsigned degree = 3;
  std::size_t samples = 2000;
  double oversampling = 2.0;
  double loo_threshold = 0.2;
};

struct StatsSettings {
  std::size_t bins = 20;
  std::size_t power_grid = 200;
  std::size_t draws = 100000;  // surrogate draws per case
  std::size_t mc_samples = 2000;  // direct model runs per case under --mc
  std::size_t kde_points = 512;
  double mode_min_height = 0.1;
  double gain = 0.5;
  DomainFamily domain = DomainFamily::D1;
  double band_level = 0.95;
  std::size_t band_members = 40;
  std::size_t band_stride = 10;
  std::vector<double> band_amplitudes{0.041, 0.091, 0.250};
};

struct ExperimentConfig {
  Variant variant = Variant::SymmetricLinear;
  HarvesterParams nominal;  // f mirrors f_sweep.front(); each case substitutes its amplitude
  double spread = 0.2;
  std::vector<Param> random;
  std::map<Param, UniformInterval> supports;  // explicit supports overriding the spread rule
  std::vector<double> f_sweep{0.041, 0.060, 0.083, 0.091, 0.105, 0.115, 0.147, 0.200, 0.250};
  IntegratorSettings integrator;
  PceSettings pce;
  StatsSettings stats;
  std::uint64_t seed = 20230417;
  bool use_mc = false;
  unsigned jobs = 1;

  // Defaults for a harvester variant: nominal values, random list and the
  // zeroed (beta, delta, phi) of the symmetric models.
  static ExperimentConfig defaults(Variant variant);
};

// section.key = value assignments in application order.
using ConfigAssignments = std::vector<std::pair<std::string, std::string>>;

// Parses the INI-style text ([model] [random] [integrator] [pce] [stats]).
ConfigAssignments parse_config_text(const std::string& text);
ConfigAssignments read_config_file(const std::string& path);

// Starts from defaults of the variant named in the assignments (model.variant),
// applies every assignment and validates the result. Throws Error(Config).
// Under D2 events the asymmetric model gives random delta and phi the symmetric
// support +-(1 + spread)|nominal| unless a support is set explicitly.
ExperimentConfig resolve_config(const ConfigAssignments& assignments);

// Fully resolved configuration as INI text; parse + resolve reproduces it.
std::string dump_config(const ExperimentConfig& config);

// FNV-1a of dump_config, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

// Uniform support of `param` for the case with excitation amplitude f_nominal.
UniformInterval support_for(const ExperimentConfig& config, Param param, double f_nominal);

RandomInputSpec build_spec(const ExperimentConfig& config, double f_nominal);

// 17 significant digits, so the text parses back to the same double.
std::string format_double(double value);

}  // namespace bistable
