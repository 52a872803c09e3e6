#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bistable/classify.hpp"
#include "bistable/config.hpp"
#include "bistable/pce.hpp"
#include "bistable/statistics.hpp"

namespace bistable {

// Runs fn(i) for every i in [0, n) on up to `jobs` threads. Each index is
// handled exactly once, so results written per index do not depend on `jobs`.
// The exception of the lowest failing index is rethrown.
void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn);

// Mean power for every sample row.
std::vector<double> evaluate_model(const RandomInputSpec& spec, const SampleMatrix& x,
                                   const IntegratorSettings& integrator, unsigned jobs);

enum class Stream : std::uint64_t { Training = 1, Draws = 2, MonteCarlo = 3, Band = 4 };

// Seed of one random stream of the case with amplitude f.
std::uint64_t case_seed(const ExperimentConfig& config, double f_nominal, Stream stream);

enum class CloudSource { Surrogate, MonteCarlo };

std::string_view source_name(CloudSource source);

struct CaseResult {
  double f_nominal = 0.0;
  RandomInputSpec spec;
  std::optional<PceSurrogate> surrogate;
  QoISamples cloud;
  CloudSource source = CloudSource::Surrogate;
  MotionLabel nominal_motion;
};

// Nominal run, PCE fit on direct model runs and the large sample cloud for one
// amplitude. The cloud comes from surrogate draws unless config.use_mc is set
// or the LOO error exceeds the threshold; then the direct runs are used.
CaseResult run_case(const ExperimentConfig& config, double f_nominal);

struct Density {
  std::vector<double> power_norm;
  std::vector<double> density;
  std::size_t modes = 0;
};

// KDE of the normalized mean power of a cloud.
Density power_density(const QoISamples& cloud, const StatsSettings& stats);

struct BandResult {
  std::vector<double> t;
  std::vector<double> nominal;
  Band band;
  double area = 0.0;  // time integral of the band width
};

// Ensemble of direct runs with only `param` random (others nominal), reduced to
// a pointwise quantile band over the steady window.
BandResult run_band(const ExperimentConfig& config, double f_nominal, Param param);

// Trajectory of the nominal parameters of the case with amplitude f.
HarvesterParams case_params(const ExperimentConfig& config, double f_nominal);

// CSV emission: header row, LF endings, doubles at 17 significant digits.
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj,
                          std::size_t stride = 1);
void write_samples_csv(const std::filesystem::path& path, const RandomInputSpec& spec,
                       const SampleMatrix& x, const std::vector<double>* values = nullptr);
void write_density_csv(const std::filesystem::path& path, const Density& d);
void write_map_csv(const std::filesystem::path& path, const ConditionalMap& map);
void write_condprob_csv(const std::filesystem::path& path,
                        const std::vector<CondProbPoint>& points);
void write_band_csv(const std::filesystem::path& path, const BandResult& band);
void write_text(const std::filesystem::path& path, const std::string& text);

// JSON with condition, LOO, sample count, rank, degree and term count.
std::string diagnostics_json(const PceSurrogate& s);

// Case artifacts (density, maps per random parameter, surrogate and
// diagnostics) written into dir; returns the file names.
std::vector<std::string> write_case_artifacts(const std::filesystem::path& dir,
                                              const ExperimentConfig& config,
                                              const CaseResult& result);

// Named configuration of the sweep. The asymmetric model appears twice: once
// with the spread-rule supports (strong asymmetry events) and once with
// symmetric delta / phi supports (weak asymmetry events).
struct SweepEntry {
  std::string name;
  ExperimentConfig config;
};

std::vector<SweepEntry> sweep_entries(const ConfigAssignments& assignments);

struct SweepSummary {
  std::size_t cases = 0;
  std::size_t failed = 0;
  bool numerical_failure = false;
};

// Writes the full output tree: per entry a directory with config.ini, case
// artifacts, condprob.csv and bands, plus manifest.json at the root.
SweepSummary run_sweep(const std::vector<SweepEntry>& entries,
                       const std::filesystem::path& out, unsigned jobs,
                       const std::function<void(const std::string&)>& log = {});

}  // namespace bistable
