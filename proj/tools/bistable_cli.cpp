#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bistable/classify.hpp"
#include "bistable/config.hpp"
#include "bistable/error.hpp"
#include "bistable/experiment.hpp"
#include "bistable/pce.hpp"

namespace fs = std::filesystem;
using namespace bistable;

namespace {

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  bool mc = false;
  unsigned jobs = 1;
  std::optional<std::string> variant;
  std::optional<std::string> domain;
  std::optional<double> gain;
  std::optional<unsigned> degree;
  std::optional<std::size_t> samples;
  std::optional<std::size_t> draws;
  // config key -> value given on the command line
  std::map<std::string, std::optional<double>> numbers;
};

void add_common(CLI::App& app, Common& c) {
  app.add_option("--config", c.config_path, "INI configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", c.seed, "master seed");
  app.add_option("--out", c.out, "output directory");
  app.add_flag("--mc", c.mc, "direct Monte Carlo instead of surrogate draws");
  app.add_option("--jobs", c.jobs, "worker threads")->check(CLI::Range(1u, 1024u));
  app.add_option("--variant", c.variant, "sym-linear | sym-nonlinear | asymmetric");
  app.add_option("--domain", c.domain, "conditioning events D1 | D2");
  app.add_option("--gain", c.gain, "relative power increase of interest");
  app.add_option("--degree", c.degree, "PCE total degree");
  app.add_option("--samples", c.samples, "model runs for the PCE fit");
  app.add_option("--draws", c.draws, "surrogate draws per case");
  const std::vector<std::pair<std::string, std::string>> numeric = {
      {"f", "model.f"},           {"xi", "model.xi"},
      {"chi", "model.chi"},       {"lambda", "model.lambda"},
      {"kappa", "model.kappa"},   {"omega", "model.omega"},
      {"beta", "model.beta"},     {"delta", "model.delta"},
      {"phi-deg", "model.phi_deg"}, {"p", "model.p"},
      {"spread", "random.spread"}, {"x0", "integrator.x0"},
      {"xdot0", "integrator.xdot0"}, {"v0", "integrator.v0"},
      {"dt", "integrator.dt"},    {"t-end", "integrator.t_end"},
      {"transient", "integrator.transient_fraction"},
  };
  for (const auto& [flag, key] : numeric) {
    app.add_option("--" + flag, c.numbers[key], key);
  }
}

ExperimentConfig resolve(const Common& c, ConfigAssignments* all = nullptr) {
  ConfigAssignments a;
  if (!c.config_path.empty()) a = read_config_file(c.config_path);
  if (c.variant) a.emplace_back("model.variant", *c.variant);
  for (const auto& [key, value] : c.numbers) {
    if (value) a.emplace_back(key, format_double(*value));
  }
  if (c.seed) a.emplace_back("random.seed", std::to_string(*c.seed));
  if (c.mc) a.emplace_back("stats.mc", "true");
  if (c.domain) a.emplace_back("stats.domain", *c.domain);
  if (c.gain) a.emplace_back("stats.gain", format_double(*c.gain));
  if (c.degree) a.emplace_back("pce.degree", std::to_string(*c.degree));
  if (c.samples) a.emplace_back("pce.samples", std::to_string(*c.samples));
  if (c.draws) a.emplace_back("stats.draws", std::to_string(*c.draws));
  ExperimentConfig config = resolve_config(a);
  config.jobs = c.jobs;
  if (all) *all = a;
  return config;
}

fs::path prepare_out(const Common& c, const ExperimentConfig& config) {
  const fs::path out(c.out);
  fs::create_directories(out);
  write_text(out / "config.ini", dump_config(config));
  return out;
}

void print_label(const MotionLabel& label) {
  std::cout << "motion=" << motion_name(label.kind) << "\n"
            << "crossings=" << label.crossings << "\n"
            << "k_statistic=" << format_double(label.k_statistic) << "\n";
}

void cmd_simulate(const Common& c, std::size_t stride, bool write_csv) {
  const ExperimentConfig config = resolve(c);
  const HarvesterParams params = config.nominal;
  const auto& in = config.integrator;
  const Trajectory traj = integrate(params, in.ic, in.t_end, in.dt);
  if (write_csv) {
    const fs::path out = prepare_out(c, config);
    write_trajectory_csv(out / "trajectory.csv", traj, stride);
  }
  std::cout << "mean_power=" << format_double(mean_power(traj, in.transient_fraction)) << "\n";
  const Trajectory steady = steady_window(traj, in.transient_fraction);
  try {
    print_label(classify_motion(steady, params));
  } catch (const Error& e) {
    // a short run still yields a trajectory; only the label is unavailable
    if (!write_csv || e.code() != ErrorCode::TooShort) throw;
    std::cout << "motion=unclassified\n";
    std::cerr << "warning: " << e.what() << "\n";
  }
}

void cmd_sample(const Common& c, std::optional<std::size_t> n, bool evaluate) {
  const ExperimentConfig config = resolve(c);
  const double f = config.f_sweep.front();
  const RandomInputSpec spec = build_spec(config, f);
  const SampleMatrix x =
      sample(spec, n.value_or(config.pce.samples), case_seed(config, f, Stream::Training));
  const fs::path out = prepare_out(c, config);
  if (evaluate) {
    const std::vector<double> y = evaluate_model(spec, x, config.integrator, config.jobs);
    write_samples_csv(out / "samples.csv", spec, x, &y);
  } else {
    write_samples_csv(out / "samples.csv", spec, x);
  }
  std::cout << "rows=" << x.rows << "\ncols=" << x.cols << "\n";
}

// Quadratic in the standardized coordinates; a total-degree-2 surrogate is exact.
double synthetic_quadratic(const RandomInputSpec& spec, std::span<const double> row) {
  std::vector<double> z(row.size());
  for (std::size_t j = 0; j < row.size(); ++j) z[j] = to_standard(row[j], spec.entries()[j].support);
  double y = 1.0 + 0.5 * z[0] + 0.25 * z[0] * z[0];
  if (z.size() > 1) y += 0.5 * z[0] * z[1] - 0.3 * z.back() * z.back();
  return y;
}

void cmd_fit(const Common& c, bool synthetic) {
  const ExperimentConfig config = resolve(c);
  const double f = config.f_sweep.front();
  const RandomInputSpec spec = build_spec(config, f);
  const SampleMatrix x = sample(spec, config.pce.samples, case_seed(config, f, Stream::Training));
  std::vector<double> y;
  if (synthetic) {
    for (std::size_t i = 0; i < x.rows; ++i) y.push_back(synthetic_quadratic(spec, x.row(i)));
  } else {
    y = evaluate_model(spec, x, config.integrator, config.jobs);
  }
  const PceSurrogate s =
      fit_least_squares(spec, x, y, config.pce.degree, FitOptions{config.pce.oversampling});
  const fs::path out = prepare_out(c, config);
  write_text(out / "surrogate.json", serialize(s) + "\n");
  write_text(out / "diagnostics.json", diagnostics_json(s));
  std::cout << "mean=" << format_double(mean(s)) << "\n"
            << "std=" << format_double(std::sqrt(variance(s))) << "\n"
            << "loo=" << format_double(s.diagnostics.loo) << "\n"
            << "condition=" << format_double(s.diagnostics.condition) << "\n";
}

void cmd_maps(const Common& c) {
  const ExperimentConfig config = resolve(c);
  const fs::path out = prepare_out(c, config);
  for (double f : config.f_sweep) {
    const CaseResult r = run_case(config, f);
    write_case_artifacts(out, config, r);
    std::cout << "f=" << format_double(f) << " source=" << source_name(r.source)
              << " modes=" << power_density(r.cloud, config.stats).modes
              << " motion=" << motion_name(r.nominal_motion.kind) << "\n";
  }
}

void cmd_condprob(const Common& c) {
  const ExperimentConfig config = resolve(c);
  const fs::path out = prepare_out(c, config);
  std::vector<AmplitudeCase> cases;
  for (double f : config.f_sweep) {
    const CaseResult r = run_case(config, f);
    cases.push_back({f, r.cloud, r.nominal_motion.kind});
  }
  const auto points = cond_prob_curve(cases, config.stats.domain, config.stats.gain);
  write_condprob_csv(out / "condprob.csv", points);
  for (const auto& p : points) {
    std::cout << "f=" << format_double(p.f_nominal) << " " << param_name(p.parameter) << " p="
              << (p.empty_event ? std::string("nan") : format_double(p.prob.probability))
              << " motion=" << motion_name(p.motion) << "\n";
  }
}

void cmd_bands(const Common& c, const std::vector<std::string>& names) {
  const ExperimentConfig config = resolve(c);
  std::vector<Param> params;
  for (const auto& n : names) {
    const auto p = param_from_name(n);
    if (!p) throw Error(ErrorCode::Config, "unknown parameter '" + n + "'");
    params.push_back(*p);
  }
  if (params.empty()) params = config.random;
  const std::vector<double> amplitudes =
      c.numbers.at("model.f") ? std::vector<double>{config.f_sweep.front()}
                              : config.stats.band_amplitudes;
  const fs::path out = prepare_out(c, config);
  for (double f : amplitudes) {
    for (Param p : params) {
      const BandResult band = run_band(config, f, p);
      char name[64];
      std::snprintf(name, sizeof name, "f%g_band_%s.csv", f, std::string(param_name(p)).c_str());
      write_band_csv(out / name, band);
      std::cout << name << " area=" << format_double(band.area) << "\n";
    }
  }
}

int cmd_sweep(const Common& c) {
  ConfigAssignments a;
  resolve(c, &a);
  const auto entries = sweep_entries(a);
  const SweepSummary s = run_sweep(entries, c.out, c.jobs,
                                   [](const std::string& msg) { std::cerr << msg << "\n"; });
  std::cout << "cases=" << s.cases << "\nfailed=" << s.failed << "\n";
  if (s.failed == 0) return 0;
  return s.numerical_failure ? 2 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bistable energy harvester simulation and uncertainty quantification"};
  app.require_subcommand(1);

  Common common;
  std::size_t stride = 1;
  std::optional<std::size_t> n_rows;
  bool evaluate = false;
  bool synthetic = false;
  std::vector<std::string> band_params;

  auto* simulate = app.add_subcommand("simulate", "integrate one trajectory and label it");
  simulate->add_option("--stride", stride, "write every stride-th step")->check(CLI::PositiveNumber);
  auto* classify = app.add_subcommand("classify", "label the steady-state motion");
  auto* sample_cmd = app.add_subcommand("sample", "draw the random-input matrix");
  sample_cmd->add_option("--n", n_rows, "number of rows");
  sample_cmd->add_flag("--evaluate", evaluate, "append the mean power of every row");
  auto* fit = app.add_subcommand("fit", "fit the PCE surrogate for one amplitude");
  fit->add_flag("--synthetic", synthetic, "fit a known quadratic instead of the model");
  auto* maps = app.add_subcommand("maps", "power densities and conditional CDF maps");
  auto* condprob = app.add_subcommand("condprob", "conditional improvement probabilities");
  auto* bands = app.add_subcommand("bands", "uncertainty bands over time");
  bands->add_option("--param", band_params, "random parameter(s); default all");
  auto* sweep = app.add_subcommand("sweep", "full output tree for every variant");
  for (auto* sub : {simulate, classify, sample_cmd, fit, maps, condprob, bands, sweep}) {
    add_common(*sub, common);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*simulate) cmd_simulate(common, stride, true);
    if (*classify) cmd_simulate(common, 1, false);
    if (*sample_cmd) cmd_sample(common, n_rows, evaluate);
    if (*fit) cmd_fit(common, synthetic);
    if (*maps) cmd_maps(common);
    if (*condprob) cmd_condprob(common);
    if (*bands) cmd_bands(common, band_params);
    if (*sweep) return cmd_sweep(common);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return is_numerical(e.code()) ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
