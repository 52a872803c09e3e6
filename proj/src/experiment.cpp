#include "bistable/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include "bistable/error.hpp"
#include "bistable/random.hpp"
#include "json.hpp"

namespace bistable {

namespace fs = std::filesystem;
using nlohmann::json;

void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(std::max(1u, jobs), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex mutex;
  std::size_t failed_index = n;
  std::exception_ptr failure;
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mutex);
        if (i < failed_index) {
          failed_index = i;
          failure = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::vector<double> evaluate_model(const RandomInputSpec& spec, const SampleMatrix& x,
                                   const IntegratorSettings& integrator, unsigned jobs) {
  std::vector<double> y(x.rows);
  parallel_for(x.rows, jobs, [&](std::size_t i) {
    y[i] = simulate_mean_power(spec.assemble(x.row(i)), integrator);
  });
  return y;
}

std::uint64_t case_seed(const ExperimentConfig& config, double f_nominal, Stream stream) {
  return derive_seed(derive_seed(config.seed, std::bit_cast<std::uint64_t>(f_nominal)),
                     static_cast<std::uint64_t>(stream));
}

std::string_view source_name(CloudSource source) {
  return source == CloudSource::Surrogate ? "surrogate" : "mc";
}

HarvesterParams case_params(const ExperimentConfig& config, double f_nominal) {
  HarvesterParams p = config.nominal;
  p.f = f_nominal;
  return p;
}

namespace {

QoISamples make_cloud(const RandomInputSpec& spec, SampleMatrix x, std::vector<double> y,
                      double nominal_power) {
  QoISamples q;
  q.values = std::move(y);
  q.inputs = std::move(x);
  for (const auto& e : spec.entries()) {
    q.columns.push_back(e.param);
    q.nominal_inputs.push_back(e.nominal);
  }
  q.nominal_power = nominal_power;
  return q;
}

std::size_t term_count(std::size_t dimension, unsigned degree) {
  double c = 1.0;
  for (unsigned k = 1; k <= degree; ++k) {
    c = c * static_cast<double>(dimension + k) / static_cast<double>(k);
  }
  return static_cast<std::size_t>(std::llround(c));
}

}  // namespace

CaseResult run_case(const ExperimentConfig& config, double f_nominal) {
  CaseResult r;
  r.f_nominal = f_nominal;
  r.spec = build_spec(config, f_nominal);

  const HarvesterParams nominal = case_params(config, f_nominal);
  const auto& in = config.integrator;
  const Trajectory traj = integrate(nominal, in.ic, in.t_end, in.dt);
  const double nominal_power = mean_power(traj, in.transient_fraction);
  r.nominal_motion = classify_motion(steady_window(traj, in.transient_fraction), nominal);

  const Stream runs_stream = config.use_mc ? Stream::MonteCarlo : Stream::Training;
  const std::size_t n_runs = config.use_mc ? config.stats.mc_samples : config.pce.samples;
  SampleMatrix x = sample(r.spec, n_runs, case_seed(config, f_nominal, runs_stream));
  std::vector<double> y = evaluate_model(r.spec, x, in, config.jobs);

  const std::size_t terms = term_count(r.spec.dimension(), config.pce.degree);
  if (!config.use_mc ||
      static_cast<double>(n_runs) >= config.pce.oversampling * static_cast<double>(terms)) {
    r.surrogate = fit_least_squares(r.spec, x, y, config.pce.degree,
                                    FitOptions{config.pce.oversampling});
  }
  const bool surrogate_ok = !config.use_mc && std::isfinite(r.surrogate->diagnostics.loo) &&
                            r.surrogate->diagnostics.loo <= config.pce.loo_threshold;
  if (surrogate_ok) {
    SampleMatrix draws =
        sample(r.spec, config.stats.draws, case_seed(config, f_nominal, Stream::Draws));
    std::vector<double> values = predict_rows(*r.surrogate, draws);
    r.cloud = make_cloud(r.spec, std::move(draws), std::move(values), nominal_power);
    r.source = CloudSource::Surrogate;
  } else {
    r.cloud = make_cloud(r.spec, std::move(x), std::move(y), nominal_power);
    r.source = CloudSource::MonteCarlo;
  }
  return r;
}

Density power_density(const QoISamples& cloud, const StatsSettings& stats) {
  Density d;
  const std::vector<double> z = normalize(cloud.values);
  const double h = silverman_bandwidth(z);
  d.power_norm = kde_grid(z, h, stats.kde_points);
  d.density = kde(z, d.power_norm, h);
  d.modes = modality(d.density, stats.mode_min_height);
  return d;
}

BandResult run_band(const ExperimentConfig& config, double f_nominal, Param param) {
  ExperimentConfig single = config;
  single.random = {param};
  const RandomInputSpec spec = build_spec(single, f_nominal);
  const std::uint64_t seed = derive_seed(case_seed(config, f_nominal, Stream::Band),
                                         static_cast<std::uint64_t>(param));
  const SampleMatrix x = sample(spec, config.stats.band_members, seed);
  const auto& in = config.integrator;
  const std::size_t stride = config.stats.band_stride;

  auto windowed_power = [&](const HarvesterParams& p, std::vector<double>* t) {
    const Trajectory traj = integrate(p, in.ic, in.t_end, in.dt);
    const std::size_t start = window_start(traj.size(), in.transient_fraction);
    std::vector<double> out;
    for (std::size_t k = start; k < traj.size(); k += stride) {
      out.push_back(traj.power[k]);
      if (t) t->push_back(traj.t[k]);
    }
    return out;
  };

  BandResult r;
  r.nominal = windowed_power(case_params(config, f_nominal), &r.t);
  std::vector<std::vector<double>> ensemble(x.rows);
  parallel_for(x.rows, config.jobs, [&](std::size_t i) {
    ensemble[i] = windowed_power(spec.assemble(x.row(i)), nullptr);
  });
  r.band = confidence_band(ensemble, config.stats.band_level, std::min<std::size_t>(40, x.rows));
  const double step = r.t.size() > 1 ? r.t[1] - r.t[0] : 0.0;
  r.area = band_area(r.band, step);
  return r;
}

namespace {

class CsvFile {
 public:
  explicit CsvFile(const fs::path& path) : out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw Error(ErrorCode::Io, "cannot write " + path.string());
  }

  void header(std::initializer_list<std::string_view> names) {
    bool first = true;
    for (auto n : names) {
      out_ << (first ? "" : ",") << n;
      first = false;
    }
    out_ << '\n';
  }

  CsvFile& cell(double v) {
    sep() << format_double(v);
    return *this;
  }
  CsvFile& cell(std::string_view s) {
    sep() << s;
    return *this;
  }
  void end() {
    out_ << '\n';
    fresh_ = true;
  }

 private:
  std::ostream& sep() {
    if (!fresh_) out_ << ',';
    fresh_ = false;
    return out_;
  }

  std::ofstream out_;
  bool fresh_ = true;
};

std::string f_tag(double f) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "f%g", f);
  return buf;
}

}  // namespace

void write_trajectory_csv(const fs::path& path, const Trajectory& traj, std::size_t stride) {
  CsvFile csv(path);
  csv.header({"t", "x", "xdot", "v", "P"});
  for (std::size_t i = 0; i < traj.size(); i += std::max<std::size_t>(1, stride)) {
    const State& s = traj.states[i];
    csv.cell(traj.t[i]).cell(s.x).cell(s.xdot).cell(s.v).cell(traj.power[i]).end();
  }
}

void write_samples_csv(const fs::path& path, const RandomInputSpec& spec, const SampleMatrix& x,
                       const std::vector<double>* values) {
  CsvFile csv(path);
  for (std::size_t j = 0; j < spec.dimension(); ++j) {
    csv.cell(param_name(spec.entries()[j].param));
  }
  if (values) csv.cell("mean_power");
  csv.end();
  for (std::size_t i = 0; i < x.rows; ++i) {
    for (std::size_t j = 0; j < x.cols; ++j) csv.cell(x(i, j));
    if (values) csv.cell((*values)[i]);
    csv.end();
  }
}

void write_density_csv(const fs::path& path, const Density& d) {
  CsvFile csv(path);
  csv.header({"power_norm", "density"});
  for (std::size_t i = 0; i < d.power_norm.size(); ++i) {
    csv.cell(d.power_norm[i]).cell(d.density[i]).end();
  }
}

void write_map_csv(const fs::path& path, const ConditionalMap& map) {
  CsvFile csv(path);
  csv.header({"param_value", "power_value", "cdf"});
  for (std::size_t b = 0; b < map.param_grid.size(); ++b) {
    for (std::size_t k = 0; k < map.power_grid.size(); ++k) {
      csv.cell(map.param_grid[b]).cell(map.power_grid[k]).cell(map.cdf[b][k]).end();
    }
  }
}

void write_condprob_csv(const fs::path& path, const std::vector<CondProbPoint>& points) {
  CsvFile csv(path);
  csv.header({"f_nominal", "parameter", "probability", "ci_lo", "ci_hi", "motion"});
  for (const auto& p : points) {
    csv.cell(p.f_nominal).cell(param_name(p.parameter));
    if (p.empty_event) {
      csv.cell("nan").cell("nan").cell("nan");
    } else {
      csv.cell(p.prob.probability).cell(p.prob.ci_lo).cell(p.prob.ci_hi);
    }
    csv.cell(motion_name(p.motion)).end();
  }
}

void write_band_csv(const fs::path& path, const BandResult& band) {
  CsvFile csv(path);
  csv.header({"t", "lower", "nominal", "upper"});
  for (std::size_t k = 0; k < band.t.size(); ++k) {
    csv.cell(band.t[k]).cell(band.band.lower[k]).cell(band.nominal[k]).cell(band.band.upper[k]).end();
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << text;
}

namespace {

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

std::string diagnostics_json(const PceSurrogate& s) {
  json j;
  j["condition"] = finite_or_null(s.diagnostics.condition);
  j["loo"] = finite_or_null(s.diagnostics.loo);
  j["n_samples"] = s.diagnostics.n_samples;
  j["rank"] = s.diagnostics.rank;
  j["degree"] = s.degree;
  j["terms"] = s.coeffs.size();
  j["ill_conditioned"] = s.diagnostics.ill_conditioned;
  j["mean"] = mean(s);
  j["variance"] = variance(s);
  return j.dump(2) + "\n";
}

std::vector<std::string> write_case_artifacts(const fs::path& dir, const ExperimentConfig& config,
                                              const CaseResult& result) {
  std::vector<std::string> files;
  const std::string tag = f_tag(result.f_nominal);
  auto emit = [&](const std::string& name) {
    files.push_back(name);
    return dir / name;
  };
  write_density_csv(emit(tag + "_pdf.csv"), power_density(result.cloud, config.stats));
  for (Param p : result.cloud.columns) {
    const ConditionalMap map =
        conditional_cdf_map(result.cloud, p, config.stats.bins, config.stats.power_grid);
    write_map_csv(emit(tag + "_map_" + std::string(param_name(p)) + ".csv"), map);
  }
  if (result.surrogate) {
    write_text(emit(tag + "_surrogate.json"), serialize(*result.surrogate) + "\n");
    write_text(emit(tag + "_diagnostics.json"), diagnostics_json(*result.surrogate));
  }
  return files;
}

std::vector<SweepEntry> sweep_entries(const ConfigAssignments& assignments) {
  ConfigAssignments base;
  for (const auto& kv : assignments) {
    if (kv.first != "model.variant") base.push_back(kv);
  }
  auto with = [&](ConfigAssignments extra) {
    ConfigAssignments a = base;
    a.insert(a.end(), extra.begin(), extra.end());
    return resolve_config(a);
  };
  std::vector<SweepEntry> out;
  out.push_back({"sym-linear", with({{"model.variant", "sym-linear"}})});
  out.push_back({"sym-nonlinear", with({{"model.variant", "sym-nonlinear"}})});
  out.push_back({"asymmetric-D1", with({{"model.variant", "asymmetric"}, {"stats.domain", "D1"}})});
  out.push_back({"asymmetric-D2", with({{"model.variant", "asymmetric"}, {"stats.domain", "D2"}})});
  return out;
}

SweepSummary run_sweep(const std::vector<SweepEntry>& entries, const fs::path& out, unsigned jobs,
                       const std::function<void(const std::string&)>& log) {
  auto say = [&](const std::string& msg) {
    if (log) log(msg);
  };
  SweepSummary summary;
  auto record_failure = [&](json& node, const Error& e) {
    node["status"] = "failed";
    node["error"] = e.what();
    ++summary.failed;
    if (is_numerical(e.code())) summary.numerical_failure = true;
  };

  fs::create_directories(out);
  json manifest;
  manifest["format"] = "bistable-sweep";
  manifest["version"] = 1;
  manifest["entries"] = json::array();

  for (const auto& entry : entries) {
    ExperimentConfig config = entry.config;
    config.jobs = jobs;
    const fs::path dir = out / entry.name;
    fs::create_directories(dir);
    write_text(dir / "config.ini", dump_config(config));

    json node;
    node["name"] = entry.name;
    node["variant"] = variant_name(config.variant);
    node["seed"] = config.seed;
    node["config_hash"] = config_hash(config);
    node["config"] = entry.name + "/config.ini";
    node["cases"] = json::array();

    std::vector<AmplitudeCase> cases;
    for (double f : config.f_sweep) {
      say(entry.name + " f=" + format_double(f));
      ++summary.cases;
      json c;
      c["f"] = f;
      c["seeds"] = {{"training", case_seed(config, f, Stream::Training)},
                    {"draws", case_seed(config, f, Stream::Draws)},
                    {"mc", case_seed(config, f, Stream::MonteCarlo)}};
      try {
        const CaseResult result = run_case(config, f);
        json files = json::array();
        for (const auto& name : write_case_artifacts(dir, config, result)) {
          files.push_back(entry.name + "/" + name);
        }
        c["status"] = "ok";
        c["artifacts"] = files;
        c["motion"] = motion_name(result.nominal_motion.kind);
        c["crossings"] = result.nominal_motion.crossings;
        c["k_statistic"] = result.nominal_motion.k_statistic;
        c["nominal_power"] = result.cloud.nominal_power;
        c["source"] = source_name(result.source);
        c["loo"] = result.surrogate ? finite_or_null(result.surrogate->diagnostics.loo) : json();
        c["modes"] = power_density(result.cloud, config.stats).modes;
        cases.push_back({f, result.cloud, result.nominal_motion.kind});
      } catch (const Error& e) {
        record_failure(c, e);
      }
      node["cases"].push_back(c);
    }

    json cp;
    cp["file"] = entry.name + "/condprob.csv";
    cp["domain"] = domain_name(config.stats.domain);
    cp["gain"] = config.stats.gain;
    try {
      write_condprob_csv(dir / "condprob.csv",
                         cond_prob_curve(cases, config.stats.domain, config.stats.gain));
      cp["status"] = "ok";
    } catch (const Error& e) {
      record_failure(cp, e);
    }
    node["condprob"] = cp;

    node["bands"] = json::array();
    for (double f : config.stats.band_amplitudes) {
      for (Param p : config.random) {
        const std::string name = f_tag(f) + "_band_" + std::string(param_name(p)) + ".csv";
        say(entry.name + " band " + name);
        json b;
        b["f"] = f;
        b["parameter"] = param_name(p);
        b["file"] = entry.name + "/" + name;
        b["seed"] = derive_seed(case_seed(config, f, Stream::Band), static_cast<std::uint64_t>(p));
        try {
          const BandResult band = run_band(config, f, p);
          write_band_csv(dir / name, band);
          b["status"] = "ok";
          b["area"] = band.area;
        } catch (const Error& e) {
          record_failure(b, e);
        }
        node["bands"].push_back(b);
      }
    }
    manifest["entries"].push_back(node);
  }
  manifest["status"] = summary.failed == 0 ? "ok" : "partial";
  write_text(out / "manifest.json", manifest.dump(2) + "\n");
  return summary;
}

}  // namespace bistable
