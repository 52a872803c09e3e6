#include "bistable/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "bistable/error.hpp"

namespace bistable {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(value);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* why) {
  throw Error(ErrorCode::Config, key + " = '" + value + "': " + why);
}

double to_double(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) {
    bad_value(key, value, "expected a finite number");
  }
  return out;
}

std::uint64_t to_uint(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    bad_value(key, value, "expected a nonnegative integer");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad_value(key, value, "expected true or false");
}

std::vector<double> to_doubles(const std::string& key, const std::string& value) {
  std::vector<double> out;
  for (const auto& item : split_list(value)) out.push_back(to_double(key, item));
  return out;
}

Param to_param(const std::string& key, const std::string& name) {
  const auto p = param_from_name(name);
  if (!p) bad_value(key, name, "unknown parameter");
  return *p;
}

void apply(ExperimentConfig& c, const std::string& key, const std::string& value) {
  const auto dot = key.find('.');
  if (dot == std::string::npos) throw Error(ErrorCode::Config, "key '" + key + "' has no section");
  const std::string section = key.substr(0, dot);
  const std::string name = key.substr(dot + 1);

  if (section == "model") {
    if (name == "variant") {
      const auto v = variant_from_name(trim(value));
      if (!v) bad_value(key, value, "expected sym-linear, sym-nonlinear or asymmetric");
      c.variant = *v;
    } else if (name == "f_sweep") {
      c.f_sweep = to_doubles(key, value);
    } else if (name == "f") {
      c.f_sweep = {to_double(key, value)};
    } else if (name == "phi_deg") {
      c.nominal.phi = to_double(key, value) * kDeg;
    } else if (const auto p = param_from_name(name)) {
      c.nominal.set(*p, to_double(key, value));
    } else {
      throw Error(ErrorCode::Config, "unknown key '" + key + "'");
    }
  } else if (section == "random") {
    if (name == "params") {
      c.random.clear();
      for (const auto& item : split_list(value)) c.random.push_back(to_param(key, item));
    } else if (name == "spread") {
      c.spread = to_double(key, value);
    } else if (name == "seed") {
      c.seed = to_uint(key, value);
    } else if (name.rfind("support.", 0) == 0) {
      std::string pname = name.substr(8);
      double scale = 1.0;
      if (pname == "phi_deg") {
        pname = "phi";
        scale = kDeg;
      }
      const Param p = to_param(key, pname);
      const auto bounds = to_doubles(key, value);
      if (bounds.size() != 2 || !(bounds[0] < bounds[1])) {
        bad_value(key, value, "expected 'a, b' with a < b");
      }
      c.supports[p] = {bounds[0] * scale, bounds[1] * scale};
    } else {
      throw Error(ErrorCode::Config, "unknown key '" + key + "'");
    }
  } else if (section == "integrator") {
    auto& in = c.integrator;
    if (name == "dt") in.dt = to_double(key, value);
    else if (name == "t_end") in.t_end = to_double(key, value);
    else if (name == "transient_fraction") in.transient_fraction = to_double(key, value);
    else if (name == "x0") in.ic.x = to_double(key, value);
    else if (name == "xdot0") in.ic.xdot = to_double(key, value);
    else if (name == "v0") in.ic.v = to_double(key, value);
    else throw Error(ErrorCode::Config, "unknown key '" + key + "'");
  } else if (section == "pce") {
    auto& p = c.pce;
    if (name == "degree") p.degree = static_cast<unsigned>(to_uint(key, value));
    else if (name == "samples") p.samples = to_uint(key, value);
    else if (name == "oversampling") p.oversampling = to_double(key, value);
    else if (name == "loo_threshold") p.loo_threshold = to_double(key, value);
    else throw Error(ErrorCode::Config, "unknown key '" + key + "'");
  } else if (section == "stats") {
    auto& s = c.stats;
    if (name == "bins") s.bins = to_uint(key, value);
    else if (name == "power_grid") s.power_grid = to_uint(key, value);
    else if (name == "draws") s.draws = to_uint(key, value);
    else if (name == "mc_samples") s.mc_samples = to_uint(key, value);
    else if (name == "kde_points") s.kde_points = to_uint(key, value);
    else if (name == "mode_min_height") s.mode_min_height = to_double(key, value);
    else if (name == "gain") s.gain = to_double(key, value);
    else if (name == "band_level") s.band_level = to_double(key, value);
    else if (name == "band_members") s.band_members = to_uint(key, value);
    else if (name == "band_stride") s.band_stride = to_uint(key, value);
    else if (name == "band_amplitudes") s.band_amplitudes = to_doubles(key, value);
    else if (name == "mc") c.use_mc = to_bool(key, value);
    else if (name == "domain") {
      const std::string v = trim(value);
      if (v == "D1") s.domain = DomainFamily::D1;
      else if (v == "D2") s.domain = DomainFamily::D2;
      else bad_value(key, value, "expected D1 or D2");
    } else {
      throw Error(ErrorCode::Config, "unknown key '" + key + "'");
    }
  } else {
    throw Error(ErrorCode::Config, "unknown section '" + section + "'");
  }
}

void validate(const ExperimentConfig& c) {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw Error(ErrorCode::Config, msg);
  };
  require(c.spread > 0.0 && c.spread < 1.0, "random.spread must be in (0, 1)");
  require(!c.random.empty(), "random.params must list at least one parameter");
  require(!c.f_sweep.empty(), "model.f_sweep must not be empty");
  for (double f : c.f_sweep) require(f >= 0.0, "model.f_sweep amplitudes must be >= 0");
  require(c.integrator.dt > 0.0 && c.integrator.t_end > 0.0, "integrator dt and t_end must be > 0");
  require(c.integrator.transient_fraction >= 0.0 && c.integrator.transient_fraction < 1.0,
          "integrator.transient_fraction must be in [0, 1)");
  require(c.pce.oversampling >= 1.0, "pce.oversampling must be >= 1");
  require(c.pce.samples >= 2, "pce.samples must be >= 2");
  require(c.stats.bins >= 1 && c.stats.power_grid >= 2, "stats bins/power_grid too small");
  require(c.stats.kde_points >= 5, "stats.kde_points must be >= 5");
  require(c.stats.band_level >= 0.0 && c.stats.band_level < 1.0, "stats.band_level in [0, 1)");
  require(c.stats.band_stride >= 1, "stats.band_stride must be >= 1");
  require(c.stats.draws >= 10 && c.stats.mc_samples >= 10, "stats draw counts must be >= 10");

  // The symmetric models have no asymmetry (and the linear one no beta), so
  // those parameters can be neither random nor nonzero.
  std::vector<Param> gated;
  if (c.variant != Variant::Asymmetric) gated = {Param::delta, Param::phi};
  if (c.variant == Variant::SymmetricLinear) gated.push_back(Param::beta);
  for (Param p : gated) {
    require(std::find(c.random.begin(), c.random.end(), p) == c.random.end(),
            std::string(param_name(p)) + " cannot be random for variant " +
                std::string(variant_name(c.variant)));
    require(c.nominal.get(p) == 0.0, std::string(param_name(p)) + " must be 0 for variant " +
                                         std::string(variant_name(c.variant)));
  }
  require(c.nominal.variant() == c.variant,
          "model parameters describe variant " + std::string(variant_name(c.nominal.variant())) +
              ", not " + std::string(variant_name(c.variant)));
  std::vector<Param> seen;
  for (Param p : c.random) {
    require(std::find(seen.begin(), seen.end(), p) == seen.end(),
            "random.params lists " + std::string(param_name(p)) + " twice");
    seen.push_back(p);
  }
  HarvesterParams probe = c.nominal;
  probe.f = c.f_sweep.front();
  try {
    probe.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::Config, e.what());
  }
}

// Shortest text that parses back to the same double.
std::string shortest(double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

ExperimentConfig ExperimentConfig::defaults(Variant variant) {
  ExperimentConfig c;
  c.variant = variant;
  c.nominal = HarvesterParams{};
  c.nominal.f = 0.041;
  c.random = {Param::lambda, Param::kappa, Param::f, Param::omega};
  switch (variant) {
    case Variant::SymmetricLinear:
      break;
    case Variant::SymmetricNonlinear:
      c.nominal.beta = 1.0;
      c.random.push_back(Param::beta);
      break;
    case Variant::Asymmetric:
      c.nominal.beta = 1.0;
      c.nominal.delta = 0.15;
      c.nominal.phi = 10.0 * kDeg;
      c.nominal.p = 0.2;
      c.random.insert(c.random.end(), {Param::beta, Param::delta, Param::phi});
      break;
  }
  return c;
}

ConfigAssignments parse_config_text(const std::string& text) {
  ConfigAssignments out;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw Error(ErrorCode::Config, "line " + std::to_string(lineno) + ": bad section header");
      }
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::Config, "line " + std::to_string(lineno) + ": expected key = value");
    }
    if (section.empty()) {
      throw Error(ErrorCode::Config, "line " + std::to_string(lineno) + ": key outside a section");
    }
    out.emplace_back(section + "." + trim(std::string_view(line).substr(0, eq)),
                     trim(std::string_view(line).substr(eq + 1)));
  }
  return out;
}

ConfigAssignments read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

ExperimentConfig resolve_config(const ConfigAssignments& assignments) {
  Variant variant = Variant::SymmetricLinear;
  for (const auto& [key, value] : assignments) {
    if (key == "model.variant") {
      const auto v = variant_from_name(trim(value));
      if (!v) bad_value(key, value, "expected sym-linear, sym-nonlinear or asymmetric");
      variant = *v;
    }
  }
  ExperimentConfig c = ExperimentConfig::defaults(variant);
  for (const auto& [key, value] : assignments) apply(c, key, value);
  if (!c.f_sweep.empty()) c.nominal.f = c.f_sweep.front();
  // weak-asymmetry events need delta and phi of both signs
  if (c.variant == Variant::Asymmetric && c.stats.domain == DomainFamily::D2) {
    for (Param p : {Param::delta, Param::phi}) {
      if (std::find(c.random.begin(), c.random.end(), p) == c.random.end()) continue;
      const double reach = (1.0 + c.spread) * std::abs(c.nominal.get(p));
      if (reach > 0.0) c.supports.try_emplace(p, UniformInterval{-reach, reach});
    }
  }
  validate(c);
  return c;
}

std::string dump_config(const ExperimentConfig& c) {
  std::ostringstream out;
  auto list = [](const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + shortest(v[i]);
    return s;
  };
  out << "[model]\n";
  out << "variant = " << variant_name(c.variant) << "\n";
  for (Param p : kAllParams) {
    if (p != Param::f) out << param_name(p) << " = " << shortest(c.nominal.get(p)) << "\n";
  }
  out << "f_sweep = " << list(c.f_sweep) << "\n\n";

  out << "[random]\n";
  out << "params = ";
  for (std::size_t i = 0; i < c.random.size(); ++i) {
    out << (i ? ", " : "") << param_name(c.random[i]);
  }
  out << "\nspread = " << shortest(c.spread) << "\n";
  out << "seed = " << c.seed << "\n";
  for (const auto& [p, iv] : c.supports) {
    out << "support." << param_name(p) << " = " << shortest(iv.a) << ", "
        << shortest(iv.b) << "\n";
  }
  out << "\n[integrator]\n";
  out << "dt = " << shortest(c.integrator.dt) << "\n";
  out << "t_end = " << shortest(c.integrator.t_end) << "\n";
  out << "transient_fraction = " << shortest(c.integrator.transient_fraction) << "\n";
  out << "x0 = " << shortest(c.integrator.ic.x) << "\n";
  out << "xdot0 = " << shortest(c.integrator.ic.xdot) << "\n";
  out << "v0 = " << shortest(c.integrator.ic.v) << "\n\n";

  out << "[pce]\n";
  out << "degree = " << c.pce.degree << "\n";
  out << "samples = " << c.pce.samples << "\n";
  out << "oversampling = " << shortest(c.pce.oversampling) << "\n";
  out << "loo_threshold = " << shortest(c.pce.loo_threshold) << "\n\n";

  const auto& s = c.stats;
  out << "[stats]\n";
  out << "mc = " << (c.use_mc ? "true" : "false") << "\n";
  out << "bins = " << s.bins << "\n";
  out << "power_grid = " << s.power_grid << "\n";
  out << "draws = " << s.draws << "\n";
  out << "mc_samples = " << s.mc_samples << "\n";
  out << "kde_points = " << s.kde_points << "\n";
  out << "mode_min_height = " << shortest(s.mode_min_height) << "\n";
  out << "gain = " << shortest(s.gain) << "\n";
  out << "domain = " << domain_name(s.domain) << "\n";
  out << "band_level = " << shortest(s.band_level) << "\n";
  out << "band_members = " << s.band_members << "\n";
  out << "band_stride = " << s.band_stride << "\n";
  out << "band_amplitudes = " << list(s.band_amplitudes) << "\n";
  return out.str();
}

std::string config_hash(const ExperimentConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : dump_config(config)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

UniformInterval support_for(const ExperimentConfig& config, Param param, double f_nominal) {
  if (const auto it = config.supports.find(param); it != config.supports.end()) return it->second;
  const double nominal = param == Param::f ? f_nominal : config.nominal.get(param);
  try {
    return interval_from_nominal(nominal, config.spread);
  } catch (const Error& e) {
    throw Error(ErrorCode::Config, std::string(param_name(param)) + ": " + e.what());
  }
}

RandomInputSpec build_spec(const ExperimentConfig& config, double f_nominal) {
  HarvesterParams nominal = config.nominal;
  nominal.f = f_nominal;
  std::vector<RandomEntry> entries;
  for (Param p : config.random) {
    entries.push_back({p, support_for(config, p, f_nominal), nominal.get(p)});
  }
  std::map<Param, double> fixed;
  for (Param p : kAllParams) {
    if (std::find(config.random.begin(), config.random.end(), p) == config.random.end()) {
      fixed[p] = nominal.get(p);
    }
  }
  return RandomInputSpec(std::move(entries), std::move(fixed));
}

}  // namespace bistable
