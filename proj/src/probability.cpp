#include "bistable/probability.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "bistable/error.hpp"
#include "bistable/random.hpp"

namespace bistable {

RandomInputSpec::RandomInputSpec(std::vector<RandomEntry> entries, std::map<Param, double> fixed)
    : entries_(std::move(entries)), fixed_(std::move(fixed)) {
  std::set<Param> seen;
  for (const auto& e : entries_) {
    if (!seen.insert(e.param).second) {
      throw Error(ErrorCode::Config,
                  "parameter " + std::string(param_name(e.param)) + " listed twice as random");
    }
    if (!(e.support.a < e.support.b)) {
      throw Error(ErrorCode::BadSupport,
                  "empty support for " + std::string(param_name(e.param)));
    }
    if (fixed_.count(e.param) != 0) {
      throw Error(ErrorCode::Config, "parameter " + std::string(param_name(e.param)) +
                                         " is both random and fixed");
    }
  }
  for (Param p : kAllParams) {
    if (seen.count(p) == 0 && fixed_.count(p) == 0) {
      throw Error(ErrorCode::Config,
                  "parameter " + std::string(param_name(p)) + " is neither random nor fixed");
    }
  }
}

int RandomInputSpec::column_of(Param param) const {
  for (std::size_t j = 0; j < entries_.size(); ++j) {
    if (entries_[j].param == param) return static_cast<int>(j);
  }
  return -1;
}

HarvesterParams RandomInputSpec::assemble(std::span<const double> row) const {
  if (row.size() != entries_.size()) {
    throw Error(ErrorCode::InvalidArgument, "sample row has wrong dimension");
  }
  HarvesterParams params;
  for (const auto& [param, value] : fixed_) params.set(param, value);
  for (std::size_t j = 0; j < entries_.size(); ++j) params.set(entries_[j].param, row[j]);
  return params;
}

HarvesterParams RandomInputSpec::nominal() const {
  HarvesterParams params;
  for (const auto& [param, value] : fixed_) params.set(param, value);
  for (const auto& e : entries_) params.set(e.param, e.nominal);
  return params;
}

double entropy(std::span<const double> density, double a, double b) {
  if (!(a < b)) throw Error(ErrorCode::BadSupport, "entropy support must satisfy a < b");
  if (density.size() < 2) throw Error(ErrorCode::InvalidArgument, "density needs >= 2 nodes");
  const double h = (b - a) / static_cast<double>(density.size() - 1);
  auto trapz = [&](auto&& g) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < density.size(); ++i) s += g(density[i]) + g(density[i + 1]);
    return 0.5 * h * s;
  };
  for (double p : density) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw Error(ErrorCode::InvalidArgument, "density must be finite and nonnegative");
    }
  }
  const double mass = trapz([](double p) { return p; });
  if (std::abs(mass - 1.0) > 1e-8) {
    throw Error(ErrorCode::NotNormalized, "density integrates to " + std::to_string(mass));
  }
  return -trapz([](double p) { return p > 0.0 ? p * std::log(p) : 0.0; });
}

UniformInterval maxent_uniform(double a, double b) {
  if (!(a < b)) throw Error(ErrorCode::BadSupport, "support must satisfy a < b");
  return {a, b};
}

UniformInterval interval_from_nominal(double nominal, double spread,
                                      std::optional<double> half_width) {
  if (!(spread > 0.0 && spread < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "spread must be in (0, 1)");
  }
  if (nominal == 0.0) {
    if (!half_width || !(*half_width > 0.0)) {
      throw Error(ErrorCode::ZeroNominal, "zero nominal needs an absolute half-width");
    }
    return {-*half_width, *half_width};
  }
  const double lo = nominal * (1.0 - spread);
  const double hi = nominal * (1.0 + spread);
  return {std::min(lo, hi), std::max(lo, hi)};
}

SampleMatrix sample(const RandomInputSpec& spec, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "sample count must be >= 1");
  SampleMatrix out;
  out.rows = n;
  out.cols = spec.dimension();
  out.data.resize(n * out.cols);
  const CounterRng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < out.cols; ++j) {
      const auto& iv = spec.entries()[j].support;
      const double u = static_cast<double>(rng.at(i * out.cols + j) >> 11) * 0x1.0p-53;
      out.data[i * out.cols + j] = iv.a + (iv.b - iv.a) * u;
    }
  }
  return out;
}

double to_standard(double x, const UniformInterval& iv) {
  const double slack = 1e-12 * std::max({1.0, std::abs(iv.a), std::abs(iv.b)});
  if (!iv.contains(x, slack)) {
    throw Error(ErrorCode::OutOfSupport, std::to_string(x) + " outside [" +
                                             std::to_string(iv.a) + ", " + std::to_string(iv.b) +
                                             "]");
  }
  return std::clamp(((x - iv.a) - (iv.b - x)) / (iv.b - iv.a), -1.0, 1.0);
}

double from_standard(double xi, const UniformInterval& iv) {
  return 0.5 * (iv.a + iv.b) + 0.5 * (iv.b - iv.a) * xi;
}

}  // namespace bistable
