#include "bistable/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "bistable/error.hpp"

namespace bistable {

int QoISamples::column_of(Param param) const {
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (columns[j] == param) return static_cast<int>(j);
  }
  return -1;
}

double quantile_sorted(std::span<const double> sorted, double prob) {
  if (sorted.empty()) throw Error(ErrorCode::EmptyInput, "quantile of empty data");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * std::clamp(prob, 0.0, 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double quantile(std::span<const double> values, double prob) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  return quantile_sorted(sorted, prob);
}

namespace {

struct Moments {
  double mean = 0.0;
  double sd = 0.0;  // sample (n - 1) standard deviation
};

Moments moments(std::span<const double> v) {
  Moments m;
  const auto n = static_cast<double>(v.size());
  m.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - m.mean) * (x - m.mean);
  m.sd = v.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  return m;
}

}  // namespace

std::vector<double> normalize(std::span<const double> values) {
  if (values.size() < 2) throw Error(ErrorCode::EmptyInput, "normalize needs >= 2 values");
  const Moments m = moments(values);
  if (!(m.sd > 0.0)) throw Error(ErrorCode::DegenerateSpread, "zero standard deviation");
  std::vector<double> out(values.size());
  std::transform(values.begin(), values.end(), out.begin(),
                 [&](double v) { return (v - m.mean) / m.sd; });
  return out;
}

double silverman_bandwidth(std::span<const double> values) {
  if (values.size() < 2) throw Error(ErrorCode::EmptyInput, "bandwidth needs >= 2 values");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double sd = moments(values).sd;
  const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
  const double spread = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
  if (!(spread > 0.0)) throw Error(ErrorCode::DegenerateSpread, "bandwidth of constant data");
  return 0.9 * spread * std::pow(static_cast<double>(values.size()), -0.2);
}

std::vector<double> kde_grid(std::span<const double> values, double bandwidth,
                             std::size_t n_points) {
  if (values.empty()) throw Error(ErrorCode::EmptyInput, "kde grid of empty data");
  if (n_points < 2) throw Error(ErrorCode::InvalidArgument, "kde grid needs >= 2 points");
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it - 3.0 * bandwidth;
  const double hi = *hi_it + 3.0 * bandwidth;
  std::vector<double> grid(n_points);
  for (std::size_t i = 0; i < n_points; ++i) {
    grid[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n_points - 1);
  }
  return grid;
}

std::vector<double> kde(std::span<const double> values, std::span<const double> grid,
                        std::optional<double> bandwidth) {
  if (values.size() < 10) throw Error(ErrorCode::EmptyInput, "kde needs >= 10 values");
  const double h = bandwidth ? *bandwidth : silverman_bandwidth(values);
  if (!(h > 0.0)) throw Error(ErrorCode::InvalidArgument, "bandwidth must be > 0");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  // Kernel mass beyond 9 bandwidths is below 1e-17 and is skipped.
  const double reach = 9.0 * h;
  const double norm = 1.0 / (static_cast<double>(sorted.size()) * h *
                             std::sqrt(2.0 * std::numbers::pi));
  std::vector<double> out(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const auto first = std::lower_bound(sorted.begin(), sorted.end(), grid[g] - reach);
    const auto last = std::upper_bound(first, sorted.end(), grid[g] + reach);
    double acc = 0.0;
    for (auto it = first; it != last; ++it) {
      const double z = (grid[g] - *it) / h;
      acc += std::exp(-0.5 * z * z);
    }
    out[g] = acc * norm;
  }
  return out;
}

std::size_t modality(std::span<const double> density, double min_relative_height) {
  if (density.size() < 5) throw Error(ErrorCode::InvalidArgument, "modality needs >= 5 points");
  const double peak = *std::max_element(density.begin(), density.end());
  const double floor_height = min_relative_height * peak;
  std::size_t count = 0;
  std::size_t i = 1;
  while (i + 1 < density.size()) {
    std::size_t j = i;
    while (j + 1 < density.size() && density[j + 1] == density[i]) ++j;
    const bool interior = j + 1 < density.size();
    if (interior && density[i - 1] < density[i] && density[j + 1] < density[i] &&
        density[i] >= floor_height) {
      ++count;
    }
    i = j + 1;
  }
  return count;
}

ConditionalMap conditional_cdf_map(const QoISamples& q, Param parameter,
                                   std::size_t n_param_bins, std::size_t n_power_grid) {
  const int col = q.column_of(parameter);
  if (col < 0) {
    throw Error(ErrorCode::InvalidArgument,
                "parameter " + std::string(param_name(parameter)) + " is not random");
  }
  if (n_param_bins == 0 || n_power_grid < 2) {
    throw Error(ErrorCode::InvalidArgument, "need >= 1 bin and >= 2 power grid points");
  }
  const std::size_t n = q.values.size();
  if (n < 50 * n_param_bins) {
    throw Error(ErrorCode::TooFewSamples, std::to_string(n) + " samples for " +
                                              std::to_string(n_param_bins) + " bins");
  }

  std::vector<double> column(n);
  for (std::size_t i = 0; i < n; ++i) column[i] = q.inputs(i, static_cast<std::size_t>(col));
  std::vector<double> sorted_col = column;
  std::sort(sorted_col.begin(), sorted_col.end());

  ConditionalMap map;
  map.parameter = parameter;
  map.bin_edges.resize(n_param_bins + 1);
  for (std::size_t b = 0; b <= n_param_bins; ++b) {
    map.bin_edges[b] =
        quantile_sorted(sorted_col, static_cast<double>(b) / static_cast<double>(n_param_bins));
  }
  for (std::size_t b = 0; b < n_param_bins; ++b) {
    map.param_grid.push_back(0.5 * (map.bin_edges[b] + map.bin_edges[b + 1]));
  }

  std::vector<std::vector<double>> bins(n_param_bins);
  for (std::size_t i = 0; i < n; ++i) {
    const auto interior_end = map.bin_edges.end() - 1;
    const auto it = std::upper_bound(map.bin_edges.begin() + 1, interior_end, column[i]);
    bins[static_cast<std::size_t>(it - (map.bin_edges.begin() + 1))].push_back(q.values[i]);
  }

  const auto [lo_it, hi_it] = std::minmax_element(q.values.begin(), q.values.end());
  map.power_grid.resize(n_power_grid);
  for (std::size_t k = 0; k < n_power_grid; ++k) {
    map.power_grid[k] = *lo_it + (*hi_it - *lo_it) * static_cast<double>(k) /
                                     static_cast<double>(n_power_grid - 1);
  }
  map.power_grid.back() = *hi_it;

  for (auto& bin : bins) {
    if (bin.empty()) throw Error(ErrorCode::TooFewSamples, "empty parameter bin");
    std::sort(bin.begin(), bin.end());
    std::vector<double> cdf(n_power_grid);
    for (std::size_t k = 0; k < n_power_grid; ++k) {
      const auto below = std::upper_bound(bin.begin(), bin.end(), map.power_grid[k]) - bin.begin();
      cdf[k] = static_cast<double>(below) / static_cast<double>(bin.size());
    }
    map.cdf.push_back(std::move(cdf));
  }
  return map;
}

bool Event::holds(double value, double nominal) const {
  switch (shape) {
    case EventShape::AtLeastFactorOfNominal: return value >= threshold * nominal;
    case EventShape::AbsAtLeast: return std::abs(value) >= threshold;
    case EventShape::AbsAtMost: return std::abs(value) <= threshold;
  }
  return false;
}

std::string_view domain_name(DomainFamily family) {
  return family == DomainFamily::D1 ? "D1" : "D2";
}

Event domain_event(Param param, DomainFamily family) {
  const bool strong = family == DomainFamily::D1;
  switch (param) {
    case Param::delta:
      return {param, strong ? EventShape::AbsAtLeast : EventShape::AbsAtMost, 0.1};
    case Param::phi:
      return {param, strong ? EventShape::AbsAtLeast : EventShape::AbsAtMost,
              10.0 * std::numbers::pi / 180.0};
    default:
      return {param, EventShape::AtLeastFactorOfNominal, 1.1};
  }
}

std::pair<double, double> wilson_interval(std::size_t successes, std::size_t n) {
  if (n == 0) return {0.0, 1.0};
  constexpr double z = 1.959963984540054;
  const double nn = static_cast<double>(n);
  const double phat = static_cast<double>(successes) / nn;
  const double denom = 1.0 + z * z / nn;
  const double centre = (phat + z * z / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(phat * (1.0 - phat) / nn + z * z / (4.0 * nn * nn)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

CondProb cond_prob_increase(const QoISamples& q, const Event& event, double gain) {
  const int col = q.column_of(event.param);
  if (col < 0) {
    throw Error(ErrorCode::InvalidArgument,
                "parameter " + std::string(param_name(event.param)) + " is not random");
  }
  const auto c = static_cast<std::size_t>(col);
  const double nominal = q.nominal_inputs.at(c);
  const double target = (1.0 + gain) * q.nominal_power;
  std::size_t in_event = 0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < q.values.size(); ++i) {
    if (!event.holds(q.inputs(i, c), nominal)) continue;
    ++in_event;
    if (q.values[i] >= target) ++hits;
  }
  if (in_event == 0) {
    throw Error(ErrorCode::EmptyEvent,
                "no sample satisfies the event on " + std::string(param_name(event.param)));
  }
  CondProb out;
  out.n_event = in_event;
  out.probability = static_cast<double>(hits) / static_cast<double>(in_event);
  std::tie(out.ci_lo, out.ci_hi) = wilson_interval(hits, in_event);
  out.wide_ci = in_event < 100;
  return out;
}

std::vector<CondProbPoint> cond_prob_curve(std::span<const AmplitudeCase> cases,
                                           DomainFamily family, double gain) {
  std::vector<CondProbPoint> out;
  for (const auto& c : cases) {
    for (Param param : c.samples.columns) {
      CondProbPoint point;
      point.f_nominal = c.f_nominal;
      point.parameter = param;
      point.motion = c.motion;
      try {
        point.prob = cond_prob_increase(c.samples, domain_event(param, family), gain);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::EmptyEvent) throw;
        point.empty_event = true;
        point.prob = CondProb{0.0, 0.0, 1.0, 0, true};
      }
      out.push_back(point);
    }
  }
  return out;
}

Band confidence_band(std::span<const std::vector<double>> ensemble, double level,
                     std::size_t min_members) {
  if (ensemble.size() < min_members) {
    throw Error(ErrorCode::TooFewSamples, "band needs >= " + std::to_string(min_members) +
                                              " members, got " + std::to_string(ensemble.size()));
  }
  if (!(level >= 0.0 && level < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "band level must be in [0, 1)");
  }
  const std::size_t len = ensemble.front().size();
  for (const auto& member : ensemble) {
    if (member.size() != len) throw Error(ErrorCode::GridMismatch, "ensemble grids differ");
  }
  Band band;
  band.lower.resize(len);
  band.median.resize(len);
  band.upper.resize(len);
  const double p_lo = 0.5 * (1.0 - level);
  const double p_hi = 0.5 * (1.0 + level);
  std::vector<double> column(ensemble.size());
  for (std::size_t k = 0; k < len; ++k) {
    for (std::size_t m = 0; m < ensemble.size(); ++m) column[m] = ensemble[m][k];
    std::sort(column.begin(), column.end());
    band.lower[k] = quantile_sorted(column, p_lo);
    band.median[k] = quantile_sorted(column, 0.5);
    band.upper[k] = quantile_sorted(column, p_hi);
  }
  return band;
}

double band_area(const Band& band, double dt) {
  double area = 0.0;
  for (std::size_t k = 0; k + 1 < band.lower.size(); ++k) {
    area += 0.5 * dt *
            ((band.upper[k] - band.lower[k]) + (band.upper[k + 1] - band.lower[k + 1]));
  }
  return area;
}

}  // namespace bistable
