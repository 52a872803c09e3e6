#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "bistable/classify.hpp"
#include "bistable/probability.hpp"

namespace bistable {

// Mean-power realizations together with the parameter draws that produced them.
struct QoISamples {
  std::vector<double> values;
  SampleMatrix inputs;        // rows aligned with values, columns = spec entries
  std::vector<Param> columns;  // parameter of each input column
  std::vector<double> nominal_inputs;  // X-bar of each column
  double nominal_power = 0.0;

  int column_of(Param param) const;
};

// Type-7 (linear interpolation) empirical quantile of unsorted data.
double quantile(std::span<const double> values, double prob);
double quantile_sorted(std::span<const double> sorted, double prob);

// (v - mean) / s with the sample (n - 1) standard deviation.
// Throws DegenerateSpread for zero spread.
std::vector<double> normalize(std::span<const double> values);

// 0.9 min(s, IQR / 1.34) n^(-1/5); falls back to s when the IQR vanishes.
double silverman_bandwidth(std::span<const double> values);

// n_points equally spaced over [min - 3h, max + 3h].
std::vector<double> kde_grid(std::span<const double> values, double bandwidth,
                             std::size_t n_points);

// Gaussian kernel density estimate evaluated on `grid`; Silverman bandwidth by
// default. Throws EmptyInput for fewer than 10 values.
std::vector<double> kde(std::span<const double> values, std::span<const double> grid,
                        std::optional<double> bandwidth = std::nullopt);

// Strict interior local maxima of a sampled curve, counting each plateau once.
// Maxima lower than min_relative_height * global max are ignored (0 keeps all).
std::size_t modality(std::span<const double> density, double min_relative_height = 0.0);

struct ConditionalMap {
  Param parameter = Param::f;
  std::vector<double> param_grid;  // bin centres, ascending
  std::vector<double> bin_edges;   // param_grid.size() + 1 quantile edges
  std::vector<double> power_grid;  // ascending
  // cdf[b][k] = P(power <= power_grid[k] | parameter in bin b)
  std::vector<std::vector<double>> cdf;
};

// Equal-probability bins along one parameter, empirical CDF of power in each.
// Every other parameter stays random. Throws TooFewSamples below 50 samples per bin.
ConditionalMap conditional_cdf_map(const QoISamples& q, Param parameter,
                                   std::size_t n_param_bins = 20,
                                   std::size_t n_power_grid = 200);

enum class EventShape { AtLeastFactorOfNominal, AbsAtLeast, AbsAtMost };

struct Event {
  Param param = Param::f;
  EventShape shape = EventShape::AtLeastFactorOfNominal;
  double threshold = 1.1;  // factor of nominal, or absolute bound

  bool holds(double value, double nominal) const;
};

enum class DomainFamily { D1, D2 };

std::string_view domain_name(DomainFamily family);

// Conditioning event for `param` in the given family: X >= 1.1 X-bar for the
// scale parameters, |delta| vs 0.1 and |phi| vs 10 degrees for the asymmetries.
Event domain_event(Param param, DomainFamily family);

struct CondProb {
  double probability = 0.0;
  double ci_lo = 0.0;  // Wilson 95 % interval
  double ci_hi = 1.0;
  std::size_t n_event = 0;
  bool wide_ci = false;  // fewer than 100 samples in the event
};

// Wilson score interval for k successes out of n at 95 %.
std::pair<double, double> wilson_interval(std::size_t successes, std::size_t n);

// P(power >= (1 + gain) nominal_power | event). Throws EmptyEvent.
CondProb cond_prob_increase(const QoISamples& q, const Event& event, double gain = 0.5);

struct AmplitudeCase {
  double f_nominal = 0.0;
  QoISamples samples;
  MotionKind motion = MotionKind::Intrawell;
};

struct CondProbPoint {
  double f_nominal = 0.0;
  Param parameter = Param::f;
  CondProb prob;
  MotionKind motion = MotionKind::Intrawell;
  bool empty_event = false;
};

// One point per (amplitude, random parameter); empty events are flagged, not fatal.
std::vector<CondProbPoint> cond_prob_curve(std::span<const AmplitudeCase> cases,
                                           DomainFamily family, double gain = 0.5);

struct Band {
  std::vector<double> lower;
  std::vector<double> median;
  std::vector<double> upper;
};

// Pointwise empirical quantile band [(1 - level) / 2, (1 + level) / 2].
// Throws GridMismatch for ragged ensembles, TooFewSamples under 40 members.
Band confidence_band(std::span<const std::vector<double>> ensemble, double level = 0.95,
                     std::size_t min_members = 40);

// Trapezoidal integral of (upper - lower) with uniform spacing dt.
double band_area(const Band& band, double dt);

}  // namespace bistable
