#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "bistable/dynamics.hpp"

namespace bistable {

// Support [a, b] of a uniform random parameter.
struct UniformInterval {
  double a = 0.0;
  double b = 1.0;

  double width() const { return b - a; }
  double density() const { return 1.0 / (b - a); }
  double density_at(double x) const { return (x >= a && x <= b) ? density() : 0.0; }
  double midpoint() const { return 0.5 * (a + b); }
  bool contains(double x, double slack = 0.0) const { return x >= a - slack && x <= b + slack; }

  bool operator==(const UniformInterval&) const = default;
};

struct RandomEntry {
  Param param;
  UniformInterval support;
  double nominal = 0.0;  // reference value X-bar used by conditioning events

  bool operator==(const RandomEntry&) const = default;
};

// Ordered random parameters (the coordinate order of every sample matrix and
// multi-index) plus fixed values for the remaining parameters.
class RandomInputSpec {
 public:
  RandomInputSpec() = default;
  RandomInputSpec(std::vector<RandomEntry> entries, std::map<Param, double> fixed);

  std::size_t dimension() const { return entries_.size(); }
  const std::vector<RandomEntry>& entries() const { return entries_; }
  const std::map<Param, double>& fixed() const { return fixed_; }

  // Column of `param`, or -1 when it is not random.
  int column_of(Param param) const;

  // Full parameter vector for one sample row (length = dimension()).
  HarvesterParams assemble(std::span<const double> row) const;

  // Parameter vector with every random entry at its nominal value.
  HarvesterParams nominal() const;

  bool operator==(const RandomInputSpec&) const = default;

 private:
  std::vector<RandomEntry> entries_;
  std::map<Param, double> fixed_;
};

// Row-major n x M matrix of parameter draws.
struct SampleMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

// Differential entropy -int p ln p of a density tabulated on a uniform grid
// over [a, b], by the trapezoidal rule. Throws NotNormalized when the density
// does not integrate to 1 within 1e-8.
double entropy(std::span<const double> density, double a, double b);

// Maximum-entropy density given only the support: the uniform on [a, b].
// Throws BadSupport when a >= b.
UniformInterval maxent_uniform(double a, double b);

// [nominal (1 - spread), nominal (1 + spread)], ordered. With nominal = 0 an
// absolute half-width is required, otherwise Error(ZeroNominal).
UniformInterval interval_from_nominal(double nominal, double spread,
                                      std::optional<double> half_width = std::nullopt);

// n i.i.d. rows; element (i, j) depends only on (seed, i, j), so any
// partitioning of rows across workers reproduces the same matrix.
SampleMatrix sample(const RandomInputSpec& spec, std::size_t n, std::uint64_t seed);

// Affine map of [a, b] onto [-1, 1]; Error(OutOfSupport) beyond 1e-12 slack.
double to_standard(double x, const UniformInterval& iv);
double from_standard(double xi, const UniformInterval& iv);

}  // namespace bistable
