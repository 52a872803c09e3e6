#pragma once

#include <span>
#include <string>
#include <vector>

#include "bistable/probability.hpp"

namespace bistable {

struct MultiIndex {
  std::vector<unsigned> degrees;

  unsigned total_degree() const;
  bool operator==(const MultiIndex&) const = default;
};

// sqrt(2n+1) P_n(xi): orthonormal under the uniform density 1/2 on [-1, 1].
double legendre_1d(unsigned n, double xi);

// Values of legendre_1d(0..max_degree, xi) in one recurrence sweep.
void legendre_table(unsigned max_degree, double xi, std::span<double> out);

// All multi-indices of total degree <= max_degree, graded by total degree and
// lexicographically descending within a grade. The all-zeros index comes first;
// the count is C(dimension + max_degree, max_degree).
std::vector<MultiIndex> total_degree_set(std::size_t dimension, unsigned max_degree);

double basis_eval(const MultiIndex& idx, std::span<const double> xi);

struct FitDiagnostics {
  double condition = 0.0;  // 2-norm condition number of the design matrix
  double loo = 0.0;        // leave-one-out error normalized by the response variance
  std::size_t n_samples = 0;
  std::size_t rank = 0;
  bool ill_conditioned = false;  // condition above kIllConditioned
};

inline constexpr double kIllConditioned = 1e8;

struct PceSurrogate {
  RandomInputSpec spec;
  unsigned degree = 0;
  std::vector<MultiIndex> indices;
  std::vector<double> coeffs;
  FitDiagnostics diagnostics;
};

struct FitOptions {
  double oversampling = 2.0;
};

// Least-squares coefficients of the total-degree expansion, solved with a
// column-pivoted Householder QR of the design matrix. Throws Underdetermined
// when rows < oversampling * terms.
PceSurrogate fit_least_squares(const RandomInputSpec& spec, const SampleMatrix& x,
                               std::span<const double> y, unsigned degree,
                               const FitOptions& options = {});

// Evaluate at a point in physical units (Error(OutOfSupport) outside).
double predict(const PceSurrogate& s, std::span<const double> x);

// Evaluate at a point already mapped to [-1, 1]^M.
double predict_standard(const PceSurrogate& s, std::span<const double> xi);

// Batch evaluation, one value per row.
std::vector<double> predict_rows(const PceSurrogate& s, const SampleMatrix& x);

double mean(const PceSurrogate& s);
double variance(const PceSurrogate& s);
double loo_error(const PceSurrogate& s);

// JSON document with the spec, degree, indices, coefficients and diagnostics.
// Doubles are written in shortest round-trip form, so parsing restores them
// bit for bit.
std::string serialize(const PceSurrogate& s);
PceSurrogate deserialize(const std::string& text);

}  // namespace bistable
