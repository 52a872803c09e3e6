#include "bistable/pce.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <numeric>

#include "bistable/error.hpp"
#include "json.hpp"

namespace bistable {

unsigned MultiIndex::total_degree() const {
  return std::accumulate(degrees.begin(), degrees.end(), 0u);
}

double legendre_1d(unsigned n, double xi) {
  double prev = 1.0;
  double cur = xi;
  if (n == 0) return 1.0;
  for (unsigned k = 1; k < n; ++k) {
    const double next = ((2.0 * k + 1.0) * xi * cur - k * prev) / (k + 1.0);
    prev = cur;
    cur = next;
  }
  return std::sqrt(2.0 * n + 1.0) * cur;
}

void legendre_table(unsigned max_degree, double xi, std::span<double> out) {
  if (out.size() < max_degree + 1) {
    throw Error(ErrorCode::InvalidArgument, "legendre_table output too small");
  }
  double prev = 1.0;
  double cur = xi;
  out[0] = 1.0;
  if (max_degree == 0) return;
  out[1] = std::sqrt(3.0) * xi;
  for (unsigned k = 1; k < max_degree; ++k) {
    const double next = ((2.0 * k + 1.0) * xi * cur - k * prev) / (k + 1.0);
    prev = cur;
    cur = next;
    out[k + 1] = std::sqrt(2.0 * k + 3.0) * cur;
  }
}

namespace {

void compositions(std::size_t pos, unsigned remaining, std::vector<unsigned>& cur,
                  std::vector<MultiIndex>& out) {
  if (pos + 1 == cur.size()) {
    cur[pos] = remaining;
    out.push_back({cur});
    return;
  }
  for (unsigned v = remaining + 1; v-- > 0;) {
    cur[pos] = v;
    compositions(pos + 1, remaining - v, cur, out);
  }
}

// Per-coordinate Legendre tables for one standardized point, laid out as
// table[j * (degree + 1) + n].
void fill_tables(std::span<const double> xi, unsigned degree, std::vector<double>& table) {
  const std::size_t stride = degree + 1;
  table.resize(xi.size() * stride);
  for (std::size_t j = 0; j < xi.size(); ++j) {
    legendre_table(degree, xi[j], std::span<double>(table.data() + j * stride, stride));
  }
}

double product_from_tables(const MultiIndex& idx, const std::vector<double>& table,
                           std::size_t stride) {
  double v = 1.0;
  for (std::size_t j = 0; j < idx.degrees.size(); ++j) v *= table[j * stride + idx.degrees[j]];
  return v;
}

std::vector<double> standardize(const RandomInputSpec& spec, std::span<const double> x) {
  if (x.size() != spec.dimension()) {
    throw Error(ErrorCode::InvalidArgument, "point dimension does not match the surrogate");
  }
  std::vector<double> xi(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) xi[j] = to_standard(x[j], spec.entries()[j].support);
  return xi;
}

}  // namespace

std::vector<MultiIndex> total_degree_set(std::size_t dimension, unsigned max_degree) {
  if (dimension == 0) throw Error(ErrorCode::InvalidArgument, "dimension must be >= 1");
  std::vector<MultiIndex> out;
  std::vector<unsigned> cur(dimension, 0);
  for (unsigned d = 0; d <= max_degree; ++d) compositions(0, d, cur, out);
  return out;
}

double basis_eval(const MultiIndex& idx, std::span<const double> xi) {
  if (idx.degrees.size() != xi.size()) {
    throw Error(ErrorCode::InvalidArgument, "multi-index and point dimensions differ");
  }
  double v = 1.0;
  for (std::size_t j = 0; j < xi.size(); ++j) v *= legendre_1d(idx.degrees[j], xi[j]);
  return v;
}

PceSurrogate fit_least_squares(const RandomInputSpec& spec, const SampleMatrix& x,
                               std::span<const double> y, unsigned degree,
                               const FitOptions& options) {
  const std::size_t m = spec.dimension();
  if (m == 0) throw Error(ErrorCode::InvalidArgument, "no random parameters");
  if (x.cols != m) throw Error(ErrorCode::InvalidArgument, "sample matrix has wrong width");
  if (y.size() != x.rows) throw Error(ErrorCode::InvalidArgument, "y and X row counts differ");

  PceSurrogate s;
  s.spec = spec;
  s.degree = degree;
  s.indices = total_degree_set(m, degree);
  const std::size_t terms = s.indices.size();
  const std::size_t n = x.rows;
  if (static_cast<double>(n) < options.oversampling * static_cast<double>(terms)) {
    throw Error(ErrorCode::Underdetermined,
                std::to_string(n) + " samples for " + std::to_string(terms) +
                    " terms at oversampling " + std::to_string(options.oversampling));
  }

  Eigen::MatrixXd design(n, terms);
  std::vector<double> table;
  const std::size_t stride = degree + 1;
  for (std::size_t i = 0; i < n; ++i) {
    fill_tables(standardize(spec, x.row(i)), degree, table);
    for (std::size_t a = 0; a < terms; ++a) {
      design(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(a)) =
          product_from_tables(s.indices[a], table, stride);
    }
  }
  const Eigen::Map<const Eigen::VectorXd> rhs(y.data(), static_cast<Eigen::Index>(n));

  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  const Eigen::VectorXd c = qr.solve(rhs);
  s.coeffs.assign(c.data(), c.data() + c.size());

  const auto p = static_cast<Eigen::Index>(terms);
  const Eigen::MatrixXd r = qr.matrixR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
  const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(r).singularValues();
  const double smin = sv(sv.size() - 1);
  s.diagnostics.condition = smin > 0.0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
  s.diagnostics.ill_conditioned = !(s.diagnostics.condition <= kIllConditioned);
  s.diagnostics.rank = static_cast<std::size_t>(qr.rank());
  s.diagnostics.n_samples = n;

  // Leverages h_i = |Q1(i, :)|^2 from the thin orthogonal factor.
  const auto rank = static_cast<Eigen::Index>(s.diagnostics.rank);
  const Eigen::MatrixXd q1 =
      qr.householderQ() * Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), rank);
  const Eigen::VectorXd leverage = q1.rowwise().squaredNorm();
  const Eigen::VectorXd residual = rhs - design * c;

  const double y_mean = rhs.mean();
  const double y_var = (rhs.array() - y_mean).square().sum() / static_cast<double>(n - 1);
  double press = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const double denom = 1.0 - leverage(ii);
    if (denom <= 1e-12) {
      press = std::numeric_limits<double>::infinity();
      break;
    }
    const double e = residual(ii) / denom;
    press += e * e;
  }
  press /= static_cast<double>(n);
  s.diagnostics.loo = y_var > 0.0 ? press / y_var : 0.0;
  return s;
}

double predict_standard(const PceSurrogate& s, std::span<const double> xi) {
  if (xi.size() != s.spec.dimension()) {
    throw Error(ErrorCode::InvalidArgument, "point dimension does not match the surrogate");
  }
  std::vector<double> table;
  fill_tables(xi, s.degree, table);
  double acc = 0.0;
  for (std::size_t a = 0; a < s.indices.size(); ++a) {
    acc += s.coeffs[a] * product_from_tables(s.indices[a], table, s.degree + 1);
  }
  return acc;
}

double predict(const PceSurrogate& s, std::span<const double> x) {
  return predict_standard(s, standardize(s.spec, x));
}

std::vector<double> predict_rows(const PceSurrogate& s, const SampleMatrix& x) {
  std::vector<double> out(x.rows);
  for (std::size_t i = 0; i < x.rows; ++i) out[i] = predict(s, x.row(i));
  return out;
}

double mean(const PceSurrogate& s) { return s.coeffs.at(0); }

double variance(const PceSurrogate& s) {
  double v = 0.0;
  for (std::size_t a = 1; a < s.coeffs.size(); ++a) v += s.coeffs[a] * s.coeffs[a];
  return v;
}

double loo_error(const PceSurrogate& s) { return s.diagnostics.loo; }

namespace {

using nlohmann::json;

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_or_inf(const json& v) {
  return v.is_null() ? std::numeric_limits<double>::infinity() : v.get<double>();
}

Param param_or_throw(const std::string& name) {
  const auto p = param_from_name(name);
  if (!p) throw Error(ErrorCode::Config, "unknown parameter '" + name + "'");
  return *p;
}

}  // namespace

std::string serialize(const PceSurrogate& s) {
  json doc;
  doc["format"] = "bistable-pce";
  doc["version"] = 1;
  json random = json::array();
  for (const auto& e : s.spec.entries()) {
    random.push_back({{"name", std::string(param_name(e.param))},
                      {"a", e.support.a},
                      {"b", e.support.b},
                      {"nominal", e.nominal}});
  }
  json fixed = json::array();
  for (const auto& [param, value] : s.spec.fixed()) {
    fixed.push_back({{"name", std::string(param_name(param))}, {"value", value}});
  }
  doc["spec"] = {{"random", random}, {"fixed", fixed}};
  doc["degree"] = s.degree;
  json terms = json::array();
  for (std::size_t a = 0; a < s.indices.size(); ++a) {
    terms.push_back({{"index", s.indices[a].degrees}, {"coeff", s.coeffs[a]}});
  }
  doc["terms"] = terms;
  doc["diagnostics"] = {{"condition", finite_or_null(s.diagnostics.condition)},
                        {"loo", finite_or_null(s.diagnostics.loo)},
                        {"n_samples", s.diagnostics.n_samples},
                        {"rank", s.diagnostics.rank},
                        {"ill_conditioned", s.diagnostics.ill_conditioned}};
  return doc.dump(2) + "\n";
}

PceSurrogate deserialize(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
    if (doc.at("format") != "bistable-pce") {
      throw Error(ErrorCode::Config, "not a surrogate document");
    }
    std::vector<RandomEntry> entries;
    for (const auto& e : doc.at("spec").at("random")) {
      entries.push_back({param_or_throw(e.at("name").get<std::string>()),
                         {e.at("a").get<double>(), e.at("b").get<double>()},
                         e.at("nominal").get<double>()});
    }
    std::map<Param, double> fixed;
    for (const auto& e : doc.at("spec").at("fixed")) {
      fixed[param_or_throw(e.at("name").get<std::string>())] = e.at("value").get<double>();
    }
    PceSurrogate s;
    s.spec = RandomInputSpec(std::move(entries), std::move(fixed));
    s.degree = doc.at("degree").get<unsigned>();
    for (const auto& t : doc.at("terms")) {
      s.indices.push_back({t.at("index").get<std::vector<unsigned>>()});
      s.coeffs.push_back(t.at("coeff").get<double>());
    }
    const auto& d = doc.at("diagnostics");
    s.diagnostics.condition = number_or_inf(d.at("condition"));
    s.diagnostics.loo = number_or_inf(d.at("loo"));
    s.diagnostics.n_samples = d.at("n_samples").get<std::size_t>();
    s.diagnostics.rank = d.at("rank").get<std::size_t>();
    s.diagnostics.ill_conditioned = d.at("ill_conditioned").get<bool>();
    if (s.indices.empty() || s.indices.front().total_degree() != 0) {
      throw Error(ErrorCode::Config, "surrogate must start with the all-zeros index");
    }
    for (const auto& idx : s.indices) {
      if (idx.degrees.size() != s.spec.dimension()) {
        throw Error(ErrorCode::Config, "multi-index dimension mismatch");
      }
    }
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Config, std::string("malformed surrogate document: ") + e.what());
  }
}

}  // namespace bistable
