// Acceptance suite: one [PASS]/[FAIL] line per criterion, nonzero exit on any failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "bistable/classify.hpp"
#include "bistable/config.hpp"
#include "bistable/dynamics.hpp"
#include "bistable/error.hpp"
#include "bistable/experiment.hpp"
#include "bistable/pce.hpp"
#include "bistable/probability.hpp"
#include "bistable/statistics.hpp"
#include "oracles.hpp"

using namespace bistable;
namespace fs = std::filesystem;

namespace {

// 1e5-sample Monte Carlo of the symmetric-linear mean power (tests/oracles/mc_oracle.cpp,
// seed 12345), independent of the library.
struct McMoments {
  double f, mean, std, se_mean, se_std;
};
constexpr McMoments kOracle[] = {
    {0.041, 4.0866881317764284e-04, 5.6381562497499001e-04, 1.7829415553122837e-06,
     2.3010911393175518e-06},
    {0.250, 1.9199432052526482e-02, 5.5151300113009585e-03, 1.7440372427661202e-05,
     1.1773940753691635e-05},
};

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::map<double, CaseResult>& sym_cases() {
  static std::map<double, CaseResult> cache;
  return cache;
}

const CaseResult& sym_case(double f) {
  auto& cache = sym_cases();
  auto it = cache.find(f);
  if (it == cache.end()) it = cache.emplace(f, run_case(resolve_config({}), f)).first;
  return it->second;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

HarvesterParams nominal_of(Variant v, double f) {
  ExperimentConfig c = ExperimentConfig::defaults(v);
  return case_params(c, f);
}

Outcome c1_integrator_order() {
  HarvesterParams p;
  p.kappa = 0.0;
  p.lambda = 0.05;
  auto err = [&](double dt) {
    return std::abs(integrate(p, {0, 0, 1.0}, 1.0, dt).states.back().v - std::exp(-p.lambda));
  };
  const double ratio = err(0.5) / err(0.25);
  IntegratorSettings fine;
  fine.dt = 0.005;
  const HarvesterParams h = nominal_of(Variant::SymmetricLinear, 0.041);
  const double coarse = simulate_mean_power(h, IntegratorSettings{});
  const double refined = simulate_mean_power(h, fine);
  const double rel = std::abs(coarse - refined) / std::abs(refined);
  return {ratio >= 12.0 && ratio <= 20.0 && rel < 1e-4,
          fmt("ratio=%.4f in [12,20]; mean power dt .01 vs .005 rel=%.3e < 1e-4", ratio, rel)};
}

Outcome c2_power_identity() {
  std::size_t checked = 0, bad = 0;
  const fs::path dir = fs::temp_directory_path() / "bistable_acceptance_traj";
  fs::create_directories(dir);
  for (Variant v : {Variant::SymmetricLinear, Variant::SymmetricNonlinear, Variant::Asymmetric}) {
    for (double f : {0.041, 0.091, 0.25}) {
      const HarvesterParams p = nominal_of(v, f);
      const Trajectory tr = integrate(p, {1, 0, 0}, 400.0, 0.01);
      for (std::size_t i = 0; i < tr.size(); ++i, ++checked) {
        if (tr.power[i] != p.lambda * tr.states[i].v * tr.states[i].v) ++bad;
      }
      // the emitted CSV carries the same identity after parsing
      const fs::path file = dir / "traj.csv";
      write_trajectory_csv(file, tr, 7);
      std::ifstream in(file);
      std::string line;
      std::getline(in, line);
      while (std::getline(in, line)) {
        double t, x, xd, vv, pw;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf", &t, &x, &xd, &vv, &pw) != 5) ++bad;
        else if (pw != p.lambda * vv * vv) ++bad;
        ++checked;
      }
    }
  }
  fs::remove_all(dir);
  return {bad == 0 && checked > 0, fmt("%zu samples, %zu violations of P = lambda v^2", checked, bad)};
}

Outcome c3_maxent() {
  double worst = 0.0;
  for (auto [a, b] : {std::pair{0.0, 1.0}, std::pair{0.04, 0.06}, std::pair{0.64, 0.96},
                      std::pair{-3.0, 5.0}}) {
    const std::size_t n = 2001;
    std::vector<double> u(n, 1.0 / (b - a));
    worst = std::max(worst, std::abs(entropy(u, a, b) - std::log(b - a)));
  }
  const double a = 0.4, b = 0.6, w = b - a;
  const std::size_t n = 4001;
  auto tab = [&](auto q) {
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = q(a + w * static_cast<double>(i) / (n - 1));
    return d;
  };
  const double h_uniform = entropy(tab([&](double) { return 1.0 / w; }), a, b);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> amp(-0.45, 0.45);
  int beaten = 0;
  double smallest_gap = 1e300;
  for (int m = 0; m < 50; ++m) {
    const int k1 = 1 + m % 5, k2 = 2 + m % 7;
    const double c1 = amp(rng), c2 = amp(rng);
    const double h = entropy(tab([&](double x) {
                               const double z = (x - a) / w;
                               return (1.0 + c1 * std::cos(2 * std::numbers::pi * k1 * z) +
                                       c2 * std::cos(2 * std::numbers::pi * k2 * z)) / w;
                             }),
                             a, b);
    if (h < h_uniform) ++beaten;
    smallest_gap = std::min(smallest_gap, h_uniform - h);
  }
  return {worst < 1e-8 && beaten == 50,
          fmt("|H - ln(b-a)| max %.2e < 1e-8; uniform beats %d/50 perturbations (min gap %.2e)",
              worst, beaten, smallest_gap)};
}

RandomInputSpec unit_box(std::size_t m) {
  const Param order[] = {Param::lambda, Param::kappa, Param::f, Param::omega};
  std::vector<RandomEntry> entries;
  const UniformInterval iv[] = {{0.04, 0.06}, {0.4, 0.6}, {0.02, 0.05}, {0.64, 0.96}};
  for (std::size_t j = 0; j < m; ++j) entries.push_back({order[j], iv[j], iv[j].midpoint()});
  std::map<Param, double> fixed;
  const HarvesterParams nominal;
  for (Param p : kAllParams) {
    if (std::none_of(entries.begin(), entries.end(),
                     [&](const RandomEntry& e) { return e.param == p; })) {
      fixed[p] = nominal.get(p);
    }
  }
  return RandomInputSpec(entries, fixed);
}

// Calls fn(xi, weight) over the m-fold tensor Gauss-Legendre rule for the uniform measure.
void tensor_quadrature(std::size_t m, std::size_t points,
                       const std::function<void(const std::vector<double>&, double)>& fn) {
  const auto q = oracle::gauss_legendre(points);
  std::vector<std::size_t> k(m, 0);
  std::vector<double> xi(m);
  while (true) {
    double w = 1.0;
    for (std::size_t j = 0; j < m; ++j) {
      xi[j] = q.nodes[k[j]];
      w *= 0.5 * q.weights[k[j]];
    }
    fn(xi, w);
    std::size_t j = 0;
    while (j < m && ++k[j] == points) k[j++] = 0;
    if (j == m) break;
  }
}

Outcome c4_pce() {
  double gram_err = 0.0;
  for (std::size_t m = 1; m <= 3; ++m) {
    for (unsigned d = 0; d <= 4; ++d) {
      const auto set = total_degree_set(m, d);
      std::vector<double> gram(set.size() * set.size(), 0.0), psi(set.size());
      tensor_quadrature(m, 16, [&](const std::vector<double>& xi, double w) {
        for (std::size_t a = 0; a < set.size(); ++a) psi[a] = basis_eval(set[a], xi);
        for (std::size_t a = 0; a < set.size(); ++a) {
          for (std::size_t b = 0; b < set.size(); ++b) gram[a * set.size() + b] += w * psi[a] * psi[b];
        }
      });
      for (std::size_t a = 0; a < set.size(); ++a) {
        for (std::size_t b = 0; b < set.size(); ++b) {
          gram_err = std::max(gram_err, std::abs(gram[a * set.size() + b] - (a == b ? 1.0 : 0.0)));
        }
      }
    }
  }

  // Parseval: moments from coefficients against quadrature of the surrogate itself
  const RandomInputSpec spec = unit_box(3);
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  const SampleMatrix x = sample(spec, 300, 5);
  std::vector<double> y;
  for (std::size_t i = 0; i < x.rows; ++i) {
    const double a = to_standard(x(i, 0), spec.entries()[0].support);
    const double b = to_standard(x(i, 1), spec.entries()[1].support);
    y.push_back(std::exp(a) * std::sin(2.0 * b) + 0.1 * g(rng));
  }
  const PceSurrogate s = fit_least_squares(spec, x, y, 3);
  double m1 = 0.0, m2 = 0.0;
  tensor_quadrature(3, 16, [&](const std::vector<double>& xi, double w) {
    const double v = predict_standard(s, xi);
    m1 += w * v;
    m2 += w * v * v;
  });
  const double parseval = std::max(std::abs(mean(s) - m1), std::abs(variance(s) - (m2 - m1 * m1)));

  // degree-2 response reproduced exactly
  auto quad = [&](std::span<const double> r) {
    const double a = to_standard(r[0], spec.entries()[0].support);
    const double b = to_standard(r[1], spec.entries()[1].support);
    const double c = to_standard(r[2], spec.entries()[2].support);
    return 0.7 - 1.3 * a + 0.2 * b * c + 2.0 * a * a - 0.5 * c + 0.9 * b * b;
  };
  const SampleMatrix xt = sample(spec, 60, 3);
  std::vector<double> yt;
  for (std::size_t i = 0; i < xt.rows; ++i) yt.push_back(quad(xt.row(i)));
  const PceSurrogate s2 = fit_least_squares(spec, xt, yt, 2);
  const SampleMatrix fresh = sample(spec, 1000, 4);
  double exact = 0.0;
  for (std::size_t i = 0; i < fresh.rows; ++i) {
    exact = std::max(exact, std::abs(predict(s2, fresh.row(i)) - quad(fresh.row(i))));
  }
  return {gram_err < 1e-10 && parseval < 1e-8 && exact < 1e-8,
          fmt("Gram max dev %.2e < 1e-10; Parseval dev %.2e < 1e-8; degree-2 max err %.2e < 1e-8",
              gram_err, parseval, exact)};
}

Outcome c5_surrogate_vs_mc() {
  bool ok = true;
  std::string detail;
  for (const McMoments& o : kOracle) {
    const CaseResult& r = sym_case(o.f);
    const double m = mean(*r.surrogate);
    const double sd = std::sqrt(variance(*r.surrogate));
    const double tol_m = std::max(0.02 * o.mean, 3.0 * o.se_mean);
    const double tol_s = std::max(0.02 * o.std, 3.0 * o.se_std);
    const bool pass = std::abs(m - o.mean) <= tol_m && std::abs(sd - o.std) <= tol_s;
    ok = ok && pass;
    detail += fmt("f=%.3f mean %.5e vs %.5e (tol %.1e) std %.5e vs %.5e (tol %.1e) loo %.3f%s; ",
                  o.f, m, o.mean, tol_m, sd, o.std, tol_s, r.surrogate->diagnostics.loo,
                  pass ? "" : " MISMATCH");
  }
  return {ok, detail};
}

Outcome c6_regimes() {
  const std::pair<double, MotionKind> anchors[] = {{0.041, MotionKind::Intrawell},
                                                   {0.091, MotionKind::Chaotic},
                                                   {0.250, MotionKind::InterwellRegular}};
  bool ok = true;
  std::string detail;
  const IntegratorSettings s;
  for (auto [f, want] : anchors) {
    const HarvesterParams p = nominal_of(Variant::SymmetricLinear, f);
    const Trajectory tr = integrate(p, s.ic, s.t_end, s.dt);
    const MotionLabel l = classify_motion(steady_window(tr, s.transient_fraction), p);
    ok = ok && l.kind == want;
    detail += fmt("f=%.3f %s (K=%.3f, crossings=%zu); ", f, std::string(motion_name(l.kind)).c_str(),
                  l.k_statistic, l.crossings);
  }
  return {ok, detail};
}

Outcome c7_modality() {
  const ExperimentConfig c = resolve_config({});
  bool ok = true;
  std::string detail;
  for (double f : c.f_sweep) {
    if (f == 0.115) continue;
    const std::size_t want = f <= 0.105 ? 2 : 1;
    const std::size_t got = power_density(sym_case(f).cloud, c.stats).modes;
    ok = ok && got == want;
    detail += fmt("f=%.3f:%zu%s ", f, got, got == want ? "" : (want == 2 ? " (want 2)" : " (want 1)"));
  }
  return {ok, detail};
}

std::string fmt_prob(const CondProb& p) {
  return fmt("%.3f [%.3f, %.3f] n=%zu", p.probability, p.ci_lo, p.ci_hi, p.n_event);
}

Outcome c8_condprob_symmetric() {
  const CondProb om = cond_prob_increase(sym_case(0.041).cloud,
                                         domain_event(Param::omega, DomainFamily::D1), 0.5);
  const CondProb ff =
      cond_prob_increase(sym_case(0.091).cloud, domain_event(Param::f, DomainFamily::D1), 0.5);
  const CondProb ka = cond_prob_increase(sym_case(0.25).cloud,
                                         domain_event(Param::kappa, DomainFamily::D1), 0.5);
  const bool ok = om.probability > 0.8 && std::abs(ff.probability - 0.4) <= 0.1 &&
                  std::abs(ka.probability - 0.2) <= 0.1;
  return {ok, "P(omega) f=0.041 " + fmt_prob(om) + " > 0.8; P(f) f=0.091 " + fmt_prob(ff) +
                  " in 0.4+-0.1; P(kappa) f=0.250 " + fmt_prob(ka) + " in 0.2+-0.1"};
}

Outcome c9_condprob_asymmetric() {
  const CaseResult r = run_case(resolve_config({{"model.variant", "asymmetric"}}), 0.041);
  const CondProb om = cond_prob_increase(r.cloud, domain_event(Param::omega, DomainFamily::D1), 0.5);
  return {std::abs(om.probability - 0.7) <= 0.1,
          "P(omega) f=0.041 " + fmt_prob(om) + " in 0.7+-0.1 (source " +
              std::string(source_name(r.source)) + ")"};
}

Outcome c10_bands() {
  const ExperimentConfig c = resolve_config({});
  const double om = run_band(c, 0.041, Param::omega).area;
  const double lam = run_band(c, 0.041, Param::lambda).area;
  return {om / lam > 2.0, fmt("area omega %.4e / lambda %.4e = %.2f > 2", om, lam, om / lam)};
}

Outcome c11_determinism() {
  const ConfigAssignments mini = parse_config_text(R"(
[model]
f_sweep = 0.041, 0.25
[integrator]
t_end = 1600
[pce]
degree = 1
samples = 100
[stats]
draws = 2000
mc_samples = 100
bins = 2
power_grid = 20
kde_points = 64
band_members = 20
band_amplitudes = 0.25
)");
  const fs::path root = fs::temp_directory_path() / "bistable_acceptance_sweep";
  fs::remove_all(root);
  const auto entries = sweep_entries(mini);
  run_sweep(entries, root / "a", 1);
  run_sweep(entries, root / "b", 1);
  std::size_t files = 0, differ = 0;
  for (const auto& e : fs::recursive_directory_iterator(root / "a")) {
    if (!e.is_regular_file()) continue;
    ++files;
    const fs::path other = root / "b" / fs::relative(e.path(), root / "a");
    if (!fs::exists(other) || slurp(e.path()) != slurp(other)) ++differ;
  }
  std::size_t files_b = 0;
  for (const auto& e : fs::recursive_directory_iterator(root / "b")) files_b += e.is_regular_file();
  fs::remove_all(root);

  const PceSurrogate& s = *sym_case(0.25).surrogate;
  const std::string text = serialize(s);
  const PceSurrogate back = deserialize(text);
  double drift = back.coeffs.size() == s.coeffs.size() ? 0.0 : 1.0;
  for (std::size_t i = 0; i < s.coeffs.size() && i < back.coeffs.size(); ++i) {
    drift = std::max(drift, std::abs(back.coeffs[i] - s.coeffs[i]));
  }
  const bool same_text = serialize(back) == text;
  return {files > 0 && files == files_b && differ == 0 && drift == 0.0 && same_text,
          fmt("%zu files, %zu differ; surrogate coefficient drift %.1e, re-serialization %s", files,
              differ, drift, same_text ? "identical" : "differs")};
}

}  // namespace

int main() {
  const std::pair<const char*, Outcome (*)()> criteria[] = {
      {"1 integrator order", c1_integrator_order},
      {"2 power identity", c2_power_identity},
      {"3 maximum entropy", c3_maxent},
      {"4 PCE orthonormality and moments", c4_pce},
      {"5 surrogate vs Monte Carlo", c5_surrogate_vs_mc},
      {"6 regime anchors", c6_regimes},
      {"7 distribution modality", c7_modality},
      {"8 conditional probabilities, symmetric", c8_condprob_symmetric},
      {"9 conditional probability, asymmetric", c9_condprob_asymmetric},
      {"10 band widths", c10_bands},
      {"11 determinism and serialization", c11_determinism},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(std::size(criteria)) - failed,
              std::size(criteria));
  return failed == 0 ? 0 : 1;
}
