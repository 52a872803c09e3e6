#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "bistable/config.hpp"
#include "bistable/error.hpp"
#include "bistable/experiment.hpp"
#include "doctest.h"

using namespace bistable;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Small and fast settings for pipeline tests.
ConfigAssignments tiny() {
  return parse_config_text(R"(
[model]
f_sweep = 0.041, 0.25
[integrator]
t_end = 1600
[pce]
degree = 1
samples = 100
[stats]
draws = 400
mc_samples = 100
bins = 2
power_grid = 20
kde_points = 64
band_members = 20
band_amplitudes = 0.25
)");
}

}  // namespace

TEST_CASE("defaults mirror the nominal harvester") {
  const ExperimentConfig c = resolve_config({});
  CHECK(c.variant == Variant::SymmetricLinear);
  CHECK(c.nominal.xi == 0.01);
  CHECK(c.nominal.chi == 0.05);
  CHECK(c.nominal.lambda == 0.05);
  CHECK(c.nominal.kappa == 0.5);
  CHECK(c.nominal.omega == 0.8);
  CHECK(c.nominal.beta == 0.0);
  CHECK(c.spread == 0.2);
  CHECK(c.f_sweep == std::vector<double>{0.041, 0.060, 0.083, 0.091, 0.105, 0.115, 0.147, 0.200,
                                         0.250});
  CHECK(c.random == std::vector<Param>{Param::lambda, Param::kappa, Param::f, Param::omega});

  const ExperimentConfig a = resolve_config({{"model.variant", "asymmetric"}});
  CHECK(a.nominal.beta == 1.0);
  CHECK(a.nominal.delta == 0.15);
  CHECK(a.nominal.phi == doctest::Approx(10.0 * std::numbers::pi / 180.0));
  CHECK(a.random.size() == 7);
  CHECK(resolve_config({{"model.variant", "sym-nonlinear"}}).random.size() == 5);
}

TEST_CASE("config text parsing") {
  const auto a = parse_config_text("# comment\n[model]\nkappa = 0.4 ; trailing\n\n[pce]\ndegree=4\n");
  REQUIRE(a.size() == 2);
  CHECK(a[0] == std::pair<std::string, std::string>{"model.kappa", "0.4"});
  CHECK(a[1] == std::pair<std::string, std::string>{"pce.degree", "4"});
  const ExperimentConfig c = resolve_config(a);
  CHECK(c.nominal.kappa == 0.4);
  CHECK(c.pce.degree == 4);
  CHECK_THROWS_AS(parse_config_text("kappa = 1\n"), Error);
  CHECK_THROWS_AS(parse_config_text("[model\n"), Error);
  CHECK_THROWS_AS(parse_config_text("[model]\nkappa\n"), Error);
}

TEST_CASE("config validation rejects bad keys and values") {
  auto code_of = [](const ConfigAssignments& a) {
    try {
      resolve_config(a);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InvalidArgument;
  };
  CHECK(code_of({{"model.gamma", "1"}}) == ErrorCode::Config);
  CHECK(code_of({{"nosuch.key", "1"}}) == ErrorCode::Config);
  CHECK(code_of({{"model.kappa", "abc"}}) == ErrorCode::Config);
  CHECK(code_of({{"model.variant", "other"}}) == ErrorCode::Config);
  CHECK(code_of({{"random.spread", "1.5"}}) == ErrorCode::Config);
  CHECK(code_of({{"model.xi", "0"}}) == ErrorCode::Config);
  CHECK(code_of({{"random.support.kappa", "0.6, 0.4"}}) == ErrorCode::Config);
}

TEST_CASE("variant gating keeps asymmetry out of the symmetric models") {
  CHECK_THROWS_AS(resolve_config({{"random.params", "lambda, beta"}}), Error);
  CHECK_THROWS_AS(resolve_config({{"model.beta", "1"}}), Error);
  CHECK_THROWS_AS(resolve_config({{"model.variant", "sym-nonlinear"}, {"model.delta", "0.1"}}),
                  Error);
  CHECK_NOTHROW(resolve_config({{"model.variant", "sym-nonlinear"}, {"random.params", "kappa"}}));

  const ExperimentConfig c = resolve_config({});
  const RandomInputSpec spec = build_spec(c, 0.041);
  for (Param p : {Param::beta, Param::delta, Param::phi}) CHECK(spec.column_of(p) == -1);
  CHECK(spec.dimension() == 4);
}

TEST_CASE("supports follow the spread rule unless overridden") {
  const ExperimentConfig c = resolve_config(
      {{"model.variant", "asymmetric"}, {"random.support.phi_deg", "-12, 12"}});
  const RandomInputSpec spec = build_spec(c, 0.1);
  const auto& e = spec.entries();
  const auto f = e[static_cast<std::size_t>(spec.column_of(Param::f))];
  CHECK(f.support.a == doctest::Approx(0.08));
  CHECK(f.support.b == doctest::Approx(0.12));
  CHECK(f.nominal == 0.1);
  const auto phi = e[static_cast<std::size_t>(spec.column_of(Param::phi))];
  CHECK(phi.support.a == doctest::Approx(-12.0 * std::numbers::pi / 180.0));
  CHECK(phi.support.b == doctest::Approx(12.0 * std::numbers::pi / 180.0));
  const auto delta = e[static_cast<std::size_t>(spec.column_of(Param::delta))];
  CHECK(delta.support.a == doctest::Approx(0.12));
  CHECK(delta.support.b == doctest::Approx(0.18));
  CHECK(spec.fixed().at(Param::p) == 0.2);
}

TEST_CASE("weak-asymmetry events get sign-symmetric delta and phi supports") {
  const double deg12 = 12.0 * std::numbers::pi / 180.0;
  const ExperimentConfig d2 = resolve_config({{"model.variant", "asymmetric"}, {"stats.domain", "D2"}});
  CHECK(d2.supports.at(Param::delta).a == doctest::Approx(-0.18));
  CHECK(d2.supports.at(Param::delta).b == doctest::Approx(0.18));
  CHECK(d2.supports.at(Param::phi).a == doctest::Approx(-deg12));
  CHECK(d2.supports.at(Param::phi).b == doctest::Approx(deg12));
  CHECK(resolve_config({{"model.variant", "asymmetric"}}).supports.empty());

  const ExperimentConfig own = resolve_config({{"model.variant", "asymmetric"},
                                               {"stats.domain", "D2"},
                                               {"random.support.delta", "-0.1, 0.2"}});
  CHECK(own.supports.at(Param::delta).a == -0.1);
  CHECK(own.supports.at(Param::delta).b == 0.2);

  const auto entries = sweep_entries({});
  CHECK(entries[3].name == "asymmetric-D2");
  CHECK(entries[3].config.supports.at(Param::delta).b == doctest::Approx(0.18));
}

TEST_CASE("dumped config resolves to itself") {
  for (const char* v : {"sym-linear", "sym-nonlinear", "asymmetric"}) {
    ConfigAssignments a = {{"model.variant", v},
                           {"model.kappa", "0.45"},
                           {"random.seed", "77"},
                           {"stats.band_amplitudes", "0.05, 0.3"}};
    if (std::string(v) == "asymmetric") a.emplace_back("random.support.delta", "-0.2, 0.2");
    const ExperimentConfig c = resolve_config(a);
    const std::string text = dump_config(c);
    const ExperimentConfig back = resolve_config(parse_config_text(text));
    CHECK(dump_config(back) == text);
    CHECK(config_hash(back) == config_hash(c));
    CHECK(config_hash(c).size() == 16);
  }
  CHECK(config_hash(resolve_config({})) != config_hash(resolve_config({{"random.seed", "1"}})));
}

TEST_CASE("format_double keeps 17 significant digits") {
  CHECK(format_double(0.041) == "0.041000000000000002");
  CHECK(std::stod(format_double(0.1 + 0.2)) == 0.1 + 0.2);
  CHECK(format_double(2000.0) == "2000");
}

TEST_CASE("parallel_for results do not depend on the job count") {
  std::vector<double> a(1000), b(1000);
  parallel_for(a.size(), 1, [&](std::size_t i) { a[i] = std::sin(0.1 * i); });
  parallel_for(b.size(), 4, [&](std::size_t i) { b[i] = std::sin(0.1 * i); });
  CHECK(a == b);
  CHECK_THROWS_AS(parallel_for(10, 3,
                               [](std::size_t i) {
                                 if (i == 6) throw Error(ErrorCode::NonFinite, "boom");
                               }),
                  Error);
}

TEST_CASE("model evaluation is independent of the job count") {
  ExperimentConfig c = resolve_config(tiny());
  const RandomInputSpec spec = build_spec(c, 0.25);
  const SampleMatrix x = sample(spec, 12, case_seed(c, 0.25, Stream::Training));
  CHECK(evaluate_model(spec, x, c.integrator, 1) == evaluate_model(spec, x, c.integrator, 3));
}

TEST_CASE("case seeds differ across streams and amplitudes") {
  const ExperimentConfig c = resolve_config({});
  CHECK(case_seed(c, 0.041, Stream::Training) != case_seed(c, 0.041, Stream::Draws));
  CHECK(case_seed(c, 0.041, Stream::Training) != case_seed(c, 0.06, Stream::Training));
  CHECK(case_seed(c, 0.041, Stream::Band) == case_seed(c, 0.041, Stream::Band));
}

TEST_CASE("a case run yields an aligned sample cloud") {
  const ExperimentConfig c = resolve_config(tiny());
  const CaseResult r = run_case(c, 0.25);
  CHECK(r.cloud.values.size() == r.cloud.inputs.rows);
  CHECK(r.cloud.columns == c.random);
  CHECK(r.cloud.nominal_power > 0.0);
  REQUIRE(r.surrogate);
  CHECK(std::isfinite(r.surrogate->diagnostics.loo));
  if (r.source == CloudSource::Surrogate) CHECK(r.cloud.values.size() == 400);
  if (r.source == CloudSource::MonteCarlo) CHECK(r.cloud.values.size() == 100);

  ExperimentConfig mc = c;
  mc.use_mc = true;
  const CaseResult m = run_case(mc, 0.25);
  CHECK(m.source == CloudSource::MonteCarlo);
  CHECK(m.cloud.values.size() == 100);
}

TEST_CASE("bands of a single random parameter") {
  const ExperimentConfig c = resolve_config(tiny());
  const BandResult b = run_band(c, 0.25, Param::omega);
  CHECK(b.t.size() == b.nominal.size());
  CHECK(b.band.lower.size() == b.t.size());
  CHECK(b.area > 0.0);
  for (std::size_t k = 0; k < b.t.size(); ++k) CHECK(b.band.lower[k] <= b.band.upper[k]);
}

TEST_CASE("sweep output tree is complete and reproducible") {
  const fs::path root = fs::temp_directory_path() / "bistable_sweep_test";
  fs::remove_all(root);
  const auto entries = sweep_entries(tiny());
  REQUIRE(entries.size() == 4);
  const SweepSummary s1 = run_sweep(entries, root / "a", 1);
  const SweepSummary s2 = run_sweep(entries, root / "b", 2);
  CHECK(s1.failed == 0);
  CHECK(s1.cases == 8);
  CHECK(s2.failed == 0);

  std::size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(root / "a")) {
    if (!e.is_regular_file()) continue;
    ++files;
    const fs::path rel = fs::relative(e.path(), root / "a");
    REQUIRE(fs::exists(root / "b" / rel));
    CHECK_MESSAGE(slurp(e.path()) == slurp(root / "b" / rel), rel.string());
  }
  CHECK(files > 20);
  CHECK(fs::exists(root / "a" / "manifest.json"));
  for (const auto& entry : entries) CHECK(fs::exists(root / "a" / entry.name / "config.ini"));

  // symmetric-linear outputs never mention the asymmetry parameters
  for (const auto& e : fs::directory_iterator(root / "a" / "sym-linear")) {
    const std::string name = e.path().filename().string();
    for (const char* p : {"beta", "delta", "phi"}) CHECK(name.find(p) == std::string::npos);
  }
  const std::string csv = slurp(root / "a" / "sym-linear" / "condprob.csv");
  CHECK(csv.rfind("f_nominal,parameter,probability,ci_lo,ci_hi,motion\n", 0) == 0);
  CHECK(csv.find("beta") == std::string::npos);
  CHECK(csv.find('\r') == std::string::npos);
  fs::remove_all(root);
}
