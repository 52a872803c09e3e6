#include "bistable/classify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "bistable/error.hpp"
#include "bistable/random.hpp"

namespace bistable {

std::string_view motion_name(MotionKind kind) {
  switch (kind) {
    case MotionKind::Intrawell: return "intrawell";
    case MotionKind::InterwellRegular: return "interwell";
    case MotionKind::Chaotic: return "chaotic";
  }
  return "?";
}

std::size_t count_well_crossings(std::span<const double> x, double saddle_x) {
  std::size_t count = 0;
  int side = 0;
  for (double value : x) {
    const double rel = value - saddle_x;
    if (rel == 0.0) continue;  // touching the saddle is not a crossing
    const int s = rel > 0.0 ? 1 : -1;
    if (side != 0 && s != side) ++count;
    side = s;
  }
  return count;
}

std::size_t count_well_crossings(const Trajectory& traj, double saddle_x) {
  std::vector<double> x(traj.states.size());
  std::transform(traj.states.begin(), traj.states.end(), x.begin(),
                 [](const State& s) { return s.x; });
  return count_well_crossings(x, saddle_x);
}

namespace {

double correlation(std::span<const double> a, std::span<const double> b) {
  const auto n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa <= 0.0 || sbb <= 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

double k_for_frequency(std::span<const double> phi, double mean_phi, double c) {
  const std::size_t n = phi.size();
  std::vector<double> p(n), q(n);
  double ps = 0.0, qs = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double arg = static_cast<double>(j + 1) * c;
    ps += phi[j] * std::cos(arg);
    qs += phi[j] * std::sin(arg);
    p[j] = ps;
    q[j] = qs;
  }
  const std::size_t ncut = n / 10;
  std::vector<double> lags(ncut), disp(ncut);
  for (std::size_t lag = 1; lag <= ncut; ++lag) {
    double msd = 0.0;
    for (std::size_t j = 0; j + lag < n; ++j) {
      const double dp = p[j + lag] - p[j];
      const double dq = q[j + lag] - q[j];
      msd += dp * dp + dq * dq;
    }
    msd /= static_cast<double>(n - lag);
    const double osc = mean_phi * mean_phi * (1.0 - std::cos(static_cast<double>(lag) * c)) /
                       (1.0 - std::cos(c));
    lags[lag - 1] = static_cast<double>(lag);
    disp[lag - 1] = msd - osc;
  }
  return correlation(lags, disp);
}

}  // namespace

double zero_one_test(std::span<const double> series, std::size_t phases, std::uint64_t seed) {
  if (series.size() < kMinZeroOneLength) {
    throw Error(ErrorCode::TooShort, "0-1 test needs at least " +
                                         std::to_string(kMinZeroOneLength) + " samples, got " +
                                         std::to_string(series.size()));
  }
  if (phases == 0) throw Error(ErrorCode::InvalidArgument, "phases must be >= 1");
  double mean_phi = 0.0;
  for (double v : series) mean_phi += v;
  mean_phi /= static_cast<double>(series.size());

  CounterRng rng(seed);
  std::vector<double> ks(phases);
  for (auto& k : ks) {
    const double c = std::numbers::pi * (0.2 + 0.6 * rng.uniform());
    k = k_for_frequency(series, mean_phi, c);
  }
  std::sort(ks.begin(), ks.end());
  const std::size_t mid = phases / 2;
  const double median = phases % 2 == 1 ? ks[mid] : 0.5 * (ks[mid - 1] + ks[mid]);
  return std::clamp(median, 0.0, 1.0);
}

MotionLabel classify_motion(const Trajectory& steady, const HarvesterParams& params,
                            const ClassifySettings& settings) {
  MotionLabel label;
  const auto eq = equilibria(params);
  if (eq.size() == 3) {
    label.crossings = count_well_crossings(steady, eq[1].x);
  }

  const double period = 2.0 * std::numbers::pi / params.omega;
  const double stride_real = period / (settings.samples_per_period * steady.dt);
  const auto stride = static_cast<std::size_t>(std::max(1.0, std::round(stride_real)));
  std::vector<double> series;
  series.reserve(steady.size() / stride + 1);
  for (std::size_t i = 0; i < steady.size(); i += stride) series.push_back(steady.states[i].x);
  label.k_statistic = zero_one_test(series, settings.phases, settings.seed);

  const bool chaotic = label.k_statistic >= settings.k_threshold;
  if (eq.size() != 3) {
    // monostable: single well, so only the chaos score can distinguish motions
    label.kind = chaotic ? MotionKind::Chaotic : MotionKind::Intrawell;
  } else if (label.crossings == 0) {
    label.kind = MotionKind::Intrawell;
  } else {
    label.kind = chaotic ? MotionKind::Chaotic : MotionKind::InterwellRegular;
  }
  return label;
}

}  // namespace bistable
