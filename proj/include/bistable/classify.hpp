#pragma once

#include <cstdint>
#include <span>
#include <string_view>

#include "bistable/dynamics.hpp"

namespace bistable {

enum class MotionKind { Intrawell, InterwellRegular, Chaotic };

// intrawell | interwell | chaotic
std::string_view motion_name(MotionKind kind);

struct MotionLabel {
  MotionKind kind = MotionKind::Intrawell;
  std::size_t crossings = 0;
  double k_statistic = 0.0;
};

struct ClassifySettings {
  double k_threshold = 0.5;
  std::size_t phases = 64;
  double samples_per_period = 10.0;
  std::uint64_t seed = 0x5eedULL;
};

// Sign changes of (x - saddle_x) along the trajectory.
std::size_t count_well_crossings(const Trajectory& traj, double saddle_x);
std::size_t count_well_crossings(std::span<const double> x, double saddle_x);

inline constexpr std::size_t kMinZeroOneLength = 1000;

// Gottwald-Melbourne 0-1 test for chaos, correlation variant: median of K_c over
// `phases` random frequencies c in (pi/5, 4pi/5), clamped to [0, 1].
// Throws Error(TooShort) for fewer than kMinZeroOneLength samples.
double zero_one_test(std::span<const double> series, std::size_t phases = 64,
                     std::uint64_t seed = 0x5eedULL);

// Labels a steady-state window. The saddle is the unstable equilibrium of the
// static problem; with a single equilibrium there is nothing to cross.
MotionLabel classify_motion(const Trajectory& steady, const HarvesterParams& params,
                            const ClassifySettings& settings = {});

}  // namespace bistable
