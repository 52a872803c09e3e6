#pragma once

#include <array>
#include <optional>
#include <string_view>
#include <vector>

namespace bistable {

// Every scalar of the dimensionless harvester model, in a fixed canonical order.
enum class Param { xi, chi, lambda, kappa, f, omega, beta, delta, phi, p };

inline constexpr std::array<Param, 10> kAllParams = {
    Param::xi,    Param::chi,  Param::lambda, Param::kappa, Param::f,
    Param::omega, Param::beta, Param::delta,  Param::phi,   Param::p};

std::string_view param_name(Param param);
std::optional<Param> param_from_name(std::string_view name);

enum class Variant { SymmetricLinear, SymmetricNonlinear, Asymmetric };

std::string_view variant_name(Variant variant);  // sym-linear | sym-nonlinear | asymmetric
std::optional<Variant> variant_from_name(std::string_view name);

struct HarvesterParams {
  double xi = 0.01;      // damping ratio
  double chi = 0.05;     // piezo coupling, mechanical equation
  double lambda = 0.05;  // reciprocal time constant of the circuit
  double kappa = 0.5;    // piezo coupling, electrical equation
  double f = 0.0;        // base excitation amplitude
  double omega = 0.8;    // excitation frequency
  double beta = 0.0;     // strain-dependent coupling coefficient
  double delta = 0.0;    // quadratic (asymmetric) stiffness coefficient
  double phi = 0.0;      // inclination angle [rad]
  double p = 0.0;        // gravity constant of the beam

  double get(Param param) const;
  void set(Param param, double value);

  Variant variant() const;

  // Throws Error(InvalidArgument) when the sign constraints are violated.
  void validate() const;

  bool operator==(const HarvesterParams&) const = default;
};

struct State {
  double x = 0.0;
  double xdot = 0.0;
  double v = 0.0;

  bool operator==(const State&) const = default;
};

struct Trajectory {
  std::vector<double> t;
  std::vector<State> states;
  std::vector<double> power;
  double dt = 0.0;

  std::size_t size() const { return t.size(); }
};

struct IntegratorSettings {
  double dt = 0.01;
  double t_end = 2000.0;
  double transient_fraction = 0.5;
  State ic{1.0, 0.0, 0.0};
};

// Time derivative (xdot, xddot, vdot) of the coupled electromechanical equations.
State rhs(const State& s, double t, const HarvesterParams& params);

// Classical fixed-step RK4. The step is snapped to t_end / round(t_end / dt) so
// the grid ends exactly at t_end. Throws Error(NonFinite) on divergence.
Trajectory integrate(const HarvesterParams& params, const State& ic, double t_end, double dt);

// Trapezoidal time average of the power over the last (1 - transient_fraction)
// of the grid.
double mean_power(const Trajectory& traj, double transient_fraction);

// Same value as mean_power(integrate(...), transient_fraction), bit for bit,
// without storing the trajectory.
double simulate_mean_power(const HarvesterParams& params, const IntegratorSettings& settings);

// Index of the first grid point of the steady-state window for a grid of n points.
std::size_t window_start(std::size_t n_points, double transient_fraction);

// Trajectory restricted to the steady-state window.
Trajectory steady_window(const Trajectory& traj, double transient_fraction);

struct Equilibrium {
  double x = 0.0;
  bool stable = false;
};

// Static equilibria with v = 0, sorted ascending. Stable where the restoring
// force has negative slope.
std::vector<Equilibrium> equilibria(const HarvesterParams& params);

}  // namespace bistable
