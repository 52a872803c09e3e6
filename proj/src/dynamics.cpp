#include "bistable/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "bistable/error.hpp"

namespace bistable {

std::string_view param_name(Param param) {
  switch (param) {
    case Param::xi: return "xi";
    case Param::chi: return "chi";
    case Param::lambda: return "lambda";
    case Param::kappa: return "kappa";
    case Param::f: return "f";
    case Param::omega: return "omega";
    case Param::beta: return "beta";
    case Param::delta: return "delta";
    case Param::phi: return "phi";
    case Param::p: return "p";
  }
  return "?";
}

std::optional<Param> param_from_name(std::string_view name) {
  for (Param p : kAllParams) {
    if (param_name(p) == name) return p;
  }
  return std::nullopt;
}

std::string_view variant_name(Variant variant) {
  switch (variant) {
    case Variant::SymmetricLinear: return "sym-linear";
    case Variant::SymmetricNonlinear: return "sym-nonlinear";
    case Variant::Asymmetric: return "asymmetric";
  }
  return "?";
}

std::optional<Variant> variant_from_name(std::string_view name) {
  for (Variant v : {Variant::SymmetricLinear, Variant::SymmetricNonlinear, Variant::Asymmetric}) {
    if (variant_name(v) == name) return v;
  }
  return std::nullopt;
}

double HarvesterParams::get(Param param) const {
  switch (param) {
    case Param::xi: return xi;
    case Param::chi: return chi;
    case Param::lambda: return lambda;
    case Param::kappa: return kappa;
    case Param::f: return f;
    case Param::omega: return omega;
    case Param::beta: return beta;
    case Param::delta: return delta;
    case Param::phi: return phi;
    case Param::p: return p;
  }
  return 0.0;
}

void HarvesterParams::set(Param param, double value) {
  switch (param) {
    case Param::xi: xi = value; break;
    case Param::chi: chi = value; break;
    case Param::lambda: lambda = value; break;
    case Param::kappa: kappa = value; break;
    case Param::f: f = value; break;
    case Param::omega: omega = value; break;
    case Param::beta: beta = value; break;
    case Param::delta: delta = value; break;
    case Param::phi: phi = value; break;
    case Param::p: p = value; break;
  }
}

Variant HarvesterParams::variant() const {
  if (delta != 0.0 || phi != 0.0) return Variant::Asymmetric;
  return beta != 0.0 ? Variant::SymmetricNonlinear : Variant::SymmetricLinear;
}

void HarvesterParams::validate() const {
  for (Param param : kAllParams) {
    if (!std::isfinite(get(param))) {
      throw Error(ErrorCode::InvalidArgument,
                  "parameter " + std::string(param_name(param)) + " is not finite");
    }
  }
  auto require = [](bool ok, const char* msg) {
    if (!ok) throw Error(ErrorCode::InvalidArgument, msg);
  };
  require(xi > 0.0, "xi must be > 0");
  require(lambda > 0.0, "lambda must be > 0");
  require(omega > 0.0, "omega must be > 0");
  require(f >= 0.0, "f must be >= 0");
  require(chi >= 0.0, "chi must be >= 0");
  require(kappa >= 0.0, "kappa must be >= 0");
  require(beta >= 0.0, "beta must be >= 0");
  require(p >= 0.0, "p must be >= 0");
}

namespace {

// Right-hand side with the explicit forcing f cos(omega t) + p sin(phi) precomputed.
inline State rhs_forced(const State& s, double forcing, const HarvesterParams& prm) {
  const double coupling = 1.0 + prm.beta * std::abs(s.x);
  const double restoring = 0.5 * s.x * (1.0 + 2.0 * prm.delta * s.x - s.x * s.x);
  const double xddot = -2.0 * prm.xi * s.xdot + restoring + coupling * prm.chi * s.v + forcing;
  const double vdot = -prm.lambda * s.v - coupling * prm.kappa * s.xdot;
  return {s.xdot, xddot, vdot};
}

}  // namespace

State rhs(const State& s, double t, const HarvesterParams& prm) {
  return rhs_forced(s, prm.f * std::cos(prm.omega * t) + prm.p * std::sin(prm.phi), prm);
}

namespace {

inline State axpy(const State& s, double h, const State& k) {
  return {s.x + h * k.x, s.xdot + h * k.xdot, s.v + h * k.v};
}

inline bool finite(const State& s) {
  return std::isfinite(s.x) && std::isfinite(s.xdot) && std::isfinite(s.v);
}

std::size_t step_count(double t_end, double dt) {
  if (!(dt > 0.0) || !(t_end > 0.0) || !std::isfinite(dt) || !std::isfinite(t_end)) {
    throw Error(ErrorCode::InvalidArgument, "t_end and dt must be positive and finite");
  }
  const double n = std::round(t_end / dt);
  if (n < 1.0) throw Error(ErrorCode::InvalidArgument, "t_end shorter than one step");
  return static_cast<std::size_t>(n);
}

// Visits (i, t_i, state_i) for i = 0..n; state_0 = ic.
template <typename Visitor>
void rk4_march(const HarvesterParams& prm, const State& ic, std::size_t n, double h,
               Visitor&& visit) {
  State s = ic;
  if (!finite(s)) throw Error(ErrorCode::NonFinite, "initial condition is not finite");
  visit(std::size_t{0}, 0.0, s);
  const double half = 0.5 * h;
  const double tilt = prm.p * std::sin(prm.phi);
  auto forcing = [&](double t) { return prm.f * std::cos(prm.omega * t) + tilt; };
  double force_start = forcing(0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * h;
    const double t_next = static_cast<double>(i + 1) * h;
    const double force_mid = forcing(t + half);
    const double force_end = forcing(t_next);
    const State k1 = rhs_forced(s, force_start, prm);
    const State k2 = rhs_forced(axpy(s, half, k1), force_mid, prm);
    const State k3 = rhs_forced(axpy(s, half, k2), force_mid, prm);
    const State k4 = rhs_forced(axpy(s, h, k3), force_end, prm);
    const double w = h / 6.0;
    s.x += w * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x);
    s.xdot += w * (k1.xdot + 2.0 * k2.xdot + 2.0 * k3.xdot + k4.xdot);
    s.v += w * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v);
    force_start = force_end;
    if (!finite(s)) {
      std::ostringstream msg;
      msg << "state diverged at t=" << t_next;
      throw Error(ErrorCode::NonFinite, msg.str());
    }
    visit(i + 1, t_next, s);
  }
}

void check_fraction(double transient_fraction) {
  if (!(transient_fraction >= 0.0 && transient_fraction < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "transient_fraction must be in [0, 1)");
  }
}

}  // namespace

Trajectory integrate(const HarvesterParams& params, const State& ic, double t_end, double dt) {
  params.validate();
  const std::size_t n = step_count(t_end, dt);
  const double h = t_end / static_cast<double>(n);
  Trajectory traj;
  traj.dt = h;
  traj.t.reserve(n + 1);
  traj.states.reserve(n + 1);
  traj.power.reserve(n + 1);
  rk4_march(params, ic, n, h, [&](std::size_t, double t, const State& s) {
    traj.t.push_back(t);
    traj.states.push_back(s);
    traj.power.push_back(params.lambda * s.v * s.v);
  });
  return traj;
}

std::size_t window_start(std::size_t n_points, double transient_fraction) {
  check_fraction(transient_fraction);
  if (n_points == 0) return 0;
  return static_cast<std::size_t>(
      std::floor(transient_fraction * static_cast<double>(n_points - 1)));
}

double mean_power(const Trajectory& traj, double transient_fraction) {
  const std::size_t n = traj.power.size();
  const std::size_t start = window_start(n, transient_fraction);
  if (n < 2 || n - start < 2) {
    throw Error(ErrorCode::EmptyWindow, "averaging window holds fewer than 2 points");
  }
  double sum = 0.0;
  for (std::size_t k = start; k + 1 < n; ++k) sum += traj.power[k] + traj.power[k + 1];
  return 0.5 * sum / static_cast<double>(n - 1 - start);
}

double simulate_mean_power(const HarvesterParams& params, const IntegratorSettings& settings) {
  params.validate();
  const std::size_t n = step_count(settings.t_end, settings.dt);
  const double h = settings.t_end / static_cast<double>(n);
  const std::size_t start = window_start(n + 1, settings.transient_fraction);
  if (n + 1 - start < 2) {
    throw Error(ErrorCode::EmptyWindow, "averaging window holds fewer than 2 points");
  }
  double sum = 0.0;
  double prev = 0.0;
  rk4_march(params, settings.ic, n, h, [&](std::size_t i, double, const State& s) {
    const double power = params.lambda * s.v * s.v;
    if (i > start) sum += prev + power;
    prev = power;
  });
  return 0.5 * sum / static_cast<double>(n - start);
}

Trajectory steady_window(const Trajectory& traj, double transient_fraction) {
  const std::size_t start = window_start(traj.size(), transient_fraction);
  Trajectory out;
  out.dt = traj.dt;
  out.t.assign(traj.t.begin() + static_cast<std::ptrdiff_t>(start), traj.t.end());
  out.states.assign(traj.states.begin() + static_cast<std::ptrdiff_t>(start), traj.states.end());
  out.power.assign(traj.power.begin() + static_cast<std::ptrdiff_t>(start), traj.power.end());
  return out;
}

std::vector<Equilibrium> equilibria(const HarvesterParams& prm) {
  // 0.5 x (1 + 2 delta x - x^2) + p sin(phi) = 0  <=>  x^3 - 2 delta x^2 - x - 2 q = 0
  const double q = prm.p * std::sin(prm.phi);
  const double b = -2.0 * prm.delta;
  const double c = -1.0;
  const double d = -2.0 * q;
  const double shift = -b / 3.0;
  const double pp = c - b * b / 3.0;
  const double qq = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
  const double disc = -(4.0 * pp * pp * pp + 27.0 * qq * qq);

  std::vector<double> roots;
  if (pp < 0.0 && disc >= 0.0) {
    const double m = 2.0 * std::sqrt(-pp / 3.0);
    const double arg = std::clamp(3.0 * qq / (pp * m), -1.0, 1.0);
    const double theta = std::acos(arg) / 3.0;
    for (int k = 0; k < 3; ++k) {
      roots.push_back(m * std::cos(theta - 2.0 * std::numbers::pi * k / 3.0) + shift);
    }
  } else {
    const double s = std::sqrt(qq * qq / 4.0 + pp * pp * pp / 27.0);
    roots.push_back(std::cbrt(-qq / 2.0 + s) + std::cbrt(-qq / 2.0 - s) + shift);
  }

  auto poly = [&](double x) { return ((x + b) * x + c) * x + d; };
  auto dpoly = [&](double x) { return (3.0 * x + 2.0 * b) * x + c; };
  std::vector<Equilibrium> out;
  for (double x : roots) {
    for (int it = 0; it < 3; ++it) {
      const double slope = dpoly(x);
      if (slope == 0.0) break;
      const double next = x - poly(x) / slope;
      if (!std::isfinite(next)) break;
      x = next;
    }
    // slope of the restoring force 0.5 x (1 + 2 delta x - x^2)
    const double stiffness = 0.5 * (1.0 + 4.0 * prm.delta * x - 3.0 * x * x);
    out.push_back({x, stiffness < 0.0});
  }
  std::sort(out.begin(), out.end(),
            [](const Equilibrium& a, const Equilibrium& b) { return a.x < b.x; });
  return out;
}

}  // namespace bistable
