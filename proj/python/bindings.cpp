#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "bistable/classify.hpp"
#include "bistable/config.hpp"
#include "bistable/dynamics.hpp"
#include "bistable/error.hpp"
#include "bistable/pce.hpp"
#include "bistable/probability.hpp"
#include "bistable/statistics.hpp"

namespace py = pybind11;
using namespace bistable;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<double> to_vector(const Array& a) {
  return {a.data(), a.data() + a.size()};
}

Array to_array(const std::vector<double>& v) {
  Array out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

SampleMatrix to_matrix(const Array& a, std::size_t cols) {
  if (a.ndim() != 2 || static_cast<std::size_t>(a.shape(1)) != cols) {
    throw Error(ErrorCode::InvalidArgument,
                "expected an (n, " + std::to_string(cols) + ") array of samples");
  }
  SampleMatrix x;
  x.rows = static_cast<std::size_t>(a.shape(0));
  x.cols = cols;
  x.data = to_vector(a);
  return x;
}

Array from_matrix(const SampleMatrix& x) {
  Array out({static_cast<py::ssize_t>(x.rows), static_cast<py::ssize_t>(x.cols)});
  std::copy(x.data.begin(), x.data.end(), out.mutable_data());
  return out;
}

Param param_of(const std::string& name) {
  const auto p = param_from_name(name);
  if (!p) throw Error(ErrorCode::InvalidArgument, "unknown parameter '" + name + "'");
  return *p;
}

Variant variant_of(const std::string& name) {
  const auto v = variant_from_name(name);
  if (!v) throw Error(ErrorCode::InvalidArgument, "unknown variant '" + name + "'");
  return *v;
}

py::dict trajectory_dict(const Trajectory& tr) {
  std::vector<double> x(tr.size()), xdot(tr.size()), v(tr.size());
  for (std::size_t i = 0; i < tr.size(); ++i) {
    x[i] = tr.states[i].x;
    xdot[i] = tr.states[i].xdot;
    v[i] = tr.states[i].v;
  }
  py::dict d;
  d["t"] = to_array(tr.t);
  d["x"] = to_array(x);
  d["xdot"] = to_array(xdot);
  d["v"] = to_array(v);
  d["power"] = to_array(tr.power);
  return d;
}

IntegratorSettings settings_of(double dt, double t_end, double transient_fraction,
                               std::array<double, 3> ic) {
  IntegratorSettings s;
  s.dt = dt;
  s.t_end = t_end;
  s.transient_fraction = transient_fraction;
  s.ic = {ic[0], ic[1], ic[2]};
  return s;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Bistable energy harvester simulation and polynomial chaos uncertainty analysis";

  // BistableError instances carry the error code name in `.code`
  static py::object error_type = py::reinterpret_borrow<py::object>(
      py::exception<Error>(m, "BistableError", PyExc_RuntimeError));
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object inst = error_type(e.what());
      inst.attr("code") = to_string(e.code());
      PyErr_SetObject(error_type.ptr(), inst.ptr());
    }
  });

  py::class_<HarvesterParams>(m, "HarvesterParams")
      .def(py::init<>())
      .def(py::init([](const std::string& variant, double f) {
             HarvesterParams p = ExperimentConfig::defaults(variant_of(variant)).nominal;
             p.f = f;
             return p;
           }),
           py::arg("variant"), py::arg("f"))
      .def_readwrite("xi", &HarvesterParams::xi)
      .def_readwrite("chi", &HarvesterParams::chi)
      .def_readwrite("lambda_", &HarvesterParams::lambda)
      .def_readwrite("kappa", &HarvesterParams::kappa)
      .def_readwrite("f", &HarvesterParams::f)
      .def_readwrite("omega", &HarvesterParams::omega)
      .def_readwrite("beta", &HarvesterParams::beta)
      .def_readwrite("delta", &HarvesterParams::delta)
      .def_readwrite("phi", &HarvesterParams::phi)
      .def_readwrite("p", &HarvesterParams::p)
      .def("get", [](const HarvesterParams& h, const std::string& n) { return h.get(param_of(n)); })
      .def("set", [](HarvesterParams& h, const std::string& n, double v) { h.set(param_of(n), v); })
      .def_property_readonly("variant",
                             [](const HarvesterParams& h) { return std::string(variant_name(h.variant())); })
      .def("__repr__", [](const HarvesterParams& h) {
        std::string s = "HarvesterParams(";
        for (Param p : kAllParams) {
          s += std::string(param_name(p)) + "=" + format_double(h.get(p));
          s += p == kAllParams.back() ? ")" : ", ";
        }
        return s;
      });

  m.def("rhs",
        [](const HarvesterParams& p, std::array<double, 3> s, double t) {
          const State d = rhs({s[0], s[1], s[2]}, t, p);
          return std::array<double, 3>{d.x, d.xdot, d.v};
        },
        py::arg("params"), py::arg("state"), py::arg("t"));
  m.def("integrate",
        [](const HarvesterParams& p, double t_end, double dt, std::array<double, 3> ic) {
          return trajectory_dict(integrate(p, {ic[0], ic[1], ic[2]}, t_end, dt));
        },
        py::arg("params"), py::arg("t_end") = 2000.0, py::arg("dt") = 0.01,
        py::arg("ic") = std::array<double, 3>{1.0, 0.0, 0.0});
  m.def("mean_power",
        [](const HarvesterParams& p, double t_end, double dt, double transient_fraction,
           std::array<double, 3> ic) {
          return simulate_mean_power(p, settings_of(dt, t_end, transient_fraction, ic));
        },
        py::arg("params"), py::arg("t_end") = 2000.0, py::arg("dt") = 0.01,
        py::arg("transient_fraction") = 0.5, py::arg("ic") = std::array<double, 3>{1.0, 0.0, 0.0});
  m.def("equilibria",
        [](const HarvesterParams& p) {
          std::vector<std::pair<double, bool>> out;
          for (const Equilibrium& e : equilibria(p)) out.emplace_back(e.x, e.stable);
          return out;
        },
        py::arg("params"));
  m.def("classify",
        [](const HarvesterParams& p, double t_end, double dt, double transient_fraction,
           std::array<double, 3> ic) {
          const Trajectory tr = integrate(p, {ic[0], ic[1], ic[2]}, t_end, dt);
          const MotionLabel l = classify_motion(steady_window(tr, transient_fraction), p);
          py::dict d;
          d["motion"] = std::string(motion_name(l.kind));
          d["crossings"] = l.crossings;
          d["k_statistic"] = l.k_statistic;
          return d;
        },
        py::arg("params"), py::arg("t_end") = 2000.0, py::arg("dt") = 0.01,
        py::arg("transient_fraction") = 0.5, py::arg("ic") = std::array<double, 3>{1.0, 0.0, 0.0});
  m.def("zero_one_test",
        [](const Array& series, std::size_t phases, std::uint64_t seed) {
          const auto v = to_vector(series);
          return zero_one_test(v, phases, seed);
        },
        py::arg("series"), py::arg("phases") = 64, py::arg("seed") = 0x5eedULL);

  m.def("entropy",
        [](const Array& density, double a, double b) { return entropy(to_vector(density), a, b); },
        py::arg("density"), py::arg("a"), py::arg("b"));
  m.def("interval_from_nominal",
        [](double nominal, double spread) {
          const UniformInterval iv = interval_from_nominal(nominal, spread);
          return std::pair{iv.a, iv.b};
        },
        py::arg("nominal"), py::arg("spread") = 0.2);

  py::class_<RandomInputSpec>(m, "RandomInputSpec")
      .def_property_readonly("dimension", &RandomInputSpec::dimension)
      .def_property_readonly("params",
                             [](const RandomInputSpec& s) {
                               std::vector<std::string> out;
                               for (const auto& e : s.entries()) out.emplace_back(param_name(e.param));
                               return out;
                             })
      .def_property_readonly("supports",
                             [](const RandomInputSpec& s) {
                               std::vector<std::pair<double, double>> out;
                               for (const auto& e : s.entries()) out.emplace_back(e.support.a, e.support.b);
                               return out;
                             })
      .def("assemble", [](const RandomInputSpec& s, const Array& row) {
        return s.assemble(to_vector(row));
      });

  py::class_<ExperimentConfig>(m, "Config")
      .def(py::init([](const std::map<std::string, std::string>& assignments) {
             return resolve_config(ConfigAssignments(assignments.begin(), assignments.end()));
           }),
           py::arg("assignments") = std::map<std::string, std::string>{})
      .def_static("from_file",
                  [](const std::string& path) { return resolve_config(read_config_file(path)); })
      .def_property_readonly("variant",
                             [](const ExperimentConfig& c) { return std::string(variant_name(c.variant)); })
      .def_readonly("f_sweep", &ExperimentConfig::f_sweep)
      .def_readonly("seed", &ExperimentConfig::seed)
      .def("dump", &dump_config)
      .def("hash", &config_hash)
      .def("spec", &build_spec, py::arg("f"));

  m.def("sample",
        [](const RandomInputSpec& spec, std::size_t n, std::uint64_t seed) {
          return from_matrix(sample(spec, n, seed));
        },
        py::arg("spec"), py::arg("n"), py::arg("seed"));

  py::class_<PceSurrogate>(m, "Surrogate")
      .def_readonly("degree", &PceSurrogate::degree)
      .def_readonly("coeffs", &PceSurrogate::coeffs)
      .def_readonly("spec", &PceSurrogate::spec)
      .def_property_readonly("indices",
                             [](const PceSurrogate& s) {
                               std::vector<std::vector<unsigned>> out;
                               for (const auto& i : s.indices) out.push_back(i.degrees);
                               return out;
                             })
      .def_property_readonly("loo", [](const PceSurrogate& s) { return s.diagnostics.loo; })
      .def_property_readonly("condition",
                             [](const PceSurrogate& s) { return s.diagnostics.condition; })
      .def_property_readonly("mean", [](const PceSurrogate& s) { return mean(s); })
      .def_property_readonly("variance", [](const PceSurrogate& s) { return variance(s); })
      .def("predict",
           [](const PceSurrogate& s, const Array& x) {
             return to_array(predict_rows(s, to_matrix(x, s.spec.dimension())));
           },
           py::arg("x"))
      .def("serialize", &serialize)
      .def_static("deserialize", &deserialize, py::arg("text"));

  m.def("fit",
        [](const RandomInputSpec& spec, const Array& x, const Array& y, unsigned degree,
           double oversampling) {
          FitOptions o;
          o.oversampling = oversampling;
          return fit_least_squares(spec, to_matrix(x, spec.dimension()), to_vector(y), degree, o);
        },
        py::arg("spec"), py::arg("x"), py::arg("y"), py::arg("degree") = 3,
        py::arg("oversampling") = 2.0);

  m.def("normalize", [](const Array& v) { return to_array(normalize(to_vector(v))); },
        py::arg("values"));
  m.def("silverman_bandwidth",
        [](const Array& v) { return silverman_bandwidth(to_vector(v)); }, py::arg("values"));
  m.def("kde",
        [](const Array& v, const Array& grid, std::optional<double> bandwidth) {
          return to_array(kde(to_vector(v), to_vector(grid), bandwidth));
        },
        py::arg("values"), py::arg("grid"), py::arg("bandwidth") = py::none());
  m.def("modality",
        [](const Array& d, double min_relative_height) {
          return modality(to_vector(d), min_relative_height);
        },
        py::arg("density"), py::arg("min_relative_height") = 0.0);
  m.def("wilson_interval", &wilson_interval, py::arg("successes"), py::arg("n"));
  m.def("confidence_band",
        [](const Array& ensemble, double level, std::size_t min_members) {
          if (ensemble.ndim() != 2) {
            throw Error(ErrorCode::InvalidArgument, "ensemble must be (members, time)");
          }
          const auto rows = static_cast<std::size_t>(ensemble.shape(0));
          const auto cols = static_cast<std::size_t>(ensemble.shape(1));
          std::vector<std::vector<double>> members(rows);
          for (std::size_t i = 0; i < rows; ++i) {
            members[i].assign(ensemble.data() + i * cols, ensemble.data() + (i + 1) * cols);
          }
          const Band b = confidence_band(members, level, min_members);
          return py::make_tuple(to_array(b.lower), to_array(b.median), to_array(b.upper));
        },
        py::arg("ensemble"), py::arg("level") = 0.95, py::arg("min_members") = 40);
}
