#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "wvlab/classical/engine.hpp"
#include "wvlab/core/errors.hpp"
#include "wvlab/gallery/gallery.hpp"
#include "wvlab/lab/fit.hpp"
#include "wvlab/lab/run.hpp"
#include "wvlab/lab/scenario.hpp"
#include "wvlab/quantum/engine.hpp"

namespace py = pybind11;
using namespace wvlab;

namespace {

py::dict report_dict(const quantum::WeakValueReport& r) {
    py::dict d;
    d["outcome"] = r.outcome;
    d["coupling"] = r.coupling;
    d["weak_value"] = r.weak_value;
    d["postselection_probability"] = r.postselection_probability;
    d["predicted_shift"] = r.predicted_shift;
    d["measured_shift"] = r.measured_shift;
    d["remainder_norm"] = r.remainder_norm;
    d["remainder_limit"] = r.remainder_limit;
    d["lagrange_xi0"] = r.lagrange_xi0;
    d["lagrange_xi_eps"] = r.lagrange_xi_eps;
    d["weakness_ratio"] = r.weakness_ratio;
    d["pointer_std"] = r.pointer_std;
    d["current_max"] = r.current_max;
    d["marginal_drift"] = r.marginal_drift;
    py::dict flags;
    flags["zero_current"] = r.flags.zero_current;
    flags["weak_coupling"] = r.flags.weak_coupling;
    flags["remainder_small"] = r.flags.remainder_small;
    d["flags"] = flags;
    return d;
}

quantum::MeasurementSetup preset_setup(const std::string& object, const PointerState& pointer, double eps) {
    auto o = gallery::object_preset(object);
    return {o.observable, o.postselection, o.object_state, pointer, eps};
}

classical::GaussianPhaseDensity phase_density(double mean_x, double mean_y, double std_x, double std_y,
                                              double correlation) {
    classical::GaussianPhaseDensity g{mean_x, mean_y, std_x, std_y, correlation};
    g.validate("density");
    return g;
}

}  // namespace

PYBIND11_MODULE(_wvlab, m) {
    m.doc() = "Weak-measurement simulation lab";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
    py::register_exception<RangeError>(m, "RangeError", base.ptr());
    auto physics = py::register_exception<PhysicsError>(m, "PhysicsError", base.ptr());
    py::register_exception<StatisticsError>(m, "StatisticsError", base.ptr());
    py::register_exception<IntegrationError>(m, "IntegrationError", base.ptr());
    (void)physics;

    py::class_<PointerGrid>(m, "PointerGrid")
        .def(py::init<std::size_t, double>(), py::arg("points"), py::arg("length"))
        .def_property_readonly("size", &PointerGrid::size)
        .def_property_readonly("length", &PointerGrid::length)
        .def_property_readonly("spacing", &PointerGrid::spacing)
        .def_property_readonly("positions", &PointerGrid::positions)
        .def("__repr__", [](const PointerGrid& g) {
            return "PointerGrid(points=" + std::to_string(g.size()) + ", length=" + lab::format_number(g.length()) +
                   ")";
        });

    py::class_<PointerState>(m, "PointerState")
        .def_static("pure", &PointerState::pure, py::arg("grid"), py::arg("wavefunction"))
        .def_property_readonly("grid", &PointerState::grid)
        .def_property_readonly("kernel", &PointerState::kernel)
        .def("density", &PointerState::density)
        .def("purity", &PointerState::purity)
        .def("current_density", [](const PointerState& s) { return current_density(s); })
        .def("normalized_current", [](const PointerState& s) { return normalized_current(s); })
        .def("moments", [](const PointerState& s) {
            auto mo = position_moments(s.grid(), s.density());
            return py::make_tuple(mo.mean, mo.std, mo.norm);
        });

    m.def("default_grid", &gallery::default_grid, py::arg("sigma") = 1.0);
    m.def("make_pointer", &gallery::make_pointer, py::arg("name"), py::arg("parameters") = gallery::Parameters{},
          py::arg("grid") = gallery::default_grid());
    m.def("gaussian_pointer", &gallery::gaussian_pointer, py::arg("sigma"), py::arg("center"), py::arg("grid"));
    m.def("thermal_pointer", &gallery::thermal_pointer, py::arg("omega"), py::arg("temperature"), py::arg("grid"));
    m.def("superposition_pointer", &gallery::superposition_pointer, py::arg("separation"), py::arg("sigma"),
          py::arg("grid"));
    m.def("mixture_pointer", &gallery::mixture_pointer, py::arg("separation"), py::arg("sigma"), py::arg("grid"));
    m.def("boosted_pointer", &gallery::boosted_pointer, py::arg("k0"), py::arg("sigma"), py::arg("grid"));
    m.def("translate", &translate, py::arg("state"), py::arg("shift"));

    m.def("pointer_presets", [] {
        py::list out;
        for (const auto& p : gallery::pointer_presets()) {
            py::dict d;
            d["name"] = p.name;
            d["parameters"] = p.parameters;
            d["expected_zero_current"] = p.expected_zero_current;
            d["description"] = p.description;
            out.append(d);
        }
        return out;
    });
    m.def("object_preset", [](const std::string& name) {
        auto o = gallery::object_preset(name);
        py::dict d;
        d["name"] = o.name;
        d["description"] = o.description;
        d["state"] = o.object_state.matrix();
        d["observable"] = o.observable.matrix();
        d["postselection"] = o.postselection;
        d["reference_weak_values"] = o.reference_weak_values;
        return d;
    });
    m.def("object_preset_names", [] {
        std::vector<std::string> names;
        for (const auto& o : gallery::object_presets()) names.push_back(o.name);
        return names;
    });

    m.def(
        "weak_value",
        [](const ComplexMatrix& state, const ComplexMatrix& observable, const ComplexVector& d) {
            return quantum::weak_value(DensityMatrix(state), spectral_decompose(observable), d);
        },
        py::arg("state"), py::arg("observable"), py::arg("postselection"));

    py::class_<quantum::MeasurementSetup>(m, "MeasurementSetup")
        .def(py::init([](const ComplexMatrix& observable, const ComplexMatrix& basis, const ComplexMatrix& state,
                         const PointerState& pointer, double coupling) {
                 return quantum::MeasurementSetup(spectral_decompose(observable), basis, DensityMatrix(state),
                                                  pointer, coupling);
             }),
             py::arg("observable"), py::arg("postselection"), py::arg("state"), py::arg("pointer"),
             py::arg("coupling"))
        .def_static("from_preset", &preset_setup, py::arg("object"), py::arg("pointer"), py::arg("coupling"))
        .def_property_readonly("coupling", &quantum::MeasurementSetup::coupling)
        .def_property_readonly("outcomes", &quantum::MeasurementSetup::outcomes)
        .def_property_readonly("pointer", &quantum::MeasurementSetup::pointer)
        .def("with_coupling", &quantum::MeasurementSetup::with_coupling);

    m.def("evolve_exact", [](const quantum::MeasurementSetup& s) { return quantum::evolve_exact(s).table; });
    m.def("first_order_joint", [](const quantum::MeasurementSetup& s) { return quantum::first_order_joint(s).table; });
    m.def("product_joint", [](const quantum::MeasurementSetup& s) { return quantum::product_joint(s).table; });
    m.def("expansion_term", &quantum::expansion_term, py::arg("setup"), py::arg("n"));
    m.def("remainder_term", &quantum::remainder_term, py::arg("setup"), py::arg("order"));
    m.def(
        "measure_shift",
        [](const quantum::MeasurementSetup& s, std::size_t outcome) {
            return report_dict(quantum::measure_shift(s, outcome));
        },
        py::arg("setup"), py::arg("outcome"));

    m.def(
        "fit_slope",
        [](const std::vector<double>& x, const std::vector<double>& y) {
            auto f = lab::fit_slope(x, y);
            py::dict d;
            d["slope"] = f.slope;
            d["intercept"] = f.intercept;
            d["r_squared"] = f.r_squared;
            d["slope_stderr"] = f.slope_stderr;
            d["ci"] = py::make_tuple(f.ci_low, f.ci_high);
            return d;
        },
        py::arg("x"), py::arg("y"));

    m.def(
        "classical_shift",
        [](const std::string& observable, double eps, std::map<std::string, double> object,
           std::map<std::string, double> pointer, std::size_t samples, std::size_t bins, std::uint64_t seed) {
            auto get = [](std::map<std::string, double>& d, const char* k, double def) {
                auto it = d.find(k);
                double v = it == d.end() ? def : it->second;
                if (it != d.end()) d.erase(it);
                return v;
            };
            auto density = [&](std::map<std::string, double>& d, const char* mx, const char* my, const char* sx,
                               const char* sy) {
                auto g = phase_density(get(d, mx, 0.0), get(d, my, 0.0), get(d, sx, 1.0), get(d, sy, 1.0),
                                       get(d, "correlation", 0.0));
                if (!d.empty()) throw ValidationError(d.begin()->first + ": unknown key");
                return g;
            };
            const auto o = density(object, "mean_q", "mean_p", "std_q", "std_p");
            const auto a = density(pointer, "mean_Q", "mean_P", "std_Q", "std_P");
            classical::ShiftExperimentConfig cfg;
            cfg.samples = samples;
            cfg.bins = bins;
            cfg.seed = seed;
            const auto r = classical::classical_shift_experiment(o, a, classical::CNumberObservable::named(observable),
                                                                 eps, cfg);
            py::list rows;
            for (const auto& b : r.bins) {
                if (!b.populated) continue;
                py::dict d;
                d["bin"] = py::make_tuple(b.bin.lo, b.bin.hi);
                d["count"] = b.count;
                d["weak_value"] = b.weak_value;
                d["predicted"] = b.predicted;
                d["measured"] = b.measured;
                d["measured_se"] = b.measured_se;
                rows.append(d);
            }
            py::dict out;
            out["bins"] = rows;
            out["agreement_fraction"] = r.agreement_fraction();
            out["marginal_identical"] = r.marginal.identical;
            out["marginal_passed"] = r.marginal.passed;
            out["marginal_chi_square"] = r.marginal.chi_square;
            out["current_vanishing"] = r.current.vanishing;
            out["weakness_ratio"] = r.weakness_ratio;
            return out;
        },
        py::arg("observable"), py::arg("coupling"), py::arg("object") = std::map<std::string, double>{},
        py::arg("pointer") = std::map<std::string, double>{}, py::arg("samples") = 100000, py::arg("bins") = 21,
        py::arg("seed") = 12345);

    m.def(
        "run_scenario",
        [](const std::string& text, std::size_t workers, std::optional<std::uint64_t> seed) {
            const auto scenario = lab::parse_scenario_text(text);
            lab::RunReport report;
            {
                py::gil_scoped_release release;
                report = lab::run(scenario, {workers, seed});
            }
            std::ostringstream csv;
            lab::write_csv(csv, report.records);
            return py::make_tuple(csv.str(), report.to_json().dump(), report.physics_ok());
        },
        py::arg("scenario"), py::arg("workers") = 1, py::arg("seed") = std::nullopt);
    m.def("validate_scenario", [](const std::string& text) { lab::parse_scenario_text(text); });

    m.def("gallery_audit", [] {
        py::list out;
        for (const auto& r : lab::gallery_audit()) {
            py::dict d;
            d["name"] = r.name;
            d["purity"] = r.purity;
            d["position_std"] = r.position_std;
            d["current_max"] = r.current_max;
            d["zero_current"] = r.zero_current;
            d["expected_zero_current"] = r.expected_zero_current;
            out.append(d);
        }
        return out;
    });

    m.attr("REPORT_SCHEMA") = lab::kReportSchema;
}
