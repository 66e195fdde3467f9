#include "wvlab/lab/run.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "wvlab/classical/engine.hpp"
#include "wvlab/core/errors.hpp"
#include "wvlab/core/parallel.hpp"
#include "wvlab/quantum/engine.hpp"

namespace wvlab::lab {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

template <class F>
auto with_coordinates(const std::string& where, F&& f) {
    try {
        return f();
    } catch (const ValidationError& e) {
        throw ValidationError(where + ": " + e.what());
    } catch (const RangeError& e) {
        throw RangeError(where + ": " + e.what());
    } catch (const PhysicsError& e) {
        throw PhysicsError(where + ": " + e.what());
    } catch (const std::exception& e) {
        throw Error(where + ": " + e.what());
    }
}

std::string coordinates(const std::string& pointer, double eps) {
    return "pointer=" + pointer + ", epsilon=" + format_number(eps);
}

struct CellResult {
    std::vector<Record> records;
    CellDiagnostics diagnostics;
};

CellResult quantum_cell(const QuantumObject& obj, const QuantumPointer& ptr, const PointerState& pointer,
                        double eps) {
    const Tolerances tol;
    const quantum::MeasurementSetup setup(obj.observable, obj.postselection, obj.state, pointer, eps, tol);
    CellResult out;
    auto& diag = out.diagnostics;
    diag.pointer = ptr.label;
    diag.epsilon = eps;

    for (std::size_t d : obj.outcomes) {
        const auto r = with_coordinates(coordinates(ptr.label, eps) + ", outcome=" + std::to_string(d),
                                        [&] { return quantum::measure_shift(setup, d, tol); });
        Record rec;
        rec.engine = "quantum";
        rec.pointer = ptr.label;
        rec.epsilon = eps;
        rec.outcome = d;
        rec.cw_re = r.weak_value.real();
        rec.cw_im = r.weak_value.imag();
        rec.predicted_shift = r.predicted_shift;
        rec.measured_shift = r.measured_shift;
        rec.abs_err = std::abs(r.measured_shift - r.predicted_shift);
        rec.remainder_norm = r.remainder_norm;
        rec.weakness_ratio = r.weakness_ratio;
        rec.current_max = r.current_max;
        rec.marginal_drift = r.marginal_drift;
        rec.flags = {{"zero_current", r.flags.zero_current},
                     {"weak_coupling", r.flags.weak_coupling},
                     {"remainder_small", r.flags.remainder_small}};
        out.records.push_back(std::move(rec));
    }

    with_coordinates(coordinates(ptr.label, eps), [&] {
        const auto exact = quantum::evolve_exact(setup);
        const auto product = quantum::product_joint(setup);
        const RealMatrix delta = exact.table - product.table - quantum::expansion_term(setup, 1);
        const RealMatrix residual = delta - quantum::remainder_term(setup, 2);
        const bool zero_current = normalized_current(pointer) < tol.zero_current;
        const RealMatrix first = zero_current ? quantum::first_order_joint(setup, tol).table : RealMatrix();
        const RealVector m0 = quantum::object_marginal(product);
        const RealVector m1 = quantum::object_marginal(exact);

        diag.remainder_residual = 0.0;
        diag.marginal_drift = 0.0;
        if (zero_current) diag.first_order_error = 0.0;
        for (std::size_t d : obj.outcomes) {
            const auto c = static_cast<Eigen::Index>(d);
            diag.remainder_residual = std::max(diag.remainder_residual, residual.col(c).cwiseAbs().maxCoeff());
            diag.marginal_drift = std::max(diag.marginal_drift, std::abs(m1(c) - m0(c)));
            if (zero_current)
                diag.first_order_error =
                    std::max(diag.first_order_error, (exact.table.col(c) - first.col(c)).cwiseAbs().maxCoeff());
        }
        return 0;
    });
    return out;
}

CellResult classical_cell(const Scenario& s, const ClassicalPointer& ptr, double eps, std::uint64_t seed) {
    const auto& obj = *s.classical_object;
    classical::ShiftExperimentConfig cfg;
    cfg.samples = s.ensemble.samples;
    cfg.bins = s.ensemble.bins;
    cfg.range_std = s.ensemble.range_std;
    cfg.current_bins = s.ensemble.current_bins;
    cfg.substeps = s.ensemble.substeps;
    cfg.min_bin_count = s.ensemble.min_bin_count;
    cfg.seed = seed;
    cfg.workers = 1;

    const auto c = classical::CNumberObservable::named(obj.observable);
    const auto exp = with_coordinates(coordinates(ptr.label, eps), [&] {
        return classical::classical_shift_experiment(obj.density, ptr.density, c, eps, cfg);
    });

    CellResult out;
    auto& diag = out.diagnostics;
    diag.pointer = ptr.label;
    diag.epsilon = eps;
    diag.agreement_fraction = exp.agreement_fraction(3.0);
    diag.invariant_drift = exp.max_invariant_drift;
    diag.marginal_identical = exp.marginal.identical;
    diag.marginal_passed = exp.marginal.passed;
    diag.marginal_drift = exp.marginal.max_density_diff;

    double sum_shift = 0.0;
    std::size_t populated = 0;
    for (std::size_t b = 0; b < exp.bins.size(); ++b) {
        const auto& bin = exp.bins[b];
        if (!bin.populated) continue;
        ++populated;
        sum_shift += std::abs(bin.measured);
        Record rec;
        rec.engine = "classical";
        rec.pointer = ptr.label;
        rec.epsilon = eps;
        rec.outcome = b;
        rec.cw_re = bin.weak_value;
        rec.cw_im = 0.0;
        rec.predicted_shift = bin.predicted;
        rec.measured_shift = bin.measured;
        rec.abs_err = std::abs(bin.measured - bin.predicted);
        rec.remainder_norm = NAN;
        rec.weakness_ratio = std::abs(bin.predicted) / exp.pointer_std;
        rec.current_max = exp.current.max_abs_mean;
        rec.marginal_drift = exp.marginal.max_density_diff;
        rec.flags = {{"zero_current", exp.current.vanishing},
                     {"weak_coupling", rec.weakness_ratio < Tolerances{}.weakness_ratio_max},
                     {"marginal_invariant", exp.marginal.passed}};
        out.records.push_back(std::move(rec));
    }
    diag.mean_abs_shift = populated ? sum_shift / static_cast<double>(populated) : NAN;
    return out;
}

FitRecord try_fit(std::string pointer, std::string quantity, std::optional<std::size_t> outcome,
                  const std::vector<double>& x, const std::vector<double>& y) {
    FitRecord f{std::move(pointer), std::move(quantity), outcome, std::nullopt, {}};
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] <= 0.0) continue;
        if (std::isnan(y[i])) {
            f.skipped = "not defined for this pointer";
            return f;
        }
        xs.push_back(x[i]);
        ys.push_back(y[i]);
    }
    try {
        f.fit = fit_slope(xs, ys);
    } catch (const ValidationError& e) {
        f.skipped = e.what();
    }
    return f;
}

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

}  // namespace

bool Record::flags_ok() const {
    for (const auto& [_, v] : flags)
        if (!v) return false;
    return true;
}

std::string Record::flags_text() const {
    std::string s;
    for (const auto& [k, v] : flags) {
        if (!s.empty()) s += ';';
        s += k + (v ? "=1" : "=0");
    }
    return s;
}

bool RunReport::physics_ok() const {
    for (const auto& r : records)
        if (!r.flags_ok()) return false;
    return true;
}

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

RunReport run(const Scenario& scenario, const RunOptions& options) {
    const auto t0 = Clock::now();
    RunReport report;
    report.scenario = scenario;
    if (options.seed) report.scenario.seed = *options.seed;
    report.workers = std::max<std::size_t>(options.workers, 1);
    const Scenario& s = report.scenario;

    const std::size_t np = s.pointer_count();
    const std::size_t ne = s.epsilons.size();
    std::vector<CellResult> cells(np * ne);

    if (s.engine == Engine::Quantum) {
        const PointerGrid grid(s.grid.points, s.grid.length);
        std::vector<std::optional<PointerState>> pointers(np);
        parallel_for(np, report.workers, [&](std::size_t i) {
            const auto& ptr = s.quantum_pointers[i];
            pointers[i] = with_coordinates("pointer=" + ptr.label,
                                           [&] { return gallery::make_pointer(ptr.preset, ptr.parameters, grid); });
        });
        parallel_for(cells.size(), report.workers, [&](std::size_t k) {
            const auto tc = Clock::now();
            const std::size_t i = k / ne, j = k % ne;
            cells[k] = quantum_cell(*s.quantum_object, s.quantum_pointers[i], *pointers[i], s.epsilons[j]);
            cells[k].diagnostics.seconds = seconds_since(tc);
        });
    } else {
        parallel_for(cells.size(), report.workers, [&](std::size_t k) {
            const auto tc = Clock::now();
            const std::size_t i = k / ne, j = k % ne;
            cells[k] = classical_cell(s, s.classical_pointers[i], s.epsilons[j], s.seed);
            cells[k].diagnostics.seconds = seconds_since(tc);
        });
    }

    for (auto& c : cells) {
        for (auto& r : c.records) report.records.push_back(std::move(r));
        report.cells.push_back(c.diagnostics);
    }

    for (std::size_t i = 0; i < np; ++i) {
        std::vector<double> eps(s.epsilons);
        auto column = [&](auto member) {
            std::vector<double> v;
            for (std::size_t j = 0; j < ne; ++j) v.push_back(cells[i * ne + j].diagnostics.*member);
            return v;
        };
        const std::string label = s.engine == Engine::Quantum ? s.quantum_pointers[i].label : s.classical_pointers[i].label;
        if (s.engine == Engine::Quantum) {
            report.fits.push_back(try_fit(label, "first_order_error", std::nullopt, eps, column(&CellDiagnostics::first_order_error)));
            report.fits.push_back(try_fit(label, "remainder_residual", std::nullopt, eps, column(&CellDiagnostics::remainder_residual)));
            report.fits.push_back(try_fit(label, "marginal_drift", std::nullopt, eps, column(&CellDiagnostics::marginal_drift)));
            const auto& outcomes = s.quantum_object->outcomes;
            for (std::size_t o = 0; o < outcomes.size(); ++o) {
                std::vector<double> err;
                for (std::size_t j = 0; j < ne; ++j) err.push_back(cells[i * ne + j].records[o].abs_err);
                report.fits.push_back(try_fit(label, "abs_err", outcomes[o], eps, err));
            }
        } else {
            report.fits.push_back(try_fit(label, "mean_abs_shift", std::nullopt, eps, column(&CellDiagnostics::mean_abs_shift)));
        }
    }
    report.seconds = seconds_since(t0);
    return report;
}

json RunReport::to_json(bool include_timings) const {
    json j;
    j["schema_version"] = kReportSchema;
    j["engine"] = to_string(scenario.engine);
    j["scenario"] = scenario.source;
    j["seed"] = scenario.seed;
    j["epsilons"] = scenario.epsilons;

    json recs = json::array();
    for (const auto& r : records) {
        json f = json::object();
        for (const auto& [k, v] : r.flags) f[k] = v;
        recs.push_back({{"engine", r.engine},
                        {"pointer", r.pointer},
                        {"epsilon", r.epsilon},
                        {"outcome", r.outcome},
                        {"cw_re", r.cw_re},
                        {"cw_im", r.cw_im},
                        {"predicted_shift", r.predicted_shift},
                        {"measured_shift", r.measured_shift},
                        {"abs_err", r.abs_err},
                        {"remainder_norm", number_or_null(r.remainder_norm)},
                        {"weakness_ratio", r.weakness_ratio},
                        {"current_max", r.current_max},
                        {"marginal_drift", r.marginal_drift},
                        {"flags", f}});
    }
    j["records"] = recs;

    json diags = json::array();
    for (const auto& c : cells) {
        json d{{"pointer", c.pointer},
               {"epsilon", c.epsilon},
               {"first_order_error", number_or_null(c.first_order_error)},
               {"remainder_residual", number_or_null(c.remainder_residual)},
               {"marginal_drift", number_or_null(c.marginal_drift)}};
        if (scenario.engine == Engine::Classical) {
            d["mean_abs_shift"] = number_or_null(c.mean_abs_shift);
            d["agreement_fraction"] = number_or_null(c.agreement_fraction);
            d["invariant_drift"] = number_or_null(c.invariant_drift);
            d["marginal_identical"] = c.marginal_identical;
            d["marginal_chi_square_passed"] = c.marginal_passed;
        }
        diags.push_back(d);
    }
    j["cells"] = diags;

    json fs = json::array();
    for (const auto& f : fits) {
        json e{{"pointer", f.pointer}, {"quantity", f.quantity}};
        if (f.outcome) e["outcome"] = *f.outcome;
        if (f.fit) {
            e["slope"] = f.fit->slope;
            e["intercept"] = f.fit->intercept;
            e["r_squared"] = f.fit->r_squared;
            e["slope_stderr"] = f.fit->slope_stderr;
            e["ci95"] = {f.fit->ci_low, f.fit->ci_high};
            e["points"] = f.fit->points;
        } else {
            e["skipped"] = f.skipped;
        }
        fs.push_back(e);
    }
    j["fits"] = fs;
    j["physics_ok"] = physics_ok();

    if (include_timings) {
        json t{{"total_seconds", seconds}, {"workers", workers}};
        json per = json::array();
        for (const auto& c : cells) per.push_back({{"pointer", c.pointer}, {"epsilon", c.epsilon}, {"seconds", c.seconds}});
        t["cells"] = per;
        j["timings"] = t;
    }
    return j;
}

void write_csv(std::ostream& out, const std::vector<Record>& records) {
    auto field = [](const std::string& s) {
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string q = "\"";
        for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
        return q + "\"";
    };
    out << "engine,pointer,epsilon,outcome,cw_re,cw_im,predicted_shift,measured_shift,abs_err,"
           "remainder_norm,weakness_ratio,current_max,marginal_drift,flags\n";
    for (const auto& r : records) {
        out << r.engine << ',' << field(r.pointer) << ',' << format_number(r.epsilon) << ',' << r.outcome << ','
            << format_number(r.cw_re) << ',' << format_number(r.cw_im) << ',' << format_number(r.predicted_shift)
            << ',' << format_number(r.measured_shift) << ',' << format_number(r.abs_err) << ','
            << format_number(r.remainder_norm) << ',' << format_number(r.weakness_ratio) << ','
            << format_number(r.current_max) << ',' << format_number(r.marginal_drift) << ',' << r.flags_text()
            << '\n';
    }
}

void write_outputs(const RunReport& report, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream csv(dir / report.scenario.output.csv, std::ios::binary);
        if (!csv) throw Error("cannot write " + (dir / report.scenario.output.csv).string());
        write_csv(csv, report.records);
    }
    std::ofstream js(dir / report.scenario.output.report, std::ios::binary);
    if (!js) throw Error("cannot write " + (dir / report.scenario.output.report).string());
    js << report.to_json().dump(2) << '\n';
}

std::vector<AuditRow> gallery_audit(const PointerGrid& grid) {
    const Tolerances tol;
    std::vector<AuditRow> rows;
    for (const auto& p : gallery::pointer_presets()) {
        const auto state = p.build(grid);
        AuditRow r;
        r.name = p.name;
        r.purity = state.purity();
        r.position_std = position_moments(grid, state.density()).std;
        r.current_max = normalized_current(state);
        r.zero_current = r.current_max < tol.zero_current;
        r.expected_zero_current = p.expected_zero_current;
        rows.push_back(r);
    }
    return rows;
}

}  // namespace wvlab::lab
