#include "wvlab/lab/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "wvlab/core/errors.hpp"
#include "wvlab/quantum/engine.hpp"

namespace wvlab::lab {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& message) {
    throw ValidationError(path + ": " + message);
}

std::string at(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

std::string at(const std::string& path, std::size_t index) {
    return path + "[" + std::to_string(index) + "]";
}

void allow_keys(const json& obj, const std::string& path, std::initializer_list<const char*> keys) {
    if (!obj.is_object()) fail(path.empty() ? "(root)" : path, "expected an object");
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [key, _] : obj.items())
        if (!allowed.contains(key)) fail(at(path, key), "unknown key");
}

const json& require(const json& obj, const std::string& path, const char* key) {
    if (!obj.contains(key)) fail(at(path, key), "required");
    return obj.at(key);
}

double number(const json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(path, "must be finite");
    return x;
}

double positive(const json& v, const std::string& path) {
    const double x = number(v, path);
    if (!(x > 0.0)) fail(path, "must be positive");
    return x;
}

std::size_t count(const json& v, const std::string& path, std::size_t min) {
    if (!v.is_number_integer() || v.get<long long>() < static_cast<long long>(min))
        fail(path, "expected an integer >= " + std::to_string(min));
    return v.get<std::size_t>();
}

std::string text(const json& v, const std::string& path) {
    if (!v.is_string() || v.get<std::string>().empty()) fail(path, "expected a non-empty string");
    return v.get<std::string>();
}

cplx complex_entry(const json& v, const std::string& path) {
    if (v.is_number()) return {number(v, path), 0.0};
    if (v.is_array() && v.size() == 2) return {number(v[0], at(path, 0)), number(v[1], at(path, 1))};
    fail(path, "expected a number or [re, im]");
}

ComplexVector complex_vector(const json& v, const std::string& path) {
    if (!v.is_array() || v.empty()) fail(path, "expected a non-empty array");
    ComplexVector out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out(Eigen::Index(i)) = complex_entry(v[i], at(path, i));
    return out;
}

ComplexMatrix complex_rows(const json& v, const std::string& path) {
    if (!v.is_array() || v.empty()) fail(path, "expected an array of rows");
    const auto n = static_cast<Eigen::Index>(v.size());
    ComplexMatrix out(n, n);
    for (std::size_t r = 0; r < v.size(); ++r) {
        const ComplexVector row = complex_vector(v[r], at(path, r));
        if (row.size() != n) fail(at(path, r), "matrix must be square");
        out.row(Eigen::Index(r)) = row.transpose();
    }
    return out;
}

template <class F>
auto rethrow_at(const std::string& path, F&& f) {
    try {
        return f();
    } catch (const ValidationError& e) {
        fail(path, e.what());
    } catch (const RangeError& e) {
        fail(path, e.what());
    }
}

QuantumObject parse_quantum_object(const json& o, const std::string& path) {
    allow_keys(o, path, {"preset", "state", "psi", "observable", "postselection", "outcomes"});
    QuantumObject obj = [&] {
        if (o.contains("preset")) {
            for (const char* k : {"state", "psi", "observable", "postselection"})
                if (o.contains(k)) fail(at(path, k), "not allowed together with a preset");
            const auto name = text(o["preset"], at(path, "preset"));
            const auto p = rethrow_at(at(path, "preset"), [&] { return gallery::object_preset(name); });
            return QuantumObject{name, p.object_state, p.observable, p.postselection, {}};
        }
        if (o.contains("state") == o.contains("psi")) fail(path, "give exactly one of 'state' or 'psi'");
        const auto obs = rethrow_at(at(path, "observable"), [&] {
            return spectral_decompose(complex_rows(require(o, path, "observable"), at(path, "observable")));
        });
        const auto state = o.contains("psi")
                               ? rethrow_at(at(path, "psi"), [&] {
                                     return DensityMatrix::pure(complex_vector(o["psi"], at(path, "psi")).normalized());
                                 })
                               : rethrow_at(at(path, "state"), [&] {
                                     return DensityMatrix(complex_rows(o["state"], at(path, "state")));
                                 });
        const json& post = require(o, path, "postselection");
        const std::string ppath = at(path, "postselection");
        if (!post.is_array() || post.empty()) fail(ppath, "expected a list of vectors");
        ComplexMatrix basis(Eigen::Index(obs.dim()), static_cast<Eigen::Index>(post.size()));
        for (std::size_t i = 0; i < post.size(); ++i) {
            const ComplexVector v = complex_vector(post[i], at(ppath, i));
            if (std::size_t(v.size()) != obs.dim()) fail(at(ppath, i), "dimension does not match the observable");
            basis.col(Eigen::Index(i)) = v;
        }
        if (state.dim() != obs.dim()) fail(path, "state and observable dimensions differ");
        if (std::size_t(basis.cols()) != obs.dim()) fail(ppath, "need one vector per dimension");
        if (!is_orthonormal(basis, Tolerances{}.basis_orthonormal)) fail(ppath, "vectors are not orthonormal");
        return QuantumObject{"inline", state, obs, basis, {}};
    }();

    const auto outcomes = static_cast<std::size_t>(obj.postselection.cols());
    if (o.contains("outcomes")) {
        const std::string opath = at(path, "outcomes");
        if (!o["outcomes"].is_array() || o["outcomes"].empty()) fail(opath, "expected a non-empty list");
        for (std::size_t i = 0; i < o["outcomes"].size(); ++i) {
            const auto d = count(o["outcomes"][i], at(opath, i), 0);
            if (d >= outcomes) fail(at(opath, i), "outcome index out of range");
            if (!obj.outcomes.empty() && d <= obj.outcomes.back()) fail(at(opath, i), "must be strictly increasing");
            obj.outcomes.push_back(d);
        }
    } else {
        for (std::size_t d = 0; d < outcomes; ++d) obj.outcomes.push_back(d);
    }
    for (std::size_t i = 0; i < obj.outcomes.size(); ++i) {
        const double p = quantum::postselection_probability(
            obj.state, obj.postselection.col(static_cast<Eigen::Index>(obj.outcomes[i])));
        if (!(p > Tolerances{}.postselection_min))
            fail(o.contains("outcomes") ? at(at(path, "outcomes"), i) : path,
                 "outcome " + std::to_string(obj.outcomes[i]) + " has vanishing post-selection probability");
    }
    return obj;
}

classical::GaussianPhaseDensity parse_density(const json& o, const std::string& path, const char* x,
                                              const char* y, const char* sx, const char* sy) {
    allow_keys(o, path, {x, y, sx, sy, "correlation"});
    classical::GaussianPhaseDensity d;
    if (o.contains(x)) d.mean_x = number(o[x], at(path, x));
    if (o.contains(y)) d.mean_y = number(o[y], at(path, y));
    if (o.contains(sx)) d.std_x = positive(o[sx], at(path, sx));
    if (o.contains(sy)) d.std_y = positive(o[sy], at(path, sy));
    if (o.contains("correlation")) {
        d.correlation = number(o["correlation"], at(path, "correlation"));
        if (!(std::abs(d.correlation) < 1.0)) fail(at(path, "correlation"), "must lie in (-1, 1)");
    }
    return d;
}

std::vector<double> parse_sweep(const json& s, const std::string& path) {
    allow_keys(s, path, {"epsilons", "geometric"});
    if (s.contains("epsilons") == s.contains("geometric")) fail(path, "give exactly one of 'epsilons' or 'geometric'");
    std::vector<double> eps;
    if (s.contains("epsilons")) {
        const std::string p = at(path, "epsilons");
        if (!s["epsilons"].is_array() || s["epsilons"].empty()) fail(p, "expected a non-empty list");
        for (std::size_t i = 0; i < s["epsilons"].size(); ++i) {
            const double e = number(s["epsilons"][i], at(p, i));
            if (e < 0.0) fail(at(p, i), "couplings must be nonnegative");
            if (!eps.empty() && !(e > eps.back())) fail(at(p, i), "values must be sorted strictly ascending");
            eps.push_back(e);
        }
        return eps;
    }
    const std::string p = at(path, "geometric");
    const json& g = s["geometric"];
    allow_keys(g, p, {"start", "stop", "count"});
    const double start = positive(require(g, p, "start"), at(p, "start"));
    const double stop = positive(require(g, p, "stop"), at(p, "stop"));
    const std::size_t n = count(require(g, p, "count"), at(p, "count"), 2);
    if (!(stop > start)) fail(at(p, "stop"), "must exceed start");
    for (std::size_t i = 0; i < n; ++i)
        eps.push_back(start * std::pow(stop / start, static_cast<double>(i) / static_cast<double>(n - 1)));
    eps.back() = stop;
    return eps;
}

}  // namespace

std::string to_string(Engine e) { return e == Engine::Quantum ? "quantum" : "classical"; }

Scenario parse_scenario(const json& doc) {
    allow_keys(doc, "", {"engine", "object", "pointers", "sweep", "grid", "ensemble", "output", "seed"});
    Scenario s;
    s.source = doc;

    const auto engine = text(require(doc, "", "engine"), "engine");
    if (engine == "quantum") s.engine = Engine::Quantum;
    else if (engine == "classical") s.engine = Engine::Classical;
    else fail("engine", "expected 'quantum' or 'classical'");

    if (doc.contains("seed")) {
        if (!doc["seed"].is_number_unsigned()) fail("seed", "expected a nonnegative integer");
        s.seed = doc["seed"].get<std::uint64_t>();
    }
    s.epsilons = parse_sweep(require(doc, "", "sweep"), "sweep");

    if (doc.contains("output")) {
        const json& o = doc["output"];
        allow_keys(o, "output", {"dir", "csv", "report"});
        if (o.contains("dir")) s.output.dir = text(o["dir"], "output.dir");
        if (o.contains("csv")) s.output.csv = text(o["csv"], "output.csv");
        if (o.contains("report")) s.output.report = text(o["report"], "output.report");
    }

    const json& pointers = require(doc, "", "pointers");
    if (!pointers.is_array() || pointers.empty()) fail("pointers", "expected a non-empty list");
    std::set<std::string> labels;

    if (s.engine == Engine::Quantum) {
        if (doc.contains("ensemble")) fail("ensemble", "only valid for the classical engine");
        if (doc.contains("grid")) {
            const json& g = doc["grid"];
            allow_keys(g, "grid", {"points", "length"});
            if (g.contains("points")) s.grid.points = count(g["points"], "grid.points", 16);
            if (g.contains("length")) s.grid.length = positive(g["length"], "grid.length");
        }
        s.quantum_object = parse_quantum_object(require(doc, "", "object"), "object");
        const PointerGrid grid(s.grid.points, s.grid.length);
        const double guard = grid.length() / 4.0;
        if (s.epsilons.back() * s.quantum_object->observable.max_abs_eigenvalue() >= guard)
            fail("sweep", "largest coupling times max |c_j| must stay below grid.length / 4");

        for (std::size_t i = 0; i < pointers.size(); ++i) {
            const std::string p = at("pointers", i);
            allow_keys(pointers[i], p, {"preset", "label", "parameters"});
            QuantumPointer qp;
            qp.preset = text(require(pointers[i], p, "preset"), at(p, "preset"));
            qp.label = pointers[i].contains("label") ? text(pointers[i]["label"], at(p, "label")) : qp.preset;
            if (pointers[i].contains("parameters")) {
                const json& params = pointers[i]["parameters"];
                if (!params.is_object()) fail(at(p, "parameters"), "expected an object");
                for (const auto& [k, v] : params.items()) qp.parameters[k] = number(v, at(at(p, "parameters"), k));
            }
            rethrow_at(p, [&] { return gallery::make_pointer(qp.preset, qp.parameters, grid); });
            if (!labels.insert(qp.label).second) fail(at(p, "label"), "duplicate pointer label '" + qp.label + "'");
            s.quantum_pointers.push_back(std::move(qp));
        }
    } else {
        if (doc.contains("grid")) fail("grid", "only valid for the quantum engine");
        if (doc.contains("ensemble")) {
            const json& e = doc["ensemble"];
            allow_keys(e, "ensemble", {"samples", "bins", "range_std", "current_bins", "substeps", "min_bin_count"});
            if (e.contains("samples")) s.ensemble.samples = count(e["samples"], "ensemble.samples", 10'000);
            if (e.contains("bins")) s.ensemble.bins = count(e["bins"], "ensemble.bins", 1);
            if (e.contains("range_std")) s.ensemble.range_std = positive(e["range_std"], "ensemble.range_std");
            if (e.contains("current_bins")) s.ensemble.current_bins = count(e["current_bins"], "ensemble.current_bins", 1);
            if (e.contains("substeps")) s.ensemble.substeps = static_cast<int>(count(e["substeps"], "ensemble.substeps", 1));
            if (e.contains("min_bin_count")) s.ensemble.min_bin_count = count(e["min_bin_count"], "ensemble.min_bin_count", 2);
        }
        const json& o = require(doc, "", "object");
        allow_keys(o, "object", {"density", "observable"});
        ClassicalObject obj;
        obj.density = o.contains("density")
                          ? parse_density(o["density"], "object.density", "mean_q", "mean_p", "std_q", "std_p")
                          : classical::GaussianPhaseDensity{};
        obj.observable = text(require(o, "object", "observable"), "object.observable");
        rethrow_at("object.observable", [&] { return classical::CNumberObservable::named(obj.observable); });
        s.classical_object = obj;

        for (std::size_t i = 0; i < pointers.size(); ++i) {
            const std::string p = at("pointers", i);
            allow_keys(pointers[i], p, {"label", "density"});
            ClassicalPointer cp;
            cp.label = text(require(pointers[i], p, "label"), at(p, "label"));
            cp.density = pointers[i].contains("density")
                             ? parse_density(pointers[i]["density"], at(p, "density"), "mean_Q", "mean_P", "std_Q", "std_P")
                             : classical::GaussianPhaseDensity{};
            if (!labels.insert(cp.label).second) fail(at(p, "label"), "duplicate pointer label '" + cp.label + "'");
            s.classical_pointers.push_back(std::move(cp));
        }
    }
    return s;
}

Scenario parse_scenario_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("(root): malformed JSON: ") + e.what());
    }
    return parse_scenario(doc);
}

Scenario load_scenario(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ValidationError(file.string() + ": cannot open scenario file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario_text(buf.str());
}

}  // namespace wvlab::lab
