#include <doctest.h>

#include <cmath>
#include <sstream>

#include "wvlab/core/errors.hpp"
#include "wvlab/lab/fit.hpp"
#include "wvlab/lab/run.hpp"
#include "wvlab/lab/scenario.hpp"

using namespace wvlab;
using namespace wvlab::lab;
using nlohmann::json;

namespace {

std::string validation_message(const json& doc) {
    try {
        parse_scenario(doc);
    } catch (const ValidationError& e) {
        return e.what();
    }
    return "";
}

json quantum_doc() {
    return json::parse(R"({
        "engine": "quantum",
        "object": {"preset": "anomalous", "outcomes": [0]},
        "pointers": [{"preset": "gaussian"}, {"preset": "thermal"}],
        "sweep": {"geometric": {"start": 1e-4, "stop": 1e-2, "count": 5}}
    })");
}

json classical_doc() {
    return json::parse(R"({
        "engine": "classical",
        "object": {"density": {"correlation": 0.8}, "observable": "momentum"},
        "pointers": [{"label": "g"}],
        "sweep": {"epsilons": [1e-3, 1e-2]},
        "ensemble": {"samples": 20000, "bins": 11},
        "seed": 5
    })");
}

std::string csv(const RunReport& r) {
    std::ostringstream os;
    write_csv(os, r.records);
    return os.str();
}

}  // namespace

TEST_CASE("fit_slope: synthetic power laws") {
    std::vector<double> x{1e-4, 3e-4, 1e-3, 3e-3, 1e-2}, y2, y3;
    for (double e : x) {
        y2.push_back(7.0 * e * e);
        y3.push_back(0.5 * e * e * e);
    }
    const auto f2 = fit_slope(x, y2);
    CHECK(std::abs(f2.slope - 2.0) < 1e-6);
    CHECK(f2.r_squared == doctest::Approx(1.0));
    CHECK(std::exp(f2.intercept) == doctest::Approx(7.0).epsilon(1e-9));
    CHECK(f2.ci_high - f2.ci_low < 1e-6);
    CHECK(std::abs(fit_slope(x, y3).slope - 3.0) < 1e-6);

    std::vector<double> noisy{1.0, 2.2, 2.9, 4.3, 4.8};
    std::vector<double> xs{1, 2, 3, 4, 5};
    const auto fn = fit_slope(xs, noisy);
    CHECK(fn.ci_low < fn.slope);
    CHECK(fn.slope < fn.ci_high);
    CHECK(fn.r_squared < 1.0);

    CHECK_THROWS_AS(fit_slope(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 3}), ValidationError);
    CHECK_THROWS_AS(fit_slope(std::vector<double>{1, 2, 3, 4}, std::vector<double>{1, 0, 3, 4}), ValidationError);
    CHECK_THROWS_AS(fit_slope(std::vector<double>{-1, 2, 3, 4}, std::vector<double>{1, 2, 3, 4}), ValidationError);
}

TEST_CASE("scenario validation reports field paths") {
    CHECK(parse_scenario(quantum_doc()).epsilons.size() == 5);
    CHECK(parse_scenario(quantum_doc()).epsilons.back() == 1e-2);

    auto d = quantum_doc();
    d["colour"] = "blue";
    CHECK(validation_message(d).starts_with("colour: unknown key"));

    d = quantum_doc();
    d["sweep"] = json::parse(R"({"epsilons": [1e-3, 1e-4]})");
    CHECK(validation_message(d).starts_with("sweep.epsilons[1]:"));

    d = quantum_doc();
    d["sweep"] = json::parse(R"({"epsilons": [-1e-3]})");
    CHECK(validation_message(d).starts_with("sweep.epsilons[0]:"));

    d = quantum_doc();
    d["pointers"][1]["preset"] = "squeezed";
    CHECK(validation_message(d).starts_with("pointers[1]:"));

    d = quantum_doc();
    d["pointers"][0]["parameters"] = {{"sigma", 0.01}};
    CHECK(validation_message(d).starts_with("pointers[0]:"));

    d = quantum_doc();
    d["pointers"][1]["preset"] = "gaussian";
    CHECK(validation_message(d).starts_with("pointers[1].label:"));

    d = quantum_doc();
    d["object"]["outcomes"] = {5};
    CHECK(validation_message(d).starts_with("object.outcomes[0]:"));

    d = quantum_doc();
    d["ensemble"] = json::object();
    CHECK(validation_message(d).starts_with("ensemble:"));

    d = quantum_doc();
    d["sweep"] = json::parse(R"({"epsilons": [20.0]})");
    CHECK(validation_message(d).starts_with("sweep:"));

    d = quantum_doc();
    d["object"] = json::parse(R"({"psi": [1, 0], "observable": [[1, 0], [0, -1]],
                                  "postselection": [[1, 0], [1, 0]]})");
    CHECK(validation_message(d).starts_with("object.postselection:"));

    d = quantum_doc();
    d["object"] = json::parse(R"({"psi": [1, 0], "observable": [[1, 0], [0, -1]],
                                  "postselection": [[1, 0], [0, 1]]})");
    CHECK(validation_message(d).find("vanishing post-selection") != std::string::npos);

    d = quantum_doc();
    d["object"] = json::parse(R"({"psi": [1, 1], "observable": [[1, [0, 1]], [0, -1]],
                                  "postselection": [[1, 0], [0, 1]]})");
    CHECK(validation_message(d).starts_with("object.observable:"));

    auto c = classical_doc();
    c["pointers"][0]["density"] = {{"correlation", 1.5}};
    CHECK(validation_message(c).starts_with("pointers[0].density.correlation:"));
    c = classical_doc();
    c["object"]["observable"] = "energy";
    CHECK(validation_message(c).starts_with("object.observable:"));
    c = classical_doc();
    c["ensemble"]["samples"] = 10;
    CHECK(validation_message(c).starts_with("ensemble.samples:"));

    CHECK_THROWS_AS(parse_scenario_text("{not json"), ValidationError);
}

TEST_CASE("run: eps = 0 gives zero shifts") {
    auto d = quantum_doc();
    d["sweep"] = json::parse(R"({"epsilons": [0]})");
    d["object"].erase("outcomes");
    const auto report = run(parse_scenario(d));
    REQUIRE(report.records.size() == 4);
    for (const auto& r : report.records) {
        CHECK(r.measured_shift == 0.0);
        CHECK(r.predicted_shift == 0.0);
        CHECK(r.abs_err == 0.0);
    }
}

TEST_CASE("run: anomalous sweep over two pointers") {
    const auto report = run(parse_scenario(quantum_doc()));
    REQUIRE(report.records.size() == 10);
    for (const auto& r : report.records) {
        CHECK(r.cw_re == report.records.front().cw_re);
        CHECK(r.cw_re == doctest::Approx(-(2.0 + std::sqrt(3.0))).epsilon(1e-12));
        CHECK(r.flags_ok());
    }
    int checked = 0;
    for (const auto& f : report.fits) {
        REQUIRE(f.fit.has_value());
        if (f.quantity == "first_order_error" || f.quantity == "marginal_drift") {
            CHECK(f.fit->slope == doctest::Approx(2.0).epsilon(0.05));
            ++checked;
        }
        if (f.quantity == "remainder_residual") {
            CHECK(f.fit->slope == doctest::Approx(3.0).epsilon(0.2 / 3));
            ++checked;
        }
        // Symmetric pointers with a real weak value have no second-order shift,
        // so the shift error itself falls off as eps^3.
        if (f.quantity == "abs_err") {
            CHECK(f.fit->slope == doctest::Approx(3.0).epsilon(0.05));
            ++checked;
        }
    }
    CHECK(checked == 8);
    CHECK(report.physics_ok());

    const auto j = report.to_json();
    CHECK(j["schema_version"] == kReportSchema);
    CHECK(j["records"].size() == 10);
    CHECK(j["scenario"] == quantum_doc());
    CHECK(j.contains("timings"));
}

TEST_CASE("run: csv layout, determinism and worker independence") {
    const auto s = parse_scenario(classical_doc());
    const auto a = run(s, {1, std::nullopt});
    const auto b = run(s, {3, std::nullopt});
    CHECK(csv(a) == csv(b));
    CHECK(a.to_json(false) == b.to_json(false));
    CHECK(csv(a) == csv(run(s)));
    CHECK(csv(a) != csv(run(s, {1, 6})));

    const std::string text = csv(a);
    CHECK(text.substr(0, text.find('\n')) ==
          "engine,pointer,epsilon,outcome,cw_re,cw_im,predicted_shift,measured_shift,abs_err,remainder_norm,"
          "weakness_ratio,current_max,marginal_drift,flags");
    CHECK(text.find("\nclassical,g,0.001,") != std::string::npos);
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(NAN) == "nan");
}

TEST_CASE("run: physics flags and coordinates in errors") {
    auto d = quantum_doc();
    d["object"]["preset"] = "imaginary";
    d["pointers"] = json::parse(R"([{"preset": "boosted"}])");
    const auto report = run(parse_scenario(d));
    CHECK_FALSE(report.physics_ok());
    for (const auto& f : report.fits)
        if (f.quantity == "first_order_error") CHECK_FALSE(f.fit.has_value());

    auto c = classical_doc();
    c["pointers"][0]["density"] = {{"mean_P", 0.5}};
    try {
        run(parse_scenario(c));
        FAIL("expected a physics error");
    } catch (const PhysicsError& e) {
        CHECK(std::string(e.what()).starts_with("pointer=g, epsilon=0.001:"));
    }
}

TEST_CASE("gallery audit") {
    const auto rows = gallery_audit();
    REQUIRE(rows.size() == 5);
    for (const auto& r : rows) {
        CAPTURE(r.name);
        CHECK(r.ok());
        if (r.name == "thermal" || r.name == "mixture") CHECK(r.zero_current);
        if (r.name == "boosted") CHECK_FALSE(r.zero_current);
        if (r.name == "thermal") CHECK(r.purity == doctest::Approx(std::tanh(0.5)).epsilon(1e-4));
    }
}
