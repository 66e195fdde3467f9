#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "wvlab/classical/engine.hpp"
#include "wvlab/core/errors.hpp"
#include "wvlab/gallery/gallery.hpp"
#include "wvlab/lab/run.hpp"
#include "wvlab/lab/scenario.hpp"

namespace {

enum Exit { kOk = 0, kValidation = 1, kPhysics = 2, kRuntime = 3 };

using namespace wvlab;

int cmd_run(const std::string& file, std::size_t workers, const std::string& out_dir,
            std::optional<std::uint64_t> seed) {
    const auto scenario = lab::load_scenario(file);
    lab::RunOptions opt;
    opt.workers = workers;
    opt.seed = seed;
    const auto report = lab::run(scenario, opt);
    const std::filesystem::path dir = out_dir.empty() ? scenario.output.dir : std::filesystem::path(out_dir);
    lab::write_outputs(report, dir);

    std::printf("%zu records, %.2f s, wrote %s and %s\n", report.records.size(), report.seconds,
                (dir / scenario.output.csv).c_str(), (dir / scenario.output.report).c_str());
    for (const auto& f : report.fits) {
        std::string what = f.pointer + " " + f.quantity;
        if (f.outcome) what += " d=" + std::to_string(*f.outcome);
        if (f.fit)
            std::printf("  slope %-40s %7.4f  [%.4f, %.4f]  r2=%.6f\n", what.c_str(), f.fit->slope, f.fit->ci_low,
                        f.fit->ci_high, f.fit->r_squared);
        else
            std::printf("  slope %-40s skipped (%s)\n", what.c_str(), f.skipped.c_str());
    }
    if (!report.physics_ok()) {
        std::fprintf(stderr, "validity flags failed for at least one record\n");
        return kPhysics;
    }
    return kOk;
}

int cmd_validate(const std::string& file) {
    const auto s = lab::load_scenario(file);
    std::printf("%s: ok (%s engine, %zu pointers, %zu couplings)\n", file.c_str(), lab::to_string(s.engine).c_str(),
                s.pointer_count(), s.epsilons.size());
    return kOk;
}

int cmd_audit() {
    const auto rows = lab::gallery_audit();
    bool ok = true;
    std::printf("%-14s %10s %10s %12s %8s %9s\n", "pointer", "purity", "std", "current_max", "valid", "expected");
    for (const auto& r : rows) {
        std::printf("%-14s %10.6f %10.6f %12.3e %8s %9s%s\n", r.name.c_str(), r.purity, r.position_std,
                    r.current_max, r.zero_current ? "yes" : "no", r.expected_zero_current ? "yes" : "no",
                    r.ok() ? "" : "  MISMATCH");
        ok = ok && r.ok();
    }
    return ok ? kOk : kPhysics;
}

int cmd_list() {
    std::printf("pointer presets (quantum):\n");
    for (const auto& p : gallery::pointer_presets()) {
        std::string params;
        for (const auto& [k, v] : p.parameters) params += " " + k + "=" + lab::format_number(v);
        std::printf("  %-14s%s\n      %s\n", p.name.c_str(), params.c_str(), p.description.c_str());
    }
    std::printf("object presets (quantum):\n");
    for (const auto& o : gallery::object_presets()) {
        std::string cw;
        for (const auto& w : o.reference_weak_values)
            cw += " (" + lab::format_number(w.real() + 0.0) + (w.imag() < 0 ? "" : "+") + lab::format_number(w.imag()) + "i)";
        std::printf("  %-18s c_w:%s\n      %s\n", o.name.c_str(), cw.c_str(), o.description.c_str());
    }
    std::printf("c-number observables (classical):\n ");
    for (const auto& n : classical::CNumberObservable::names()) std::printf(" %s", n.c_str());
    std::printf("\n");
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Weak-measurement simulation lab"};
    app.require_subcommand(1);

    std::size_t workers = 1;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::string file;

    auto* run = app.add_subcommand("run", "Run a scenario file and write CSV and JSON reports");
    run->add_option("file", file, "Scenario JSON")->required();
    run->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
    run->add_option("--out", out_dir, "Output directory (overrides output.dir)");
    run->add_option("--seed", seed, "RNG seed (overrides the scenario seed)");

    auto* validate = app.add_subcommand("validate", "Validate a scenario file without running it");
    validate->add_option("file", file, "Scenario JSON")->required();

    auto* audit = app.add_subcommand("audit-gallery", "Purity, width and current verdict of every pointer preset");
    auto* list = app.add_subcommand("list-presets", "List pointer, object and observable presets");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kValidation;
    }

    try {
        if (*run) return cmd_run(file, workers, out_dir, seed);
        if (*validate) return cmd_validate(file);
        if (*audit) return cmd_audit();
        if (*list) return cmd_list();
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return kValidation;
    } catch (const PhysicsError& e) {
        std::cerr << "physics error: " << e.what() << '\n';
        return kPhysics;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntime;
    }
    return kRuntime;
}
