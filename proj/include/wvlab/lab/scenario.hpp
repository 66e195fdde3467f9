#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "wvlab/classical/engine.hpp"
#include "wvlab/core/linalg.hpp"
#include "wvlab/gallery/gallery.hpp"

namespace wvlab::lab {

enum class Engine { Quantum, Classical };

std::string to_string(Engine e);

/// Quantum object: a gallery preset or inline matrices.
struct QuantumObject {
    std::string label;
    DensityMatrix state;
    HermitianObservable observable;
    ComplexMatrix postselection;  // columns
    std::vector<std::size_t> outcomes;  // selected columns
};

struct QuantumPointer {
    std::string label;
    std::string preset;
    gallery::Parameters parameters;
};

struct ClassicalObject {
    classical::GaussianPhaseDensity density;
    std::string observable;
};

struct ClassicalPointer {
    std::string label;
    classical::GaussianPhaseDensity density;
};

struct GridSpec {
    std::size_t points = kDefaultGridPoints;
    double length = kDefaultGridWidths;
};

struct EnsembleSpec {
    std::size_t samples = 1'000'000;
    std::size_t bins = 41;
    double range_std = 4.0;
    std::size_t current_bins = 11;
    int substeps = 64;
    std::size_t min_bin_count = 100;
};

struct OutputSpec {
    std::filesystem::path dir = "wvlab-out";
    std::string csv = "records.csv";
    std::string report = "report.json";
};

/// Parsed and validated scenario document. Top-level keys: engine, object,
/// pointers, sweep, grid, ensemble, output, seed. Unknown keys are rejected.
struct Scenario {
    Engine engine = Engine::Quantum;
    std::optional<QuantumObject> quantum_object;
    std::vector<QuantumPointer> quantum_pointers;
    std::optional<ClassicalObject> classical_object;
    std::vector<ClassicalPointer> classical_pointers;
    std::vector<double> epsilons;
    GridSpec grid;
    EnsembleSpec ensemble;
    OutputSpec output;
    std::uint64_t seed = 12345;
    nlohmann::json source;

    std::size_t pointer_count() const {
        return engine == Engine::Quantum ? quantum_pointers.size() : classical_pointers.size();
    }
};

/// ValidationError messages start with the offending field path, e.g.
/// "sweep.epsilons[2]: values must be sorted ascending".
Scenario parse_scenario(const nlohmann::json& doc);
Scenario parse_scenario_text(const std::string& text);
Scenario load_scenario(const std::filesystem::path& file);

}  // namespace wvlab::lab
