#pragma once

#include <map>
#include <string>
#include <vector>

#include "wvlab/core/grid.hpp"
#include "wvlab/core/linalg.hpp"
#include "wvlab/core/pointer_state.hpp"

namespace wvlab::gallery {

/// Pure Gaussian, real wavefunction, position standard deviation sigma.
PointerState gaussian_pointer(double sigma, double center, const PointerGrid& grid);

/// Harmonic-oscillator Gibbs state (unit mass, hbar = k_B = 1) from the
/// closed-form kernel exp(-A (Q^2 + Q'^2) + B Q Q') with
/// A = omega coth(omega/T) / 2 and B = omega / sinh(omega/T).
PointerState thermal_pointer(double omega, double temperature, const PointerGrid& grid);

/// Position standard deviation of thermal_pointer: sqrt(coth(omega / 2T) / (2 omega)).
double thermal_position_std(double omega, double temperature);

/// Normalised g(Q - s/2) + g(Q + s/2) with real Gaussians g of width sigma.
PointerState superposition_pointer(double separation, double sigma, const PointerGrid& grid);

/// Equal-weight incoherent mixture of the same two Gaussians.
PointerState mixture_pointer(double separation, double sigma, const PointerGrid& grid);

/// g(Q) exp(i k0 Q): carries current k0 |g|^2, violating the zero-current condition.
PointerState boosted_pointer(double k0, double sigma, const PointerGrid& grid);

using Parameters = std::map<std::string, double>;

struct PointerPreset {
    std::string name;
    Parameters parameters;
    bool expected_zero_current;
    std::string description;

    PointerState build(const PointerGrid& grid) const;
};

/// Default gallery: gaussian, thermal, superposition, mixture, boosted.
std::vector<PointerPreset> pointer_presets();

/// Allowed parameter names and defaults for a pointer preset; throws
/// ValidationError for unknown names.
const Parameters& pointer_parameter_defaults(const std::string& name);

/// Builds a preset by name, filling missing parameters from the defaults.
PointerState make_pointer(const std::string& name, const Parameters& overrides,
                          const PointerGrid& grid);

/// Grid with kDefaultGridPoints points spanning kDefaultGridWidths pointer widths.
PointerGrid default_grid(double sigma = 1.0);

struct ObjectPreset {
    std::string name;
    std::string description;
    DensityMatrix object_state;
    HermitianObservable observable;
    ComplexMatrix postselection;           // columns
    std::vector<cplx> reference_weak_values;  // one per column, derived by hand
    std::string provenance;
};

/// projective, anomalous, imaginary, mixed, qutrit_degenerate.
std::vector<ObjectPreset> object_presets();
ObjectPreset object_preset(const std::string& name);

}  // namespace wvlab::gallery
