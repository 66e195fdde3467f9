#pragma once

namespace wvlab {

// Numerical thresholds shared by the engines. Every operation that needs one
// takes a `const Tolerances&` so callers can tighten or relax them per run.
struct Tolerances {
    // core
    double hermitian_rel = 1e-12;
    double projector = 1e-10;
    double degeneracy_rel = 1e-9;
    double density_trace = 1e-10;
    double density_min_eigenvalue = -1e-10;
    double pointer_trace = 1e-8;
    double pointer_min_diagonal = -1e-12;
    double moments_min_norm = 1e-14;
    double moments_negative_variance = -1e-12;

    // quantum engine
    double basis_orthonormal = 1e-10;
    double postselection_min = 1e-12;
    double zero_current = 1e-8;  // on the normalised current, see normalized_current()
    double weakness_ratio_max = 0.1;
    double remainder_fraction = 0.1;
    double conditional_clamp = 1e-10;
    double conditional_min_marginal = 1e-12;
};

}  // namespace wvlab
