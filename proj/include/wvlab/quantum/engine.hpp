#pragma once

#include <cstddef>

#include "wvlab/core/grid.hpp"
#include "wvlab/core/linalg.hpp"
#include "wvlab/core/pointer_state.hpp"
#include "wvlab/core/tolerances.hpp"

namespace wvlab::quantum {

/// Object observable c, post-selection basis (eigenbasis of d, as columns),
/// object state, pointer state and coupling strength for the impulsive
/// interaction H = eps delta(t) c (x) P.
class MeasurementSetup {
public:
    MeasurementSetup(HermitianObservable observable, ComplexMatrix postselection_basis,
                     DensityMatrix object_state, PointerState pointer, double coupling,
                     const Tolerances& tol = {});

    const HermitianObservable& observable() const noexcept { return observable_; }
    const ComplexMatrix& postselection_basis() const noexcept { return basis_; }
    ComplexVector postselection_vector(std::size_t outcome) const;
    const DensityMatrix& object_state() const noexcept { return object_state_; }
    const PointerState& pointer() const noexcept { return pointer_; }
    double coupling() const noexcept { return coupling_; }
    std::size_t outcomes() const noexcept { return static_cast<std::size_t>(basis_.cols()); }

    MeasurementSetup with_coupling(double coupling) const;
    MeasurementSetup with_pointer(PointerState pointer) const;

private:
    HermitianObservable observable_;
    ComplexMatrix basis_;
    DensityMatrix object_state_;
    PointerState pointer_;
    double coupling_;
};

/// rho(Q, d): density in Q (per unit length), probability in d. Column d holds
/// the pointer slice for outcome d.
struct JointDistribution {
    PointerGrid grid;
    RealMatrix table;

    std::size_t outcomes() const noexcept { return static_cast<std::size_t>(table.cols()); }
    double total_mass() const { return table.sum() * grid.spacing(); }
};

struct ValidityFlags {
    bool zero_current = false;
    bool weak_coupling = false;
    bool remainder_small = false;

    bool all() const noexcept { return zero_current && weak_coupling && remainder_small; }
};

struct WeakValueReport {
    std::size_t outcome = 0;
    double coupling = 0.0;
    cplx weak_value;
    double postselection_probability = 0.0;
    double predicted_shift = 0.0;  // eps Re(c_w)
    double measured_shift = 0.0;   // conditional mean after coupling minus before
    double remainder_norm = 0.0;   // |sum_Q Q R(Q,d) dQ|
    double remainder_limit = 0.0;  // remainder_fraction * |eps Re c_w| * p(d)
    double lagrange_xi0 = 0.0;     // |sum_Q Q R_lagrange(Q,d; xi=0) dQ|
    double lagrange_xi_eps = 0.0;  // same at xi = eps
    double weakness_ratio = 0.0;   // |eps Re c_w| / sigma_Q
    double pointer_std = 0.0;
    double current_max = 0.0;      // normalized_current(pointer)
    double marginal_drift = 0.0;   // |p_eps(d) - p_0(d)|
    ValidityFlags flags;
};

/// <d|rho_s|d>.
double postselection_probability(const DensityMatrix& object_state, const ComplexVector& d);

/// <d|c rho_s|d> / <d|rho_s|d>. Throws NearOrthogonalPostselection when the
/// denominator is below tol.postselection_min.
cplx weak_value(const DensityMatrix& object_state, const HermitianObservable& observable,
                const ComplexVector& postselection, const Tolerances& tol = {});

/// rho_0(Q, d) = <d|rho_s|d> <Q|rho_a|Q>.
JointDistribution product_joint(const MeasurementSetup& setup);

/// Exact joint distribution after the coupling:
/// sum_{j,k} <d|Pi_j rho_s Pi_k|d> <Q|T(eps c_j) rho_a T(eps c_k)^dagger|Q>.
JointDistribution evolve_exact(const MeasurementSetup& setup);

/// rho_0 - eps Re(c_w) d rho_0 / dQ, valid when the pointer current vanishes.
/// Throws InvalidPointerState otherwise.
JointDistribution first_order_joint(const MeasurementSetup& setup, const Tolerances& tol = {});

/// n-th term of the Maclaurin series of rho_eps(Q, d) in eps (n >= 1). The
/// n = 1 term is the general first-order change, with no current assumption.
RealMatrix expansion_term(const MeasurementSetup& setup, int n);

/// Sum of the series terms n = 2..order (order in [2, 6]).
RealMatrix remainder_term(const MeasurementSetup& setup, int order);

/// Lagrange form (eps^2 / 2) d^2 rho_xi / d xi^2 evaluated at xi.
RealMatrix lagrange_remainder(const MeasurementSetup& setup, double xi);

/// rho(Q | d): slice normalised to unit integral; entries in [-clamp, 0) set to 0.
RealVector conditional_pointer(const JointDistribution& joint, std::size_t outcome,
                               const Tolerances& tol = {});

/// sum_Q rho(Q, d) dQ for each d.
RealVector object_marginal(const JointDistribution& joint);

/// Exact conditional shift against the first-order prediction, with the
/// weakness diagnostics for one outcome.
WeakValueReport measure_shift(const MeasurementSetup& setup, std::size_t outcome,
                              const Tolerances& tol = {});

/// max over (Q, d) of |a - b|.
double max_abs_difference(const JointDistribution& a, const JointDistribution& b);

}  // namespace wvlab::quantum
