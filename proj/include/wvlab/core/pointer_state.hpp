#pragma once

#include <memory>
#include <span>

#include "wvlab/core/grid.hpp"
#include "wvlab/core/linalg.hpp"
#include "wvlab/core/tolerances.hpp"

namespace wvlab {

/// Pointer density operator in the position basis, <Q_m|rho_a|Q_n>, normalised
/// in the continuum sense: sum_m rho(Q_m, Q_m) * spacing = 1.
///
/// Immutable. The momentum-space kernel F rho F^dagger (unnormalised DFT) is
/// computed once at construction; copies share both buffers.
class PointerState {
public:
    PointerState(PointerGrid grid, ComplexMatrix kernel, const Tolerances& tol = {});

    /// |psi><psi| with psi rescaled so that sum |psi|^2 spacing = 1.
    static PointerState pure(PointerGrid grid, const ComplexVector& wavefunction);

    /// sum_i w_i |psi_i><psi_i| with each psi_i normalised; weights must sum to 1.
    static PointerState mixture(PointerGrid grid, std::span<const double> weights,
                                std::span<const ComplexVector> wavefunctions);

    const PointerGrid& grid() const noexcept { return data_->grid; }
    const ComplexMatrix& kernel() const noexcept { return data_->kernel; }
    const ComplexMatrix& momentum_kernel() const noexcept { return data_->spectrum; }

    /// Position density rho(Q, Q).
    RealVector density() const;
    /// Tr(rho^2) in continuum normalisation.
    double purity() const;

private:
    struct Data {
        PointerGrid grid;
        ComplexMatrix kernel;
        ComplexMatrix spectrum;
    };

    PointerState(std::shared_ptr<const Data> data) : data_(std::move(data)) {}
    friend PointerState translate(const PointerState&, double);

    std::shared_ptr<const Data> data_;
};

struct Moments {
    double mean;
    double std;
    double norm;
};

/// Kernel displaced by `a`: rho'(Q, Q') = rho(Q - a, Q' - a), applied as
/// exp(-i a P) rho exp(i a P) through momentum-space phases. |a| must stay
/// below length / 4.
PointerState translate(const PointerState& state, double a);

/// Mean, standard deviation and integral of a density sampled on the grid.
Moments position_moments(const PointerGrid& grid, std::span<const double> density,
                         const Tolerances& tol = {});
Moments position_moments(const PointerGrid& grid, const RealVector& density,
                         const Tolerances& tol = {});

/// <Q| A rho B |Q> for A, B diagonal in momentum with eigenvalues f(k_j), g(k_j).
ComplexVector sandwich_diagonal(const PointerState& state, std::span<const cplx> f,
                                std::span<const cplx> g);

/// Same, for an explicit momentum-space kernel (see PointerState::momentum_kernel).
ComplexVector sandwich_diagonal(const ComplexMatrix& spectrum, std::span<const cplx> f,
                                std::span<const cplx> g);

/// Probability current (1/2)(<Q|P rho|Q> + <Q|rho P|Q>).
RealVector current_density(const PointerState& state);

struct MomentumMoments {
    double mean;
    double std;
};

MomentumMoments momentum_moments(const PointerState& state);

/// max |j(Q)| / (sigma_P * max rho(Q,Q)); dimensionless, zero for real kernels.
double normalized_current(const PointerState& state);

/// d^order v / dQ^order through the discrete Fourier transform.
RealVector spectral_derivative(const PointerGrid& grid, const RealVector& values, int order = 1);

}  // namespace wvlab
