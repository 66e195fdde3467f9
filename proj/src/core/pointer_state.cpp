#include "wvlab/core/pointer_state.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "wvlab/core/errors.hpp"
#include "wvlab/core/fft.hpp"

namespace wvlab {
namespace {

ComplexMatrix to_momentum(ComplexMatrix kernel) {
    fft::transform_columns(kernel, fft::Direction::Forward);
    fft::transform_rows(kernel, fft::Direction::Backward);
    return kernel;
}

ComplexMatrix from_momentum(ComplexMatrix spectrum) {
    const double n = static_cast<double>(spectrum.rows());
    fft::transform_columns(spectrum, fft::Direction::Backward);
    fft::transform_rows(spectrum, fft::Direction::Forward);
    spectrum /= n * n;
    return spectrum;
}

void validate_kernel(const PointerGrid& grid, const ComplexMatrix& kernel, const Tolerances& tol) {
    const auto n = static_cast<Eigen::Index>(grid.size());
    if (kernel.rows() != n || kernel.cols() != n) {
        std::ostringstream os;
        os << "PointerState: kernel is " << kernel.rows() << "x" << kernel.cols()
           << ", grid has " << n << " points";
        throw ValidationError(os.str());
    }
    if (!kernel.allFinite()) throw ValidationError("PointerState: kernel has non-finite entries");

    const double scale = std::max(kernel.cwiseAbs().maxCoeff(), 1e-300);
    const double asym = max_asymmetry(kernel);
    if (asym > tol.hermitian_rel * scale) {
        std::ostringstream os;
        os << "PointerState: kernel is not Hermitian (max asymmetry " << asym << ")";
        throw ValidationError(os.str());
    }
    const double mass = kernel.diagonal().real().sum() * grid.spacing();
    if (std::abs(mass - 1.0) > tol.pointer_trace) {
        std::ostringstream os;
        os << "PointerState: trace * spacing = " << mass << ", expected 1";
        throw ValidationError(os.str());
    }
    const double min_diag = kernel.diagonal().real().minCoeff();
    if (min_diag < tol.pointer_min_diagonal) {
        std::ostringstream os;
        os << "PointerState: negative density " << min_diag << " on the diagonal";
        throw ValidationError(os.str());
    }
}

std::vector<cplx> as_complex(const std::vector<double>& k, int power) {
    std::vector<cplx> out(k.size());
    for (std::size_t j = 0; j < k.size(); ++j) out[j] = std::pow(k[j], power);
    return out;
}

}  // namespace

PointerState::PointerState(PointerGrid grid, ComplexMatrix kernel, const Tolerances& tol) {
    validate_kernel(grid, kernel, tol);
    ComplexMatrix spectrum = to_momentum(kernel);
    data_ = std::make_shared<const Data>(Data{std::move(grid), std::move(kernel), std::move(spectrum)});
}

PointerState PointerState::pure(PointerGrid grid, const ComplexVector& wavefunction) {
    const double norm2 = wavefunction.squaredNorm() * grid.spacing();
    if (!(norm2 > 0.0) || !std::isfinite(norm2))
        throw ValidationError("PointerState::pure: wavefunction has zero or non-finite norm");
    const ComplexVector psi = wavefunction / std::sqrt(norm2);
    ComplexMatrix kernel = psi * psi.adjoint();
    return PointerState(std::move(grid), std::move(kernel));
}

PointerState PointerState::mixture(PointerGrid grid, std::span<const double> weights,
                                   std::span<const ComplexVector> wavefunctions) {
    if (weights.size() != wavefunctions.size() || weights.empty())
        throw ValidationError("PointerState::mixture: need one weight per wavefunction");
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (std::abs(total - 1.0) > 1e-12)
        throw ValidationError("PointerState::mixture: weights must sum to 1");

    const auto n = static_cast<Eigen::Index>(grid.size());
    ComplexMatrix kernel = ComplexMatrix::Zero(n, n);
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] < 0.0) throw ValidationError("PointerState::mixture: negative weight");
        const double norm2 = wavefunctions[i].squaredNorm() * grid.spacing();
        if (!(norm2 > 0.0)) throw ValidationError("PointerState::mixture: zero wavefunction");
        const ComplexVector psi = wavefunctions[i] / std::sqrt(norm2);
        kernel.noalias() += weights[i] * (psi * psi.adjoint());
    }
    return PointerState(std::move(grid), std::move(kernel));
}

RealVector PointerState::density() const {
    return data_->kernel.diagonal().real();
}

double PointerState::purity() const {
    const double dx = grid().spacing();
    return data_->kernel.cwiseAbs2().sum() * dx * dx;
}

PointerState translate(const PointerState& state, double a) {
    const PointerGrid& grid = state.grid();
    if (!std::isfinite(a) || std::abs(a) >= grid.length() / 4.0) {
        std::ostringstream os;
        os << "translate: displacement " << a << " leaves the box (limit "
           << grid.length() / 4.0 << ")";
        throw RangeError(os.str());
    }
    if (a == 0.0) return state;

    const auto& k = grid.wavenumbers();
    const auto n = static_cast<Eigen::Index>(k.size());
    ComplexVector phase(n);
    for (Eigen::Index j = 0; j < n; ++j) phase(j) = std::polar(1.0, -a * k[j]);

    ComplexMatrix spectrum = phase.asDiagonal() * state.momentum_kernel() * phase.adjoint().asDiagonal();
    ComplexMatrix kernel = from_momentum(spectrum);
    return PointerState(std::make_shared<const PointerState::Data>(
        PointerState::Data{grid, std::move(kernel), std::move(spectrum)}));
}

Moments position_moments(const PointerGrid& grid, std::span<const double> density,
                         const Tolerances& tol) {
    if (density.size() != grid.size())
        throw ValidationError("position_moments: density size does not match the grid");
    const double dx = grid.spacing();
    const auto& x = grid.positions();

    double norm = 0.0;
    double first = 0.0;
    for (std::size_t m = 0; m < density.size(); ++m) {
        if (density[m] < tol.pointer_min_diagonal) {
            std::ostringstream os;
            os << "position_moments: negative density " << density[m] << " at index " << m;
            throw ValidationError(os.str());
        }
        norm += density[m] * dx;
        first += x[m] * density[m] * dx;
    }
    if (norm <= tol.moments_min_norm)
        throw ValidationError("position_moments: degenerate distribution (norm " +
                              std::to_string(norm) + ")");

    const double mean = first / norm;
    double second = 0.0;
    for (std::size_t m = 0; m < density.size(); ++m) {
        const double d = x[m] - mean;
        second += d * d * density[m] * dx;
    }
    double variance = second / norm;
    if (variance < 0.0 && variance >= tol.moments_negative_variance) variance = 0.0;
    return {mean, std::sqrt(variance), norm};
}

Moments position_moments(const PointerGrid& grid, const RealVector& density,
                         const Tolerances& tol) {
    return position_moments(grid, std::span<const double>(density.data(), density.size()), tol);
}

ComplexVector sandwich_diagonal(const ComplexMatrix& spectrum, std::span<const cplx> f,
                                std::span<const cplx> g) {
    const auto n = spectrum.rows();
    if (static_cast<Eigen::Index>(f.size()) != n || static_cast<Eigen::Index>(g.size()) != n)
        throw ValidationError("sandwich_diagonal: multiplier length does not match the grid");

    // s(D) = sum over j - j' = D (mod n) of f_j M_{j j'} g_{j'}; the position
    // diagonal is the inverse transform of s. Complex products are spelled out
    // so the O(n^2) loop vectorises.
    std::vector<double> sre(static_cast<std::size_t>(n), 0.0), sim(static_cast<std::size_t>(n), 0.0);
    std::vector<double> fre(f.size()), fim(f.size());
    for (std::size_t j = 0; j < f.size(); ++j) {
        fre[j] = f[j].real();
        fim[j] = f[j].imag();
    }
    std::vector<double> ure(static_cast<std::size_t>(n)), uim(static_cast<std::size_t>(n));
    for (Eigen::Index jp = 0; jp < n; ++jp) {
        const double gr = g[jp].real(), gi = g[jp].imag();
        const cplx* col = spectrum.col(jp).data();
        // u_j = f_j M_{j j'} g_{j'}
        for (Eigen::Index j = 0; j < n; ++j) {
            const double mr = col[j].real() * gr - col[j].imag() * gi;
            const double mi = col[j].real() * gi + col[j].imag() * gr;
            ure[j] = fre[j] * mr - fim[j] * mi;
            uim[j] = fre[j] * mi + fim[j] * mr;
        }
        // j >= jp lands on D = j - jp, j < jp on D = j - jp + n
        double* sr = sre.data();
        double* si = sim.data();
        for (Eigen::Index j = jp; j < n; ++j) {
            sr[j - jp] += ure[j];
            si[j - jp] += uim[j];
        }
        for (Eigen::Index j = 0; j < jp; ++j) {
            sr[j - jp + n] += ure[j];
            si[j - jp + n] += uim[j];
        }
    }
    ComplexVector s(n);
    for (Eigen::Index d = 0; d < n; ++d) s(d) = {sre[d], sim[d]};
    fft::transform(std::span<cplx>(s.data(), static_cast<std::size_t>(n)), fft::Direction::Backward);
    s /= static_cast<double>(n) * static_cast<double>(n);
    return s;
}

ComplexVector sandwich_diagonal(const PointerState& state, std::span<const cplx> f,
                                std::span<const cplx> g) {
    return sandwich_diagonal(state.momentum_kernel(), f, g);
}

RealVector current_density(const PointerState& state) {
    const auto& k = state.grid().wavenumbers();
    const std::vector<cplx> kk = as_complex(k, 1);
    const std::vector<cplx> one(k.size(), cplx{1.0, 0.0});
    const ComplexVector left = sandwich_diagonal(state, kk, one);
    const ComplexVector right = sandwich_diagonal(state, one, kk);
    return (0.5 * (left + right)).real();
}

MomentumMoments momentum_moments(const PointerState& state) {
    // <P^n> = Tr(P^n rho) spacing = spacing / n * sum_j k_j^n M_jj
    const auto& k = state.grid().wavenumbers();
    const auto& spectrum = state.momentum_kernel();
    const double scale = state.grid().spacing() / static_cast<double>(k.size());
    double m1 = 0.0;
    double m2 = 0.0;
    for (std::size_t j = 0; j < k.size(); ++j) {
        const double w = spectrum(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)).real();
        m1 += k[j] * w;
        m2 += k[j] * k[j] * w;
    }
    m1 *= scale;
    m2 *= scale;
    return {m1, std::sqrt(std::max(m2 - m1 * m1, 0.0))};
}

double normalized_current(const PointerState& state) {
    const RealVector j = current_density(state);
    const double peak = state.density().maxCoeff();
    const double sigma_p = momentum_moments(state).std;
    const double denom = sigma_p * peak;
    if (!(denom > 0.0)) return j.cwiseAbs().maxCoeff() > 0.0 ? INFINITY : 0.0;
    return j.cwiseAbs().maxCoeff() / denom;
}

RealVector spectral_derivative(const PointerGrid& grid, const RealVector& values, int order) {
    if (static_cast<std::size_t>(values.size()) != grid.size())
        throw ValidationError("spectral_derivative: size does not match the grid");
    if (order < 0) throw ValidationError("spectral_derivative: negative order");

    const auto& k = grid.wavenumbers();
    std::vector<cplx> buf(values.data(), values.data() + values.size());
    fft::transform(buf, fft::Direction::Forward);
    const double n = static_cast<double>(buf.size());
    for (std::size_t j = 0; j < buf.size(); ++j) {
        cplx factor{1.0 / n, 0.0};
        for (int i = 0; i < order; ++i) factor *= cplx{0.0, k[j]};
        buf[j] *= factor;
    }
    fft::transform(buf, fft::Direction::Backward);

    RealVector out(values.size());
    for (std::size_t m = 0; m < buf.size(); ++m) out(static_cast<Eigen::Index>(m)) = buf[m].real();
    return out;
}

}  // namespace wvlab
