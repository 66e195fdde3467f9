#include "wvlab/quantum/engine.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include "wvlab/core/errors.hpp"

namespace wvlab::quantum {
namespace {

using Multiplier = std::vector<cplx>;

Multiplier phases(const PointerGrid& grid, double shift, double sign) {
    const auto& k = grid.wavenumbers();
    Multiplier out(k.size());
    for (std::size_t j = 0; j < k.size(); ++j) out[j] = std::polar(1.0, sign * shift * k[j]);
    return out;
}

Multiplier powers(const PointerGrid& grid, int n, double scale = 1.0) {
    const auto& k = grid.wavenumbers();
    Multiplier out(k.size());
    for (std::size_t j = 0; j < k.size(); ++j) out[j] = scale * std::pow(k[j], n);
    return out;
}

Multiplier product(const Multiplier& a, const Multiplier& b) {
    Multiplier out(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) out[j] = a[j] * b[j];
    return out;
}

void check_displacement(const MeasurementSetup& setup, double coupling) {
    const double reach = std::abs(coupling) * setup.observable().max_abs_eigenvalue();
    const double limit = setup.pointer().grid().length() / 4.0;
    if (!std::isfinite(reach) || reach >= limit) {
        std::ostringstream os;
        os << "coupling " << coupling << " displaces the pointer by " << reach
           << ", beyond the box limit " << limit;
        throw RangeError(os.str());
    }
}

// <d| Pi_j rho_s Pi_k |d> for every outcome d: coeffs[d](j, k).
std::vector<ComplexMatrix> projector_coefficients(const MeasurementSetup& setup) {
    const auto& comps = setup.observable().components();
    const auto n = static_cast<Eigen::Index>(comps.size());
    const ComplexMatrix& rho = setup.object_state().matrix();
    std::vector<ComplexMatrix> out(setup.outcomes(), ComplexMatrix(n, n));
    for (std::size_t d = 0; d < setup.outcomes(); ++d) {
        const ComplexVector v = setup.postselection_vector(d);
        std::vector<ComplexVector> left(comps.size()), right(comps.size());
        for (std::size_t j = 0; j < comps.size(); ++j) {
            left[j] = comps[j].projector.adjoint() * v;  // (<d|Pi_j)^dagger
            right[j] = comps[j].projector * v;
        }
        for (Eigen::Index j = 0; j < n; ++j)
            for (Eigen::Index k = 0; k < n; ++k)
                out[d](j, k) = left[j].dot(rho * right[k]);
    }
    return out;
}

// <d| c^a rho_s c^b |d> for every outcome.
cplx object_factor(const MeasurementSetup& setup, const ComplexVector& d, int a, int b) {
    const ComplexMatrix& c = setup.observable().matrix();
    ComplexVector left = d;
    ComplexVector right = d;
    for (int i = 0; i < a; ++i) left = c.adjoint() * left;
    for (int i = 0; i < b; ++i) right = c * right;
    return left.dot(setup.object_state().matrix() * right);
}

double binomial(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

double factorial(int n) {
    double r = 1.0;
    for (int i = 2; i <= n; ++i) r *= i;
    return r;
}

double first_moment(const PointerGrid& grid, const RealVector& column) {
    const auto& x = grid.positions();
    double s = 0.0;
    for (Eigen::Index m = 0; m < column.size(); ++m) s += x[static_cast<std::size_t>(m)] * column(m);
    return s * grid.spacing();
}

}  // namespace

MeasurementSetup::MeasurementSetup(HermitianObservable observable, ComplexMatrix postselection_basis,
                                   DensityMatrix object_state, PointerState pointer,
                                   double coupling, const Tolerances& tol)
    : observable_(std::move(observable)),
      basis_(std::move(postselection_basis)),
      object_state_(std::move(object_state)),
      pointer_(std::move(pointer)),
      coupling_(coupling) {
    const auto dim = static_cast<Eigen::Index>(observable_.dim());
    if (static_cast<Eigen::Index>(object_state_.dim()) != dim)
        throw ValidationError("MeasurementSetup: object state and observable dimensions differ");
    if (basis_.rows() != dim || basis_.cols() != dim)
        throw ValidationError("MeasurementSetup: post-selection basis must be a square matrix "
                              "of the object dimension");
    if (!is_orthonormal(basis_, tol.basis_orthonormal))
        throw ValidationError("MeasurementSetup: post-selection basis is not orthonormal");
    if (!std::isfinite(coupling_))
        throw ValidationError("MeasurementSetup: coupling must be finite");
}

ComplexVector MeasurementSetup::postselection_vector(std::size_t outcome) const {
    if (outcome >= outcomes())
        throw RangeError("MeasurementSetup: outcome index " + std::to_string(outcome) +
                         " out of range");
    return basis_.col(static_cast<Eigen::Index>(outcome));
}

MeasurementSetup MeasurementSetup::with_coupling(double coupling) const {
    MeasurementSetup copy = *this;
    if (!std::isfinite(coupling)) throw ValidationError("MeasurementSetup: coupling must be finite");
    copy.coupling_ = coupling;
    return copy;
}

MeasurementSetup MeasurementSetup::with_pointer(PointerState pointer) const {
    MeasurementSetup copy = *this;
    copy.pointer_ = std::move(pointer);
    return copy;
}

double postselection_probability(const DensityMatrix& object_state, const ComplexVector& d) {
    return d.dot(object_state.matrix() * d).real();
}

cplx weak_value(const DensityMatrix& object_state, const HermitianObservable& observable,
                const ComplexVector& postselection, const Tolerances& tol) {
    if (static_cast<std::size_t>(postselection.size()) != object_state.dim() ||
        observable.dim() != object_state.dim())
        throw ValidationError("weak_value: dimension mismatch");
    const double p = postselection_probability(object_state, postselection);
    if (!(p > tol.postselection_min)) {
        std::ostringstream os;
        os << "weak_value: post-selection probability " << p
           << " is below threshold; the weak value diverges";
        throw NearOrthogonalPostselection(os.str(), p);
    }
    const cplx num = postselection.dot(observable.matrix() * object_state.matrix() * postselection);
    return num / p;
}

JointDistribution product_joint(const MeasurementSetup& setup) {
    const RealVector density = setup.pointer().density();
    RealMatrix table(density.size(), static_cast<Eigen::Index>(setup.outcomes()));
    for (std::size_t d = 0; d < setup.outcomes(); ++d)
        table.col(static_cast<Eigen::Index>(d)) =
            postselection_probability(setup.object_state(), setup.postselection_vector(d)) * density;
    return {setup.pointer().grid(), std::move(table)};
}

JointDistribution evolve_exact(const MeasurementSetup& setup) {
    const double eps = setup.coupling();
    check_displacement(setup, eps);
    if (eps == 0.0) return product_joint(setup);

    const PointerGrid& grid = setup.pointer().grid();
    const auto& comps = setup.observable().components();
    const auto coeffs = projector_coefficients(setup);
    const auto npts = static_cast<Eigen::Index>(grid.size());

    ComplexMatrix acc = ComplexMatrix::Zero(npts, static_cast<Eigen::Index>(setup.outcomes()));
    for (std::size_t j = 0; j < comps.size(); ++j) {
        const Multiplier left = phases(grid, eps * comps[j].eigenvalue, -1.0);
        for (std::size_t k = j; k < comps.size(); ++k) {
            const Multiplier right = phases(grid, eps * comps[k].eigenvalue, +1.0);
            const ComplexVector diag = sandwich_diagonal(setup.pointer(), left, right);
            const double weight = (j == k) ? 1.0 : 2.0;  // (j,k) and (k,j) are conjugates
            for (std::size_t d = 0; d < setup.outcomes(); ++d)
                acc.col(static_cast<Eigen::Index>(d)) +=
                    weight * coeffs[d](static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) * diag;
        }
    }
    return {grid, acc.real()};
}

JointDistribution first_order_joint(const MeasurementSetup& setup, const Tolerances& tol) {
    const double current = normalized_current(setup.pointer());
    if (!(current < tol.zero_current)) {
        std::ostringstream os;
        os << "first_order_joint: pointer current does not vanish (normalised max " << current
           << ", tolerance " << tol.zero_current << ")";
        throw InvalidPointerState(os.str(), current);
    }

    JointDistribution joint = product_joint(setup);
    const double eps = setup.coupling();
    if (eps == 0.0) return joint;

    const PointerGrid& grid = setup.pointer().grid();
    const RealVector slope = spectral_derivative(grid, setup.pointer().density());
    for (std::size_t d = 0; d < setup.outcomes(); ++d) {
        const cplx cw = weak_value(setup.object_state(), setup.observable(),
                                   setup.postselection_vector(d), tol);
        const double p = postselection_probability(setup.object_state(), setup.postselection_vector(d));
        joint.table.col(static_cast<Eigen::Index>(d)) -= eps * cw.real() * p * slope;
    }
    return joint;
}

RealMatrix expansion_term(const MeasurementSetup& setup, int n) {
    if (n < 1) throw ValidationError("expansion_term: order must be at least 1");
    const PointerGrid& grid = setup.pointer().grid();
    const double eps = setup.coupling();
    const auto npts = static_cast<Eigen::Index>(grid.size());
    const auto outcomes = static_cast<Eigen::Index>(setup.outcomes());
    if (eps == 0.0) return RealMatrix::Zero(npts, outcomes);

    // (i eps)^n / n! sum_k (-1)^(n-k) C(n,k) <d|c^(n-k) rho_s c^k|d> <Q|P^(n-k) rho_a P^k|Q>
    const cplx prefactor = std::pow(cplx{0.0, eps}, n) / factorial(n);
    ComplexMatrix acc = ComplexMatrix::Zero(npts, outcomes);
    for (int k = 0; k <= n; ++k) {
        const double sign = ((n - k) % 2 == 0) ? 1.0 : -1.0;
        const ComplexVector ptr = sandwich_diagonal(setup.pointer(), powers(grid, n - k), powers(grid, k));
        for (Eigen::Index d = 0; d < outcomes; ++d) {
            const cplx obj = object_factor(setup, setup.postselection_vector(static_cast<std::size_t>(d)), n - k, k);
            acc.col(d) += (prefactor * sign * binomial(n, k) * obj) * ptr;
        }
    }
    return acc.real();
}

RealMatrix remainder_term(const MeasurementSetup& setup, int order) {
    if (order < 2 || order > 6)
        throw ValidationError("remainder_term: order must lie in [2, 6], got " + std::to_string(order));
    RealMatrix total = expansion_term(setup, 2);
    for (int n = 3; n <= order; ++n) total += expansion_term(setup, n);
    return total;
}

RealMatrix lagrange_remainder(const MeasurementSetup& setup, double xi) {
    check_displacement(setup, xi);
    const PointerGrid& grid = setup.pointer().grid();
    const double eps = setup.coupling();
    const auto& comps = setup.observable().components();
    const auto coeffs = projector_coefficients(setup);
    const auto npts = static_cast<Eigen::Index>(grid.size());

    // d^2/dxi^2 of e^{-i xi c_j k} e^{+i xi c_k k'} is -(c_j k - c_k k')^2 times the phases.
    const Multiplier k1 = powers(grid, 1);
    const Multiplier k2 = powers(grid, 2);
    ComplexMatrix acc = ComplexMatrix::Zero(npts, static_cast<Eigen::Index>(setup.outcomes()));
    for (std::size_t j = 0; j < comps.size(); ++j) {
        const double cj = comps[j].eigenvalue;
        const Multiplier left = phases(grid, xi * cj, -1.0);
        for (std::size_t k = j; k < comps.size(); ++k) {
            const double ck = comps[k].eigenvalue;
            const Multiplier right = phases(grid, xi * ck, +1.0);
            const ComplexVector second =
                -cj * cj * sandwich_diagonal(setup.pointer(), product(k2, left), right) +
                2.0 * cj * ck * sandwich_diagonal(setup.pointer(), product(k1, left), product(k1, right)) -
                ck * ck * sandwich_diagonal(setup.pointer(), left, product(k2, right));
            const double weight = (j == k) ? 1.0 : 2.0;
            for (std::size_t d = 0; d < setup.outcomes(); ++d)
                acc.col(static_cast<Eigen::Index>(d)) +=
                    weight * coeffs[d](static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) * second;
        }
    }
    return (0.5 * eps * eps) * acc.real();
}

RealVector conditional_pointer(const JointDistribution& joint, std::size_t outcome,
                               const Tolerances& tol) {
    if (outcome >= joint.outcomes())
        throw RangeError("conditional_pointer: outcome index out of range");
    RealVector slice = joint.table.col(static_cast<Eigen::Index>(outcome));
    const double marginal = slice.sum() * joint.grid.spacing();
    if (!(marginal > tol.conditional_min_marginal)) {
        std::ostringstream os;
        os << "conditional_pointer: outcome " << outcome << " has vanishing probability " << marginal;
        throw NearOrthogonalPostselection(os.str(), marginal);
    }
    slice /= marginal;
    for (Eigen::Index m = 0; m < slice.size(); ++m) {
        if (slice(m) < 0.0) {
            if (slice(m) < -tol.conditional_clamp) {
                std::ostringstream os;
                os << "conditional_pointer: density " << slice(m) << " at index " << m
                   << " is negative beyond tolerance";
                throw ValidationError(os.str());
            }
            slice(m) = 0.0;
        }
    }
    return slice / (slice.sum() * joint.grid.spacing());
}

RealVector object_marginal(const JointDistribution& joint) {
    return joint.table.colwise().sum().transpose() * joint.grid.spacing();
}

WeakValueReport measure_shift(const MeasurementSetup& setup, std::size_t outcome,
                              const Tolerances& tol) {
    const ComplexVector d = setup.postselection_vector(outcome);
    const PointerGrid& grid = setup.pointer().grid();
    const double eps = setup.coupling();
    const auto col = static_cast<Eigen::Index>(outcome);

    WeakValueReport r;
    r.outcome = outcome;
    r.coupling = eps;
    r.weak_value = weak_value(setup.object_state(), setup.observable(), d, tol);
    r.postselection_probability = postselection_probability(setup.object_state(), d);
    r.predicted_shift = eps * r.weak_value.real();

    const JointDistribution before = product_joint(setup);
    const JointDistribution after = evolve_exact(setup);
    const Moments m0 = position_moments(grid, setup.pointer().density());
    const Moments m1 = position_moments(grid, conditional_pointer(after, outcome, tol));
    r.measured_shift = eps == 0.0 ? 0.0 : m1.mean - m0.mean;
    r.pointer_std = m0.std;
    r.marginal_drift = std::abs(object_marginal(after)(col) - object_marginal(before)(col));

    const RealVector remainder =
        after.table.col(col) - before.table.col(col) - expansion_term(setup, 1).col(col);
    r.remainder_norm = std::abs(first_moment(grid, remainder));
    r.remainder_limit = tol.remainder_fraction * std::abs(r.predicted_shift) * r.postselection_probability;
    r.lagrange_xi0 = std::abs(first_moment(grid, lagrange_remainder(setup, 0.0).col(col)));
    r.lagrange_xi_eps = std::abs(first_moment(grid, lagrange_remainder(setup, eps).col(col)));

    r.weakness_ratio = m0.std > 0.0 ? std::abs(r.predicted_shift) / m0.std : INFINITY;
    r.current_max = normalized_current(setup.pointer());

    r.flags.zero_current = r.current_max < tol.zero_current;
    r.flags.weak_coupling = r.weakness_ratio < tol.weakness_ratio_max;
    r.flags.remainder_small = r.remainder_norm <= r.remainder_limit;
    return r;
}

double max_abs_difference(const JointDistribution& a, const JointDistribution& b) {
    if (a.table.rows() != b.table.rows() || a.table.cols() != b.table.cols())
        throw ValidationError("max_abs_difference: shapes differ");
    return (a.table - b.table).cwiseAbs().maxCoeff();
}

}  // namespace wvlab::quantum
