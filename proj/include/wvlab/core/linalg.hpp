#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "wvlab/core/tolerances.hpp"

namespace wvlab {

using cplx = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

/// max |m - m^dagger| over entries.
double max_asymmetry(const ComplexMatrix& m);

/// One distinct eigenvalue and the orthogonal projector onto its eigenspace.
struct SpectralComponent {
    double eigenvalue;
    ComplexMatrix projector;
};

/// Hermitian operator on the object space together with its spectral data.
class HermitianObservable {
public:
    std::size_t dim() const noexcept { return static_cast<std::size_t>(matrix_.rows()); }
    const ComplexMatrix& matrix() const noexcept { return matrix_; }

    /// All eigenvalues with multiplicity, ascending.
    const RealVector& eigenvalues() const noexcept { return eigenvalues_; }
    /// Eigenvectors as columns, matching eigenvalues().
    const ComplexMatrix& eigenvectors() const noexcept { return eigenvectors_; }
    /// Distinct eigenvalues (ascending) with their projectors.
    const std::vector<SpectralComponent>& components() const noexcept { return components_; }

    double max_abs_eigenvalue() const;

    /// Sum_j c_j Pi_j.
    ComplexMatrix reconstruct() const;

private:
    friend HermitianObservable spectral_decompose(const ComplexMatrix&, const Tolerances&);

    ComplexMatrix matrix_;
    RealVector eigenvalues_;
    ComplexMatrix eigenvectors_;
    std::vector<SpectralComponent> components_;
};

/// Eigendecomposition with eigenvalues closer than degeneracy_rel * (spectral
/// range) merged into one projector. Throws ValidationError for non-Hermitian input.
HermitianObservable spectral_decompose(const ComplexMatrix& matrix, const Tolerances& tol = {});

/// Object-space density operator: Hermitian, unit trace, positive semidefinite.
class DensityMatrix {
public:
    explicit DensityMatrix(ComplexMatrix matrix, const Tolerances& tol = {});

    /// |psi><psi| / <psi|psi>.
    static DensityMatrix pure(const ComplexVector& psi);
    static DensityMatrix maximally_mixed(std::size_t dim);

    std::size_t dim() const noexcept { return static_cast<std::size_t>(matrix_.rows()); }
    const ComplexMatrix& matrix() const noexcept { return matrix_; }
    double purity() const;

private:
    ComplexMatrix matrix_;
};

/// Checks that the columns of `basis` are orthonormal within tolerance.
bool is_orthonormal(const ComplexMatrix& basis, double tolerance);

}  // namespace wvlab
