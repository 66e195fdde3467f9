#include "wvlab/core/linalg.hpp"

#include <cmath>
#include <sstream>

#include "wvlab/core/errors.hpp"

namespace wvlab {

double max_asymmetry(const ComplexMatrix& m) {
    if (m.size() == 0) return 0.0;
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

double HermitianObservable::max_abs_eigenvalue() const {
    return eigenvalues_.size() == 0 ? 0.0 : eigenvalues_.cwiseAbs().maxCoeff();
}

ComplexMatrix HermitianObservable::reconstruct() const {
    ComplexMatrix out = ComplexMatrix::Zero(matrix_.rows(), matrix_.cols());
    for (const auto& c : components_) out += c.eigenvalue * c.projector;
    return out;
}

HermitianObservable spectral_decompose(const ComplexMatrix& matrix, const Tolerances& tol) {
    if (matrix.rows() != matrix.cols() || matrix.rows() == 0)
        throw ValidationError("spectral_decompose: matrix must be square and non-empty");

    const double scale = std::max(matrix.cwiseAbs().maxCoeff(), 1e-300);
    const double asym = max_asymmetry(matrix);
    if (asym > tol.hermitian_rel * scale) {
        std::ostringstream os;
        os << "spectral_decompose: matrix is not Hermitian (max asymmetry " << asym << ")";
        throw ValidationError(os.str());
    }

    HermitianObservable out;
    out.matrix_ = 0.5 * (matrix + matrix.adjoint());
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(out.matrix_);
    if (solver.info() != Eigen::Success)
        throw ValidationError("spectral_decompose: eigensolver did not converge");
    out.eigenvalues_ = solver.eigenvalues();
    out.eigenvectors_ = solver.eigenvectors();

    const auto n = out.eigenvalues_.size();
    const double range = out.eigenvalues_(n - 1) - out.eigenvalues_(0);
    const double gap = tol.degeneracy_rel * range;

    Eigen::Index start = 0;
    for (Eigen::Index i = 1; i <= n; ++i) {
        if (i < n && out.eigenvalues_(i) - out.eigenvalues_(i - 1) <= gap) continue;
        const auto block = out.eigenvectors_.middleCols(start, i - start);
        out.components_.push_back(
            {out.eigenvalues_.segment(start, i - start).mean(), block * block.adjoint()});
        start = i;
    }
    return out;
}

DensityMatrix::DensityMatrix(ComplexMatrix matrix, const Tolerances& tol)
    : matrix_(std::move(matrix)) {
    if (matrix_.rows() != matrix_.cols() || matrix_.rows() == 0)
        throw ValidationError("DensityMatrix: matrix must be square and non-empty");

    const double asym = max_asymmetry(matrix_);
    if (asym > tol.hermitian_rel * std::max(1.0, matrix_.cwiseAbs().maxCoeff())) {
        std::ostringstream os;
        os << "DensityMatrix: not Hermitian (max asymmetry " << asym << ")";
        throw ValidationError(os.str());
    }
    const cplx trace = matrix_.trace();
    if (std::abs(trace - 1.0) > tol.density_trace) {
        std::ostringstream os;
        os << "DensityMatrix: trace " << trace << " differs from 1";
        throw ValidationError(os.str());
    }
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(matrix_, Eigen::EigenvaluesOnly);
    const double min_eig = solver.eigenvalues().minCoeff();
    if (min_eig < tol.density_min_eigenvalue) {
        std::ostringstream os;
        os << "DensityMatrix: negative eigenvalue " << min_eig;
        throw ValidationError(os.str());
    }
}

DensityMatrix DensityMatrix::pure(const ComplexVector& psi) {
    const double norm2 = psi.squaredNorm();
    if (!(norm2 > 0.0)) throw ValidationError("DensityMatrix::pure: zero state vector");
    return DensityMatrix(psi * psi.adjoint() / norm2);
}

DensityMatrix DensityMatrix::maximally_mixed(std::size_t dim) {
    const auto d = static_cast<Eigen::Index>(dim);
    return DensityMatrix(ComplexMatrix::Identity(d, d) / static_cast<double>(dim));
}

double DensityMatrix::purity() const {
    return (matrix_ * matrix_).trace().real();
}

bool is_orthonormal(const ComplexMatrix& basis, double tolerance) {
    const auto k = basis.cols();
    const ComplexMatrix gram = basis.adjoint() * basis;
    return (gram - ComplexMatrix::Identity(k, k)).cwiseAbs().maxCoeff() <= tolerance;
}

}  // namespace wvlab
