#pragma once

#include <complex>
#include <span>

#include <Eigen/Dense>

namespace wvlab::fft {

using cplx = std::complex<double>;

enum class Direction { Forward, Backward };

// Thin wrapper over FFTW. All transforms are in place and unnormalised:
// Forward computes sum_m x_m e^{-2 pi i j m / n}, Backward uses e^{+...}.
// Plans are cached per layout; execution is safe from multiple threads.
void transform(std::span<cplx> data, Direction dir);

/// Transforms every column of `m` independently.
void transform_columns(Eigen::MatrixXcd& m, Direction dir);

/// Transforms every row of `m` independently.
void transform_rows(Eigen::MatrixXcd& m, Direction dir);

}  // namespace wvlab::fft
