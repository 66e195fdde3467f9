#pragma once

#include <cstddef>
#include <span>

namespace wvlab::lab {

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;  // natural log
    double r_squared = 0.0;
    double slope_stderr = 0.0;
    double ci_low = 0.0;  // 95% interval on the slope (Student t, n - 2 dof)
    double ci_high = 0.0;
    std::size_t points = 0;
};

/// Least-squares line through (log x, log y). Needs at least four points, all
/// strictly positive; ValidationError otherwise.
SlopeFit fit_slope(std::span<const double> x, std::span<const double> y);

}  // namespace wvlab::lab
