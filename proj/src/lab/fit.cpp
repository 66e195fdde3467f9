#include "wvlab/lab/fit.hpp"

#include <cmath>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>

#include "wvlab/core/errors.hpp"

namespace wvlab::lab {

SlopeFit fit_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw ValidationError("fit_slope: x and y sizes differ");
    if (x.size() < 4) throw ValidationError("fit_slope: need at least 4 points");
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0) || !std::isfinite(x[i]) || !std::isfinite(y[i])) {
            std::ostringstream os;
            os << "fit_slope: point " << i << " (" << x[i] << ", " << y[i]
               << ") is not strictly positive";
            throw ValidationError(os.str());
        }
    }

    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        const double dy = std::log(y[i]) - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (!(sxx > 0.0)) throw ValidationError("fit_slope: x values are all equal");

    SlopeFit f;
    f.points = x.size();
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    const double ss_res = std::max(syy - f.slope * sxy, 0.0);
    f.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    f.slope_stderr = std::sqrt(ss_res / (n - 2.0) / sxx);
    const boost::math::students_t t(n - 2.0);
    const double half = boost::math::quantile(boost::math::complement(t, 0.025)) * f.slope_stderr;
    f.ci_low = f.slope - half;
    f.ci_high = f.slope + half;
    return f;
}

}  // namespace wvlab::lab
