#include "wvlab/core/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "wvlab/core/errors.hpp"

namespace wvlab {

PointerGrid::PointerGrid(std::size_t n_points, double length)
    : n_(n_points), length_(length), spacing_(length / static_cast<double>(n_points)) {
    if (n_points < 2) throw ValidationError("PointerGrid: n_points must be at least 2");
    if (!(length > 0.0) || !std::isfinite(length))
        throw ValidationError("PointerGrid: length must be positive and finite, got " +
                              std::to_string(length));

    std::vector<double> x(n_);
    const auto half = static_cast<std::ptrdiff_t>(n_ / 2);
    for (std::size_t m = 0; m < n_; ++m)
        x[m] = static_cast<double>(static_cast<std::ptrdiff_t>(m) - half) * spacing_;

    std::vector<double> k(n_);
    const double dk = wavenumber_spacing();
    for (std::size_t j = 0; j < n_; ++j) {
        if (n_ % 2 == 0 && j == n_ / 2) {
            k[j] = 0.0;
        } else if (j < (n_ + 1) / 2) {
            k[j] = dk * static_cast<double>(j);
        } else {
            k[j] = dk * (static_cast<double>(j) - static_cast<double>(n_));
        }
    }

    positions_ = std::make_shared<const std::vector<double>>(std::move(x));
    wavenumbers_ = std::make_shared<const std::vector<double>>(std::move(k));
}

double PointerGrid::wavenumber_spacing() const noexcept {
    return 2.0 * std::numbers::pi / length_;
}

std::size_t PointerGrid::nearest_index(double x) const {
    const double offset = std::round(x / spacing_) + static_cast<double>(n_ / 2);
    return static_cast<std::size_t>(std::clamp(offset, 0.0, static_cast<double>(n_ - 1)));
}

}  // namespace wvlab
