#pragma once

#include <cstddef>
#include <memory>
#include <vector>

namespace wvlab {

/// Uniform periodic grid for the pointer coordinate Q (hbar = 1).
///
/// Positions are x_m = (m - n/2) * spacing for m = 0..n-1, so Q = 0 is a grid
/// point. Wavenumbers follow FFT ordering with spacing 2 pi / length; the
/// Nyquist mode of an even grid is assigned wavenumber zero, which keeps the
/// discrete momentum operator purely imaginary-antisymmetric in the position
/// basis (real kernels then carry exactly zero current).
class PointerGrid {
public:
    PointerGrid(std::size_t n_points, double length);

    std::size_t size() const noexcept { return n_; }
    double length() const noexcept { return length_; }
    double spacing() const noexcept { return spacing_; }
    double wavenumber_spacing() const noexcept;

    double position(std::size_t m) const { return (*positions_)[m]; }
    const std::vector<double>& positions() const noexcept { return *positions_; }
    const std::vector<double>& wavenumbers() const noexcept { return *wavenumbers_; }

    /// Index of the grid point closest to x (no wrap-around).
    std::size_t nearest_index(double x) const;

    bool operator==(const PointerGrid& o) const noexcept {
        return n_ == o.n_ && length_ == o.length_;
    }

private:
    std::size_t n_;
    double length_;
    double spacing_;
    std::shared_ptr<const std::vector<double>> positions_;
    std::shared_ptr<const std::vector<double>> wavenumbers_;
};

/// Default resolution used by presets and scenarios.
inline constexpr std::size_t kDefaultGridPoints = 1024;
/// Default extent in units of the pointer width.
inline constexpr double kDefaultGridWidths = 40.0;

}  // namespace wvlab
