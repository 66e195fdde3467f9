#include "wvlab/gallery/gallery.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "wvlab/core/errors.hpp"

namespace wvlab::gallery {
namespace {

void require_resolved(double sigma, const PointerGrid& grid, const char* who) {
    if (!(sigma > 4.0 * grid.spacing()) || !std::isfinite(sigma)) {
        std::ostringstream os;
        os << who << ": width " << sigma << " is not resolved by spacing " << grid.spacing()
           << " (need more than 4 points per sigma)";
        throw RangeError(os.str());
    }
}

void require_inside(double offset, const PointerGrid& grid, const char* who) {
    if (!(std::abs(offset) < grid.length() / 8.0)) {
        std::ostringstream os;
        os << who << ": offset " << offset << " too close to the box edge (limit "
           << grid.length() / 8.0 << ")";
        throw RangeError(os.str());
    }
}

ComplexVector real_gaussian(const PointerGrid& grid, double sigma, double center) {
    ComplexVector psi(static_cast<Eigen::Index>(grid.size()));
    for (std::size_t m = 0; m < grid.size(); ++m) {
        const double x = grid.position(m) - center;
        psi(static_cast<Eigen::Index>(m)) = std::exp(-x * x / (4.0 * sigma * sigma));
    }
    return psi;
}

const std::map<std::string, Parameters>& defaults_table() {
    static const std::map<std::string, Parameters> table{
        {"gaussian", {{"sigma", 1.0}, {"center", 0.0}}},
        {"thermal", {{"omega", 1.0}, {"temperature", 1.0}}},
        {"superposition", {{"separation", 6.0}, {"sigma", 1.0}}},
        {"mixture", {{"separation", 6.0}, {"sigma", 1.0}}},
        {"boosted", {{"k0", 1.0}, {"sigma", 1.0}}},
    };
    return table;
}

ComplexMatrix column_basis(std::initializer_list<ComplexVector> columns) {
    const auto dim = columns.begin()->size();
    ComplexMatrix out(dim, static_cast<Eigen::Index>(columns.size()));
    Eigen::Index c = 0;
    for (const auto& v : columns) out.col(c++) = v;
    return out;
}

ComplexMatrix pauli_z() {
    ComplexMatrix z(2, 2);
    z << 1.0, 0.0, 0.0, -1.0;
    return z;
}

}  // namespace

PointerState gaussian_pointer(double sigma, double center, const PointerGrid& grid) {
    require_resolved(sigma, grid, "gaussian_pointer");
    require_inside(center, grid, "gaussian_pointer");
    return PointerState::pure(grid, real_gaussian(grid, sigma, center));
}

double thermal_position_std(double omega, double temperature) {
    return std::sqrt(1.0 / (2.0 * omega * std::tanh(omega / (2.0 * temperature))));
}

PointerState thermal_pointer(double omega, double temperature, const PointerGrid& grid) {
    if (!(omega > 0.0) || !(temperature > 0.0))
        throw ValidationError("thermal_pointer: frequency and temperature must be positive");
    const double sigma = thermal_position_std(omega, temperature);
    require_resolved(sigma, grid, "thermal_pointer");
    if (!(sigma < grid.length() / 10.0)) {
        std::ostringstream os;
        os << "thermal_pointer: width " << sigma << " exceeds length/10 = " << grid.length() / 10.0;
        throw RangeError(os.str());
    }

    const double x = omega / temperature;
    // coth and csch written to stay finite for large omega/T
    const double e2 = std::exp(-2.0 * x);
    const double a = 0.5 * omega * (1.0 + e2) / (1.0 - e2);
    const double b = omega * 2.0 * std::exp(-x) / (1.0 - e2);

    const auto n = static_cast<Eigen::Index>(grid.size());
    const auto& q = grid.positions();
    ComplexMatrix kernel(n, n);
    double trace = 0.0;
    for (Eigen::Index c = 0; c < n; ++c) {
        for (Eigen::Index r = 0; r < n; ++r) {
            const double qr = q[static_cast<std::size_t>(r)];
            const double qc = q[static_cast<std::size_t>(c)];
            kernel(r, c) = std::exp(-a * (qr * qr + qc * qc) + b * qr * qc);
        }
        trace += kernel(c, c).real();
    }
    kernel /= trace * grid.spacing();
    return PointerState(grid, std::move(kernel));
}

PointerState superposition_pointer(double separation, double sigma, const PointerGrid& grid) {
    require_resolved(sigma, grid, "superposition_pointer");
    require_inside(separation / 2.0, grid, "superposition_pointer");
    const ComplexVector psi =
        real_gaussian(grid, sigma, separation / 2.0) + real_gaussian(grid, sigma, -separation / 2.0);
    return PointerState::pure(grid, psi);
}

PointerState mixture_pointer(double separation, double sigma, const PointerGrid& grid) {
    require_resolved(sigma, grid, "mixture_pointer");
    require_inside(separation / 2.0, grid, "mixture_pointer");
    const std::vector<double> weights{0.5, 0.5};
    const std::vector<ComplexVector> psis{real_gaussian(grid, sigma, separation / 2.0),
                                          real_gaussian(grid, sigma, -separation / 2.0)};
    return PointerState::mixture(grid, weights, psis);
}

PointerState boosted_pointer(double k0, double sigma, const PointerGrid& grid) {
    require_resolved(sigma, grid, "boosted_pointer");
    const double k_max = std::numbers::pi / grid.spacing();
    if (!(std::abs(k0) < k_max / 4.0)) {
        std::ostringstream os;
        os << "boosted_pointer: boost " << k0 << " is not resolved (limit " << k_max / 4.0 << ")";
        throw RangeError(os.str());
    }
    ComplexVector psi = real_gaussian(grid, sigma, 0.0);
    for (std::size_t m = 0; m < grid.size(); ++m)
        psi(static_cast<Eigen::Index>(m)) *= std::polar(1.0, k0 * grid.position(m));
    return PointerState::pure(grid, psi);
}

const Parameters& pointer_parameter_defaults(const std::string& name) {
    const auto& table = defaults_table();
    auto it = table.find(name);
    if (it == table.end()) throw ValidationError("unknown pointer preset '" + name + "'");
    return it->second;
}

PointerState make_pointer(const std::string& name, const Parameters& overrides,
                          const PointerGrid& grid) {
    Parameters p = pointer_parameter_defaults(name);
    for (const auto& [key, value] : overrides) {
        if (!p.contains(key))
            throw ValidationError("pointer preset '" + name + "' has no parameter '" + key + "'");
        p[key] = value;
    }
    if (name == "gaussian") return gaussian_pointer(p["sigma"], p["center"], grid);
    if (name == "thermal") return thermal_pointer(p["omega"], p["temperature"], grid);
    if (name == "superposition") return superposition_pointer(p["separation"], p["sigma"], grid);
    if (name == "mixture") return mixture_pointer(p["separation"], p["sigma"], grid);
    return boosted_pointer(p["k0"], p["sigma"], grid);
}

PointerState PointerPreset::build(const PointerGrid& grid) const {
    return make_pointer(name, parameters, grid);
}

std::vector<PointerPreset> pointer_presets() {
    return {
        {"gaussian", pointer_parameter_defaults("gaussian"), true,
         "pure real Gaussian, the textbook pointer"},
        {"thermal", pointer_parameter_defaults("thermal"), true,
         "harmonic-oscillator Gibbs state at omega/T = 1 (mixed, real kernel)"},
        {"superposition", pointer_parameter_defaults("superposition"), true,
         "coherent sum of two real Gaussians 6 sigma apart"},
        {"mixture", pointer_parameter_defaults("mixture"), true,
         "50/50 incoherent mixture of two real Gaussians 6 sigma apart"},
        {"boosted", pointer_parameter_defaults("boosted"), false,
         "Gaussian with momentum kick k0 = 1; carries probability current"},
    };
}

PointerGrid default_grid(double sigma) {
    return PointerGrid(kDefaultGridPoints, kDefaultGridWidths * sigma);
}

std::vector<ObjectPreset> object_presets() {
    const double r2 = std::sqrt(2.0);
    const double c60 = std::cos(std::numbers::pi / 3.0);
    const double s60 = std::sin(std::numbers::pi / 3.0);
    const double s3 = std::sqrt(3.0);
    const cplx i{0.0, 1.0};

    ComplexVector plus(2);
    plus << 1.0 / r2, 1.0 / r2;
    ComplexVector e0(2), e1(2);
    e0 << 1.0, 0.0;
    e1 << 0.0, 1.0;
    ComplexVector a0(2), a1(2);
    a0 << c60, -s60;
    a1 << s60, c60;
    ComplexVector y0(2), y1(2);
    y0 << 1.0 / r2, i / r2;
    y1 << 1.0 / r2, -i / r2;

    const auto sz = spectral_decompose(pauli_z());

    ComplexMatrix c3 = ComplexMatrix::Zero(3, 3);
    c3.diagonal() << 1.0, 1.0, -1.0;
    ComplexVector psi3(3);
    psi3 << 1.0, 1.0, 1.0;
    const double r5 = std::sqrt(5.0);
    ComplexVector q0(3), q1(3), q2(3);
    q0 << 1.0 / r5, 0.0, 2.0 / r5;
    q1 << 2.0 / r5, 0.0, -1.0 / r5;
    q2 << 0.0, 1.0, 0.0;

    std::vector<ObjectPreset> out;
    out.push_back({"projective", "spin-1/2 in |+>, measure sigma_z, post-select in the z basis",
                   DensityMatrix::pure(plus), sz, column_basis({e0, e1}), {1.0, -1.0},
                   "post-selection on eigenvectors of c returns their eigenvalues"});
    out.push_back({"anomalous",
                   "spin-1/2 in |+>, measure sigma_z, post-select on cos(pi/3)|0> - sin(pi/3)|1>",
                   DensityMatrix::pure(plus), sz, column_basis({a0, a1}), {-(2.0 + s3), 2.0 - s3},
                   "(cos60 + sin60)/(cos60 - sin60) = -(2+sqrt3) and (sin60 - cos60)/(sin60 + cos60) = 2-sqrt3"});
    out.push_back({"imaginary", "spin-1/2 in |+>, measure sigma_z, post-select in the y basis",
                   DensityMatrix::pure(plus), sz, column_basis({y0, y1}), {i, -i},
                   "((1+i)/2)/((1-i)/2) = i and its conjugate"});
    out.push_back({"mixed", "maximally mixed spin-1/2, measure sigma_z, post-select at angle pi/3",
                   DensityMatrix::maximally_mixed(2), sz, column_basis({a0, a1}),
                   {c60 * c60 - s60 * s60, s60 * s60 - c60 * c60},
                   "rho = I/2 cancels, leaving <d|c|d> = +-cos(2 pi/3)"});
    out.push_back({"qutrit_degenerate",
                   "qutrit in (|0>+|1>+|2>)/sqrt3, c = diag(1,1,-1), post-selection mixing the "
                   "degenerate block with |2>",
                   DensityMatrix::pure(psi3), spectral_decompose(c3), column_basis({q0, q1, q2}),
                   {-1.0 / 3.0, 3.0, 1.0},
                   "(1-2)/3, (2+1)/(2-1), and |1> is an eigenvector with eigenvalue 1"});
    return out;
}

ObjectPreset object_preset(const std::string& name) {
    for (auto& p : object_presets())
        if (p.name == name) return p;
    throw ValidationError("unknown object preset '" + name + "'");
}

}  // namespace wvlab::gallery
