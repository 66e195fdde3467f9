#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "wvlab/core/errors.hpp"
#include "wvlab/core/linalg.hpp"
#include "wvlab/core/pointer_state.hpp"

using namespace wvlab;

namespace {

ComplexMatrix random_hermitian(std::mt19937_64& rng, int dim) {
    std::normal_distribution<double> n01;
    ComplexMatrix a(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) a(i, j) = {n01(rng), n01(rng)};
    return 0.5 * (a + a.adjoint());
}

ComplexVector gaussian(const PointerGrid& grid, double sigma, double center, double k0 = 0.0) {
    ComplexVector psi(static_cast<Eigen::Index>(grid.size()));
    for (std::size_t m = 0; m < grid.size(); ++m) {
        const double x = grid.position(m) - center;
        psi(static_cast<Eigen::Index>(m)) =
            std::exp(-x * x / (4 * sigma * sigma)) * std::polar(1.0, k0 * grid.position(m));
    }
    return psi;
}

}  // namespace

TEST_CASE("grid layout") {
    PointerGrid grid(1024, 40.0);
    CHECK(grid.spacing() * 1024 == doctest::Approx(40.0).epsilon(1e-15));
    CHECK(grid.position(512) == 0.0);
    for (std::size_t m = 1; m < grid.size(); ++m)
        CHECK(grid.position(m) - grid.position(m - 1) == doctest::Approx(grid.spacing()));
    CHECK(grid.wavenumbers()[1] == doctest::Approx(2 * std::numbers::pi / 40.0));
    CHECK(grid.wavenumbers()[512] == 0.0);  // Nyquist
    CHECK(grid.wavenumbers()[1023] == doctest::Approx(-2 * std::numbers::pi / 40.0));
    CHECK_THROWS_AS(PointerGrid(1, 1.0), ValidationError);
    CHECK_THROWS_AS(PointerGrid(16, -1.0), ValidationError);
}

TEST_CASE("spectral_decompose: identity and Pauli z") {
    auto id = spectral_decompose(ComplexMatrix::Identity(2, 2));
    REQUIRE(id.components().size() == 1);
    CHECK(id.components()[0].eigenvalue == doctest::Approx(1.0));
    CHECK((id.components()[0].projector - ComplexMatrix::Identity(2, 2)).norm() < 1e-14);

    ComplexMatrix z(2, 2);
    z << 1, 0, 0, -1;
    auto sz = spectral_decompose(z);
    REQUIRE(sz.components().size() == 2);
    CHECK(sz.components()[0].eigenvalue == doctest::Approx(-1.0));
    CHECK(sz.components()[1].eigenvalue == doctest::Approx(1.0));
    CHECK(std::abs(sz.components()[0].projector(1, 1) - 1.0) < 1e-14);
    CHECK(std::abs(sz.components()[1].projector(0, 0) - 1.0) < 1e-14);
}

TEST_CASE("spectral_decompose: reconstruction and projector algebra over random Hermitian matrices") {
    std::mt19937_64 rng(20240607);
    for (int trial = 0; trial < 200; ++trial) {
        const int dim = 2 + trial % 7;
        const ComplexMatrix h = random_hermitian(rng, dim);
        const auto obs = spectral_decompose(h);
        CHECK((obs.reconstruct() - h).cwiseAbs().maxCoeff() < 1e-10);

        ComplexMatrix sum = ComplexMatrix::Zero(dim, dim);
        for (std::size_t a = 0; a < obs.components().size(); ++a) {
            const auto& pa = obs.components()[a].projector;
            sum += pa;
            CHECK((pa * pa - pa).cwiseAbs().maxCoeff() < 1e-10);
            for (std::size_t b = a + 1; b < obs.components().size(); ++b)
                CHECK((pa * obs.components()[b].projector).cwiseAbs().maxCoeff() < 1e-10);
        }
        CHECK((sum - ComplexMatrix::Identity(dim, dim)).cwiseAbs().maxCoeff() < 1e-10);
        for (int i = 1; i < dim; ++i) CHECK(obs.eigenvalues()(i) >= obs.eigenvalues()(i - 1));
    }
}

TEST_CASE("spectral_decompose merges degenerate eigenvalues") {
    ComplexMatrix c = ComplexMatrix::Zero(3, 3);
    c.diagonal() << 1.0, 1.0 + 1e-13, -1.0;
    const auto obs = spectral_decompose(c);
    REQUIRE(obs.components().size() == 2);
    CHECK(obs.components()[1].projector.trace().real() == doctest::Approx(2.0));
}

TEST_CASE("spectral_decompose rejects non-Hermitian input") {
    ComplexMatrix m(2, 2);
    m << 0, 1, 0.5, 0;
    try {
        spectral_decompose(m);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("0.5") != std::string::npos);
    }
}

TEST_CASE("DensityMatrix validation") {
    CHECK(DensityMatrix::maximally_mixed(2).purity() == doctest::Approx(0.5));
    ComplexMatrix bad = ComplexMatrix::Identity(2, 2);
    CHECK_THROWS_AS(DensityMatrix{bad}, ValidationError);  // trace 2
    ComplexMatrix neg(2, 2);
    neg << 1.5, 0, 0, -0.5;
    CHECK_THROWS_AS(DensityMatrix{neg}, ValidationError);
}

TEST_CASE("PointerState validation") {
    PointerGrid grid(64, 16.0);
    const auto psi = gaussian(grid, 1.0, 0.0);
    const auto state = PointerState::pure(grid, psi);
    CHECK(state.density().sum() * grid.spacing() == doctest::Approx(1.0).epsilon(1e-12));

    ComplexMatrix doubled = 2.0 * state.kernel();
    CHECK_THROWS_AS(PointerState(grid, doubled), ValidationError);
    ComplexMatrix skew = state.kernel();
    skew(0, 1) += cplx(0.0, 1e-3);
    CHECK_THROWS_AS(PointerState(grid, skew), ValidationError);
    CHECK_THROWS_AS(PointerState(PointerGrid(32, 16.0), state.kernel()), ValidationError);
}

TEST_CASE("translate") {
    PointerGrid grid(1024, 40.0);
    const auto state = PointerState::pure(grid, gaussian(grid, 1.0, 0.0));

    SUBCASE("zero displacement is the identity") {
        const auto same = translate(state, 0.0);
        CHECK((same.kernel() - state.kernel()).cwiseAbs().maxCoeff() <= 1e-14);
    }
    SUBCASE("peak moves to the nearest grid point") {
        const auto moved = translate(state, 0.5);
        Eigen::Index peak = 0;
        moved.density().maxCoeff(&peak);
        CHECK(static_cast<std::size_t>(peak) == grid.nearest_index(0.5));
        CHECK(moved.density().sum() * grid.spacing() == doctest::Approx(1.0).epsilon(1e-10));
        const auto m = position_moments(grid, moved.density());
        CHECK(m.mean == doctest::Approx(0.5).epsilon(1e-10));
    }
    SUBCASE("a then -a restores the kernel") {
        const auto back = translate(translate(state, 1.37), -1.37);
        CHECK((back.kernel() - state.kernel()).cwiseAbs().maxCoeff() < 1e-10);
    }
    SUBCASE("guard against wrap-around") {
        CHECK_THROWS_AS(translate(state, 10.0), RangeError);
        CHECK_THROWS_AS(translate(state, -10.5), RangeError);
        CHECK_NOTHROW(translate(state, 9.9));
    }
}

TEST_CASE("translate is unitary: trace and spectrum preserved") {
    PointerGrid grid(128, 24.0);
    std::vector<ComplexVector> psis{gaussian(grid, 1.0, -1.0), gaussian(grid, 0.7, 2.0, 0.8)};
    std::vector<double> w{0.3, 0.7};
    const auto state = PointerState::mixture(grid, w, psis);
    const auto moved = translate(state, 2.3);

    const double dx = grid.spacing();
    CHECK(std::abs(moved.kernel().trace() * dx - state.kernel().trace() * dx) < 1e-10);
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> a(state.kernel() * dx), b(moved.kernel() * dx);
    CHECK((a.eigenvalues() - b.eigenvalues()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("position_moments") {
    PointerGrid grid(1024, 40.0);
    const auto& x = grid.positions();
    RealVector g(1024), delta = RealVector::Zero(1024), two(1024);
    for (std::size_t m = 0; m < x.size(); ++m) {
        g(m) = std::exp(-x[m] * x[m] / 2) / std::sqrt(2 * std::numbers::pi);
        const double a = x[m] - 3, b = x[m] + 3, s = 0.5;
        two(m) = 0.5 * (std::exp(-a * a / (2 * s * s)) + std::exp(-b * b / (2 * s * s))) /
                 (s * std::sqrt(2 * std::numbers::pi));
    }
    const auto mg = position_moments(grid, g);
    CHECK(std::abs(mg.mean) < 1e-8);
    CHECK(mg.std == doctest::Approx(1.0).epsilon(1e-4));

    delta(grid.nearest_index(2.0)) = 1.0 / grid.spacing();
    const auto md = position_moments(grid, delta);
    CHECK(md.mean == doctest::Approx(grid.position(grid.nearest_index(2.0))));
    CHECK(md.std == 0.0);

    // Equal mixture at +-3 with sigma 0.5: variance 0.25 + 9.
    const auto mt = position_moments(grid, two);
    CHECK(std::abs(mt.mean) < 1e-8);
    CHECK(std::abs(mt.std - std::sqrt(9.25)) < 1e-3);

    CHECK_THROWS_AS(position_moments(grid, RealVector::Zero(1024)), ValidationError);
}

TEST_CASE("current density") {
    PointerGrid grid(1024, 40.0);

    SUBCASE("real Gaussian carries no current") {
        const auto state = PointerState::pure(grid, gaussian(grid, 1.0, 0.0));
        CHECK(current_density(state).cwiseAbs().maxCoeff() < 1e-10);
        CHECK(normalized_current(state) < 1e-10);
    }
    SUBCASE("boosted Gaussian: j = k0 |g|^2") {
        const double k0 = 1.0;
        const auto state = PointerState::pure(grid, gaussian(grid, 1.0, 0.0, k0));
        const auto j = current_density(state);
        const auto c = grid.nearest_index(0.0);
        CHECK(std::abs(j(c) - k0 * state.density()(c)) / (k0 * state.density()(c)) < 1e-6);
        // integrates to the mean momentum
        CHECK(std::abs(j.sum() * grid.spacing() - momentum_moments(state).mean) < 1e-8);
        CHECK(momentum_moments(state).mean == doctest::Approx(k0).epsilon(1e-8));
        CHECK(momentum_moments(state).std == doctest::Approx(0.5).epsilon(1e-8));
    }
    SUBCASE("symmetrised product is real") {
        const auto state = PointerState::pure(grid, gaussian(grid, 1.3, 0.4, 0.6));
        std::vector<cplx> k(grid.size()), one(grid.size(), 1.0);
        for (std::size_t j = 0; j < k.size(); ++j) k[j] = grid.wavenumbers()[j];
        const ComplexVector sym =
            0.5 * (sandwich_diagonal(state, k, one) + sandwich_diagonal(state, one, k));
        CHECK(sym.imag().cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("random real symmetric PSD kernels carry zero current") {
    PointerGrid grid(64, 16.0);
    std::mt19937_64 rng(7);
    std::normal_distribution<double> n01;
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::MatrixXd a(64, 6);
        for (int i = 0; i < a.size(); ++i) a.data()[i] = n01(rng);
        Eigen::MatrixXd k = a * a.transpose();
        k /= k.trace() * grid.spacing();
        const PointerState state(grid, k.cast<cplx>());
        const RealVector j = current_density(state);
        CHECK(j.cwiseAbs().maxCoeff() < 1e-10 * momentum_moments(state).std * state.density().maxCoeff());
    }
}

TEST_CASE("spectral derivative matches the analytic derivative") {
    PointerGrid grid(256, 20.0);
    RealVector f(256), df(256);
    for (std::size_t m = 0; m < 256; ++m) {
        const double x = grid.position(m);
        f(m) = std::exp(-x * x);
        df(m) = -2 * x * std::exp(-x * x);
    }
    CHECK((spectral_derivative(grid, f) - df).cwiseAbs().maxCoeff() < 1e-12);
}
