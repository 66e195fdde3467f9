#include <doctest.h>

#include <cmath>
#include <random>

#include "wvlab/classical/engine.hpp"
#include "wvlab/core/errors.hpp"
#include "wvlab/quantum/engine.hpp"

using namespace wvlab;
using namespace wvlab::classical;

namespace {

PhaseEnsemble small_ensemble(std::size_t n = 20'000, std::uint64_t seed = 1) {
    return sample_product({}, {}, n, seed);
}

}  // namespace

TEST_CASE("observables: analytic gradients match central differences") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n01;
    std::vector<double> q(200), p(200);
    for (std::size_t i = 0; i < q.size(); ++i) {
        q[i] = 2 * n01(rng);
        p[i] = 2 * n01(rng);
    }
    for (const auto& name : CNumberObservable::names()) {
        const auto c = CNumberObservable::named(name);
        CHECK(c.analytic_gradients());
        CHECK(gradient_mismatch(c, q, p) < 1e-4);
    }
    CHECK_THROWS_AS(CNumberObservable::named("energy"), ValidationError);

    const CNumberObservable fd("cubic", [](double a, double b) { return a * a * a + a * b; });
    CHECK_FALSE(fd.analytic_gradients());
    CHECK(fd.grad_q(1.5, 2.0) == doctest::Approx(3 * 1.5 * 1.5 + 2.0).epsilon(1e-8));
    CHECK(fd.grad_p(1.5, 2.0) == doctest::Approx(1.5).epsilon(1e-8));
}

TEST_CASE("kick_evolve: linear observables are exact") {
    const auto e = small_ensemble();
    const double eps = 0.3;

    const auto kq = kick_evolve(e, CNumberObservable::position(), eps, 1).ensemble;
    for (std::size_t i = 0; i < e.size(); ++i) {
        CHECK(kq.q[i] == e.q[i]);
        CHECK(kq.p[i] == doctest::Approx(e.p[i] - eps * e.P[i]).epsilon(1e-14));
        CHECK(kq.Q[i] == e.Q[i] + eps * e.q[i]);
        CHECK(kq.P[i] == e.P[i]);
    }

    const auto kp = kick_evolve(e, CNumberObservable::momentum(), eps, 1).ensemble;
    for (std::size_t i = 0; i < e.size(); ++i) {
        CHECK(kp.q[i] == doctest::Approx(e.q[i] + eps * e.P[i]).epsilon(1e-14));
        CHECK(kp.p[i] == e.p[i]);
        CHECK(kp.Q[i] == e.Q[i] + eps * e.p[i]);
        CHECK(kp.P[i] == e.P[i]);
    }
}

TEST_CASE("kick_evolve: eps = 0 and invalid arguments") {
    const auto e = small_ensemble(1000);
    const auto k = kick_evolve(e, CNumberObservable::radius_squared(), 0.0, 8).ensemble;
    CHECK(k.q == e.q);
    CHECK(k.p == e.p);
    CHECK(k.Q == e.Q);
    CHECK(k.P == e.P);
    CHECK_THROWS_AS(kick_evolve(e, CNumberObservable::position(), 0.1, 0), ValidationError);
    CHECK_THROWS_AS(kick_evolve(e, CNumberObservable::position(), INFINITY, 4), ValidationError);

    const CNumberObservable blowup("blowup", [](double a, double) { return std::exp(a * a * 1e3); },
                                   [](double a, double) { return 2e3 * a * std::exp(a * a * 1e3); },
                                   [](double, double) { return 0.0; });
    CHECK_THROWS_AS(kick_evolve(e, blowup, 1.0, 4), IntegrationError);
}

TEST_CASE("kick_evolve: the linear map has unit Jacobian") {
    // For c = q the map is (q, p, Q, P) -> (q, p - eps P, Q + eps q, P); for c = p
    // it is (q + eps P, p, Q + eps p, P). Both Jacobians are unit triangular up to a
    // permutation, so differencing neighbouring samples recovers determinant 1.
    const double eps = 0.7;
    PhaseEnsemble e;
    e.q = {0.0, 1e-3, 0.0, 0.0, 0.0};
    e.p = {0.0, 0.0, 1e-3, 0.0, 0.0};
    e.Q = {0.0, 0.0, 0.0, 1e-3, 0.0};
    e.P = {0.0, 0.0, 0.0, 0.0, 1e-3};
    for (const auto& c : {CNumberObservable::position(), CNumberObservable::momentum()}) {
        const auto k = kick_evolve(e, c, eps, 1).ensemble;
        Eigen::Matrix4d J;
        for (int j = 0; j < 4; ++j) {
            J(0, j) = (k.q[j + 1] - k.q[0]) / 1e-3;
            J(1, j) = (k.p[j + 1] - k.p[0]) / 1e-3;
            J(2, j) = (k.Q[j + 1] - k.Q[0]) / 1e-3;
            J(3, j) = (k.P[j + 1] - k.P[0]) / 1e-3;
        }
        CHECK(J.determinant() == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("kick_evolve: nonlinear observables are conserved along the flow") {
    const auto e = small_ensemble();
    for (const auto& c : {CNumberObservable::radius_squared(), CNumberObservable::product()}) {
        CAPTURE(c.name());
        const auto r = kick_evolve(e, c, 0.05, 64);
        CHECK(r.max_invariant_drift < 1e-8);
        CHECK(r.ensemble.P == e.P);
        for (std::size_t i = 0; i < e.size(); ++i)
            CHECK(r.ensemble.Q[i] == e.Q[i] + 0.05 * c(e.q[i], e.p[i]));
    }
}

TEST_CASE("kick_evolve: radius squared is a rotation by angle 2 eps P") {
    const auto e = small_ensemble(2000);
    const double eps = 0.1;
    const auto k = kick_evolve(e, CNumberObservable::radius_squared(), eps, 64).ensemble;
    for (std::size_t i = 0; i < e.size(); ++i) {
        const double th = 2 * eps * e.P[i];
        CHECK(k.q[i] == doctest::Approx(e.q[i] * std::cos(th) + e.p[i] * std::sin(th)).epsilon(1e-8));
        CHECK(k.p[i] == doctest::Approx(-e.q[i] * std::sin(th) + e.p[i] * std::cos(th)).epsilon(1e-8));
    }
}

TEST_CASE("sampling is deterministic and independent of the worker count") {
    GaussianPhaseDensity obj{0.0, 0.0, 1.0, 1.0, 0.8};
    const auto a = sample_product(obj, {}, 100'000, 99, 1);
    const auto b = sample_product(obj, {}, 100'000, 99, 4);
    CHECK(a.q == b.q);
    CHECK(a.P == b.P);
    const auto c = sample_product(obj, {}, 100'000, 100, 1);
    CHECK(a.q != c.q);
    CHECK_THROWS_AS(sample_product({0, 0, 1, 1, 1.0}, {}, 10, 1), ValidationError);
}

TEST_CASE("classical_weak_value: conditional expectation oracles") {
    const auto e = sample_product({0.0, 0.0, 1.0, 1.0, 0.8}, {}, 1'000'000, 2024, 4);
    const Interval bin{0.9, 1.1};
    const auto wq = classical_weak_value(e.q, e.p, CNumberObservable::position(), bin);
    CHECK(std::abs(wq.value - bin.center()) < 0.1);

    int hits = 0, total = 0;
    for (double lo = -2.0; lo < 2.0; lo += 0.5) {
        const Interval b{lo, lo + 0.1};
        const auto w = classical_weak_value(e.q, e.p, CNumberObservable::momentum(), b);
        // E[p | q in bin] = 0.8 E[q | q in bin]
        const auto mq = classical_weak_value(e.q, e.p, CNumberObservable::position(), b);
        ++total;
        if (std::abs(w.value - 0.8 * mq.value) <= 3 * w.standard_error) ++hits;
    }
    CHECK(hits >= total - 1);

    const auto ind = sample_product({}, {}, 1'000'000, 7, 4);
    const Interval b2{1.45, 1.55};
    const auto w2 = classical_weak_value(ind.q, ind.p, CNumberObservable::radius_squared(), b2);
    double q2 = 0;
    std::size_t n = 0;
    for (double x : ind.q)
        if (b2.contains(x)) {
            q2 += x * x;
            ++n;
        }
    CHECK(std::abs(w2.value - (q2 / double(n) + 1.0)) <= 3 * w2.standard_error);

    CHECK_THROWS_AS(classical_weak_value(ind.q, ind.p, CNumberObservable::position(), {9.0, 9.1}),
                    StatisticsError);
}

TEST_CASE("classical_current_check: conditional versus marginal vanishing") {
    const auto edges = uniform_edges(-4.0, 4.0, 11);
    CHECK(classical_current_check(sample_product({}, {}, 200'000, 5), edges).vanishing);

    const auto moving = classical_current_check(sample_product({}, {0.0, 0.5, 1.0, 1.0, 0.0}, 200'000, 5), edges);
    CHECK_FALSE(moving.vanishing);
    for (const auto& b : moving.bins) CHECK(b.mean_momentum == doctest::Approx(0.5).epsilon(0.2));

    const auto correlated =
        classical_current_check(sample_product({}, {0.0, 0.0, 1.0, 1.0, 0.6}, 200'000, 5), edges);
    CHECK_FALSE(correlated.vanishing);
    for (const auto& b : correlated.bins)
        if (std::abs(b.bin.center()) > 1.0)
            CHECK(std::abs(b.mean_momentum - 0.6 * b.bin.center()) < 0.6 * 0.4 + 4 * b.standard_error);
}

TEST_CASE("build_joint integrates to one") {
    const auto e = sample_product({}, {}, 200'000, 11);
    const auto edges = uniform_edges(-6.0, 6.0, 30);
    const auto j = build_joint(e, edges, edges);
    CHECK(std::abs(j.integral() - 1.0) < 1.0 / std::sqrt(200'000.0) + 1e-3);
    CHECK(j.counts.sum() <= 200'000);
}

TEST_CASE("q_marginal_test: exact equality for p-independent observables") {
    const auto e = sample_product({}, {}, 200'000, 17);
    const auto edges = uniform_edges(-4.0, 4.0, 41);
    const auto kq = kick_evolve(e, CNumberObservable::position(), 1e-2, 1).ensemble;
    const auto t = q_marginal_test(e.q, kq.q, edges);
    CHECK(t.identical);
    CHECK(t.chi_square == 0.0);
    CHECK(t.passed);

    const auto kp = kick_evolve(e, CNumberObservable::momentum(), 1e-2, 1).ensemble;
    const auto tp = q_marginal_test(e.q, kp.q, edges);
    CHECK_FALSE(tp.identical);
    CHECK(tp.passed);
    CHECK(tp.critical == doctest::Approx(63.69).epsilon(1e-3));  // chi2 quantile, 40 dof, 99%

    const auto big = kick_evolve(e, CNumberObservable::momentum(), 1.0, 1).ensemble;
    CHECK_FALSE(q_marginal_test(e.q, big.q, edges).passed);
}

TEST_CASE("shift experiments: c = q and correlated c = p") {
    ShiftExperimentConfig cfg;
    cfg.samples = 400'000;
    cfg.workers = 4;

    const auto sq = classical_shift_experiment({}, {}, CNumberObservable::position(), 1e-2, cfg);
    CHECK(sq.marginal.identical);
    CHECK(sq.agreement_fraction() >= 0.9);
    for (const auto& b : sq.bins)
        if (b.populated) CHECK(std::abs(b.predicted - 1e-2 * b.bin.center()) < 1e-2 * 0.1);

    const auto sp = classical_shift_experiment({0, 0, 1, 1, 0.8}, {}, CNumberObservable::momentum(), 1e-2, cfg);
    CHECK(sp.marginal.passed);
    int hits = 0, populated = 0;
    for (const auto& b : sp.bins) {
        if (!b.populated) continue;
        ++populated;
        if (std::abs(b.measured - 1e-2 * 0.8 * b.bin.center()) <= 3 * b.measured_se + 1e-2 * 0.8 * 0.1) ++hits;
    }
    CHECK(hits >= 0.9 * populated);

    const auto zero = classical_shift_experiment({}, {}, CNumberObservable::position(), 0.0, cfg);
    for (const auto& b : zero.bins) CHECK(b.measured == 0.0);

    CHECK_THROWS_AS(classical_shift_experiment({}, {0, 0.5, 1, 1, 0}, CNumberObservable::position(), 1e-2, cfg),
                    InvalidPointerState);
}

TEST_CASE("shift law: measured shift over eps is flat in eps for c = q") {
    ShiftExperimentConfig cfg;
    cfg.samples = 200'000;
    cfg.workers = 4;
    for (double eps : {1e-3, 1e-2, 1e-1}) {
        const auto r = classical_shift_experiment({}, {}, CNumberObservable::position(), eps, cfg);
        CHECK(r.agreement_fraction() >= 0.9);
    }
}

TEST_CASE("discrete conditional expectation equals the diagonal weak value") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const int dim = 2 + trial % 5;
        RealVector values(dim), weights(dim);
        ComplexMatrix c = ComplexMatrix::Zero(dim, dim), rho = ComplexMatrix::Zero(dim, dim);
        double total = 0;
        for (int i = 0; i < dim; ++i) {
            values(i) = 4 * u(rng) - 2;
            weights(i) = u(rng);
            total += weights(i);
        }
        weights /= total;
        c.diagonal() = values.cast<cplx>();
        rho.diagonal() = weights.cast<cplx>();
        ComplexVector d = ComplexVector::Zero(dim);
        for (int i = 0; i < dim; ++i) d(i) = std::polar(u(rng), 6.28 * u(rng));
        d.normalize();
        // <d|c rho|d> / <d|rho|d> = sum c_i w_i |d_i|^2 / sum w_i |d_i|^2
        std::vector<double> v(dim), w(dim);
        for (int i = 0; i < dim; ++i) {
            v[i] = values(i);
            w[i] = weights(i) * std::norm(d(i));
        }
        const cplx q = quantum::weak_value(DensityMatrix(rho), spectral_decompose(c), d);
        CHECK(std::abs(q - discrete_conditional_expectation(v, w)) < 1e-12);
    }
    CHECK_THROWS_AS(discrete_conditional_expectation(std::vector<double>{1.0}, std::vector<double>{0.0}),
                    StatisticsError);
}
