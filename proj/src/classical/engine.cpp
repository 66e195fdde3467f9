#include "wvlab/classical/engine.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <boost/math/distributions/chi_squared.hpp>

#include "wvlab/core/errors.hpp"
#include "wvlab/core/parallel.hpp"

namespace wvlab::classical {
namespace {

constexpr std::size_t kChunk = 1 << 14;

std::size_t chunk_count(std::size_t n) { return (n + kChunk - 1) / kChunk; }

// Index of the bin containing x, or edges.size() - 1 when outside.
std::size_t locate(std::span<const double> edges, double x) {
    const std::size_t bins = edges.size() - 1;
    if (!(x >= edges.front()) || !(x < edges.back())) return bins;
    auto it = std::upper_bound(edges.begin(), edges.end(), x);
    return static_cast<std::size_t>(it - edges.begin()) - 1;
}

struct Accumulator {
    std::size_t n = 0;
    double sum = 0.0;
    double sum_sq = 0.0;

    void add(double x) {
        ++n;
        sum += x;
        sum_sq += x * x;
    }
    double mean() const { return sum / static_cast<double>(n); }
    double standard_error() const {
        if (n < 2) return INFINITY;
        const double m = mean();
        const double var = std::max(sum_sq / static_cast<double>(n) - m * m, 0.0) *
                           static_cast<double>(n) / static_cast<double>(n - 1);
        return std::sqrt(var / static_cast<double>(n));
    }
};

// Per-bin accumulation in a fixed sample order so results do not depend on threads.
std::vector<Accumulator> binned(std::span<const double> key, std::span<const double> value,
                                std::span<const double> edges) {
    std::vector<Accumulator> acc(edges.size() - 1);
    for (std::size_t i = 0; i < key.size(); ++i) {
        const std::size_t b = locate(edges, key[i]);
        if (b < acc.size()) acc[b].add(value[i]);
    }
    return acc;
}

void check_edges(std::span<const double> edges, const char* who) {
    if (edges.size() < 2) throw ValidationError(std::string(who) + ": need at least two bin edges");
    for (std::size_t i = 1; i < edges.size(); ++i)
        if (!(edges[i] > edges[i - 1]))
            throw ValidationError(std::string(who) + ": bin edges must be strictly increasing");
}

}  // namespace

CNumberObservable::CNumberObservable(std::string name, Function value, Function grad_q, Function grad_p)
    : name_(std::move(name)), value_(std::move(value)), grad_q_(std::move(grad_q)),
      grad_p_(std::move(grad_p)) {
    if (!value_ || !grad_q_ || !grad_p_)
        throw ValidationError("CNumberObservable '" + name_ + "': missing function");
}

CNumberObservable::CNumberObservable(std::string name, Function value, double fd_scale)
    : name_(std::move(name)), value_(std::move(value)), fd_scale_(fd_scale) {
    if (!value_) throw ValidationError("CNumberObservable '" + name_ + "': missing value function");
    if (!(fd_scale > 0.0)) throw ValidationError("CNumberObservable: finite-difference scale must be positive");
}

double CNumberObservable::grad_q(double q, double p) const {
    if (grad_q_) return grad_q_(q, p);
    const double h = fd_step();
    return (value_(q + h, p) - value_(q - h, p)) / (2.0 * h);
}

double CNumberObservable::grad_p(double q, double p) const {
    if (grad_p_) return grad_p_(q, p);
    const double h = fd_step();
    return (value_(q, p + h) - value_(q, p - h)) / (2.0 * h);
}

CNumberObservable CNumberObservable::position() {
    return {"position", [](double q, double) { return q; }, [](double, double) { return 1.0; },
            [](double, double) { return 0.0; }};
}

CNumberObservable CNumberObservable::momentum() {
    return {"momentum", [](double, double p) { return p; }, [](double, double) { return 0.0; },
            [](double, double) { return 1.0; }};
}

CNumberObservable CNumberObservable::radius_squared() {
    return {"radius_squared", [](double q, double p) { return q * q + p * p; },
            [](double q, double) { return 2.0 * q; }, [](double, double p) { return 2.0 * p; }};
}

CNumberObservable CNumberObservable::product() {
    return {"product", [](double q, double p) { return q * p; }, [](double, double p) { return p; },
            [](double q, double) { return q; }};
}

CNumberObservable CNumberObservable::named(const std::string& name) {
    if (name == "position") return position();
    if (name == "momentum") return momentum();
    if (name == "radius_squared") return radius_squared();
    if (name == "product") return product();
    throw ValidationError("unknown c-number observable '" + name + "'");
}

std::vector<std::string> CNumberObservable::names() {
    return {"position", "momentum", "radius_squared", "product"};
}

double gradient_mismatch(const CNumberObservable& c, std::span<const double> q,
                         std::span<const double> p) {
    const CNumberObservable fd(c.name() + "/fd", [&c](double a, double b) { return c(a, b); });
    double worst = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        const double gq = c.grad_q(q[i], p[i]);
        const double gp = c.grad_p(q[i], p[i]);
        worst = std::max(worst, std::abs(gq - fd.grad_q(q[i], p[i])) / std::max(1.0, std::abs(gq)));
        worst = std::max(worst, std::abs(gp - fd.grad_p(q[i], p[i])) / std::max(1.0, std::abs(gp)));
    }
    return worst;
}

void GaussianPhaseDensity::validate(const char* who) const {
    if (!(std_x > 0.0) || !(std_y > 0.0) || !std::isfinite(std_x) || !std::isfinite(std_y))
        throw ValidationError(std::string(who) + ": standard deviations must be positive");
    if (!(std::abs(correlation) < 1.0))
        throw ValidationError(std::string(who) + ": correlation must lie in (-1, 1)");
    if (!std::isfinite(mean_x) || !std::isfinite(mean_y))
        throw ValidationError(std::string(who) + ": means must be finite");
}

PhaseEnsemble sample_product(const GaussianPhaseDensity& object, const GaussianPhaseDensity& pointer,
                             std::size_t n, std::uint64_t seed, std::size_t workers) {
    object.validate("object density");
    pointer.validate("pointer density");
    PhaseEnsemble e;
    e.seed = seed;
    e.q.resize(n);
    e.p.resize(n);
    e.Q.resize(n);
    e.P.resize(n);

    auto draw = [](std::mt19937_64& rng, std::normal_distribution<double>& z,
                   const GaussianPhaseDensity& g, double& x, double& y) {
        const double z1 = z(rng);
        const double z2 = z(rng);
        x = g.mean_x + g.std_x * z1;
        y = g.mean_y + g.std_y * (g.correlation * z1 + std::sqrt(1.0 - g.correlation * g.correlation) * z2);
    };

    parallel_for(chunk_count(n), workers, [&](std::size_t chunk) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(chunk)};
        std::mt19937_64 rng(seq);
        std::normal_distribution<double> z;
        const std::size_t end = std::min(n, (chunk + 1) * kChunk);
        for (std::size_t i = chunk * kChunk; i < end; ++i) {
            draw(rng, z, object, e.q[i], e.p[i]);
            draw(rng, z, pointer, e.Q[i], e.P[i]);
        }
    });
    return e;
}

KickResult kick_evolve(const PhaseEnsemble& ensemble, const CNumberObservable& c, double eps,
                       int substeps, std::size_t workers) {
    if (!std::isfinite(eps)) throw ValidationError("kick_evolve: coupling must be finite");
    if (substeps < 1) throw ValidationError("kick_evolve: substeps must be at least 1");

    KickResult out;
    out.ensemble = ensemble;
    if (eps == 0.0) return out;

    const std::size_t n = ensemble.size();
    const double h = 1.0 / substeps;
    std::vector<double> drift(chunk_count(n), 0.0);
    std::vector<std::size_t> bad(chunk_count(n), n);
    auto& e = out.ensemble;

    parallel_for(chunk_count(n), workers, [&](std::size_t chunk) {
        const std::size_t end = std::min(n, (chunk + 1) * kChunk);
        for (std::size_t i = chunk * kChunk; i < end; ++i) {
            const double P = ensemble.P[i];
            double q = ensemble.q[i];
            double p = ensemble.p[i];
            const double c0 = c(q, p);
            const double a = eps * P;
            auto rhs = [&](double x, double y, double& dx, double& dy) {
                dx = a * c.grad_p(x, y);
                dy = -a * c.grad_q(x, y);
            };
            for (int s = 0; s < substeps; ++s) {
                double k1q, k1p, k2q, k2p, k3q, k3p, k4q, k4p;
                rhs(q, p, k1q, k1p);
                rhs(q + 0.5 * h * k1q, p + 0.5 * h * k1p, k2q, k2p);
                rhs(q + 0.5 * h * k2q, p + 0.5 * h * k2p, k3q, k3p);
                rhs(q + h * k3q, p + h * k3p, k4q, k4p);
                q += h / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
                p += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
            }
            const double Q = ensemble.Q[i] + eps * c0;
            if (!std::isfinite(q) || !std::isfinite(p) || !std::isfinite(Q)) {
                bad[chunk] = std::min(bad[chunk], i);
                continue;
            }
            e.q[i] = q;
            e.p[i] = p;
            e.Q[i] = Q;
            drift[chunk] = std::max(drift[chunk], std::abs(c(q, p) - c0) / std::max(1.0, std::abs(c0)));
        }
    });

    const std::size_t first_bad = *std::min_element(bad.begin(), bad.end());
    if (first_bad < n)
        throw IntegrationError("kick_evolve: non-finite trajectory at sample " + std::to_string(first_bad),
                               first_bad);
    out.max_invariant_drift = *std::max_element(drift.begin(), drift.end());
    return out;
}

ConditionalEstimate classical_weak_value(std::span<const double> q, std::span<const double> p,
                                         const CNumberObservable& c, Interval bin,
                                         std::size_t min_count) {
    if (q.size() != p.size()) throw ValidationError("classical_weak_value: q and p sizes differ");
    Accumulator acc;
    for (std::size_t i = 0; i < q.size(); ++i)
        if (bin.contains(q[i])) acc.add(c(q[i], p[i]));
    if (acc.n < min_count) {
        std::ostringstream os;
        os << "classical_weak_value: only " << acc.n << " samples in [" << bin.lo << ", " << bin.hi
           << "), need " << min_count;
        throw StatisticsError(os.str());
    }
    return {acc.mean(), acc.standard_error(), acc.n};
}

std::vector<double> uniform_edges(double lo, double hi, std::size_t bins) {
    if (bins == 0 || !(hi > lo)) throw ValidationError("uniform_edges: need hi > lo and at least one bin");
    std::vector<double> edges(bins + 1);
    for (std::size_t i = 0; i <= bins; ++i)
        edges[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);
    return edges;
}

CurrentCheck classical_current_check(const PhaseEnsemble& ensemble, std::span<const double> Q_edges,
                                     double n_sigma, std::size_t min_count) {
    check_edges(Q_edges, "classical_current_check");
    const auto acc = binned(ensemble.Q, ensemble.P, Q_edges);
    CurrentCheck out;
    for (std::size_t b = 0; b < acc.size(); ++b) {
        if (acc[b].n < min_count) continue;
        CurrentBin bin{{Q_edges[b], Q_edges[b + 1]}, acc[b].n, acc[b].mean(), acc[b].standard_error()};
        out.max_abs_mean = std::max(out.max_abs_mean, std::abs(bin.mean_momentum));
        if (std::abs(bin.mean_momentum) > n_sigma * bin.standard_error) out.vanishing = false;
        out.bins.push_back(bin);
    }
    if (out.bins.empty()) throw StatisticsError("classical_current_check: no populated bins");
    return out;
}

double ClassicalJoint::integral() const {
    double total = 0.0;
    for (Eigen::Index r = 0; r < density.rows(); ++r)
        for (Eigen::Index c = 0; c < density.cols(); ++c)
            total += density(r, c) * (Q_edges[r + 1] - Q_edges[r]) * (q_edges[c + 1] - q_edges[c]);
    return total;
}

ClassicalJoint build_joint(const PhaseEnsemble& ensemble, std::span<const double> q_edges,
                           std::span<const double> Q_edges) {
    check_edges(q_edges, "build_joint");
    check_edges(Q_edges, "build_joint");
    ClassicalJoint j;
    j.q_edges.assign(q_edges.begin(), q_edges.end());
    j.Q_edges.assign(Q_edges.begin(), Q_edges.end());
    const auto nQ = static_cast<Eigen::Index>(Q_edges.size() - 1);
    const auto nq = static_cast<Eigen::Index>(q_edges.size() - 1);
    j.counts = Eigen::MatrixXd::Zero(nQ, nq);
    for (std::size_t i = 0; i < ensemble.size(); ++i) {
        const auto a = static_cast<Eigen::Index>(locate(Q_edges, ensemble.Q[i]));
        const auto b = static_cast<Eigen::Index>(locate(q_edges, ensemble.q[i]));
        if (a < nQ && b < nq) j.counts(a, b) += 1.0;
    }
    j.density = j.counts;
    const double n = static_cast<double>(ensemble.size());
    for (Eigen::Index r = 0; r < nQ; ++r)
        for (Eigen::Index c = 0; c < nq; ++c)
            j.density(r, c) /= n * (Q_edges[r + 1] - Q_edges[r]) * (q_edges[c + 1] - q_edges[c]);
    return j;
}

MarginalTest q_marginal_test(std::span<const double> q_before, std::span<const double> q_after,
                             std::span<const double> edges, double confidence) {
    check_edges(edges, "q_marginal_test");
    if (q_before.size() != q_after.size())
        throw ValidationError("q_marginal_test: sample sizes differ");
    const std::size_t bins = edges.size() - 1;
    std::vector<double> before(bins, 0.0), after(bins, 0.0);
    for (std::size_t i = 0; i < q_before.size(); ++i) {
        if (auto b = locate(edges, q_before[i]); b < bins) before[b] += 1.0;
        if (auto b = locate(edges, q_after[i]); b < bins) after[b] += 1.0;
    }

    MarginalTest t;
    t.identical = std::equal(q_before.begin(), q_before.end(), q_after.begin());
    std::size_t used = 0;
    const double n = static_cast<double>(q_before.size());
    for (std::size_t b = 0; b < bins; ++b) {
        const double width = edges[b + 1] - edges[b];
        t.max_density_diff = std::max(t.max_density_diff, std::abs(after[b] - before[b]) / (n * width));
        if (before[b] + after[b] <= 0.0) continue;
        ++used;
        const double d = before[b] - after[b];
        t.chi_square += d * d / (before[b] + after[b]);
    }
    t.dof = used > 1 ? used - 1 : 1;
    boost::math::chi_squared dist(static_cast<double>(t.dof));
    t.critical = boost::math::quantile(dist, confidence);
    t.passed = t.chi_square <= t.critical;
    return t;
}

double ShiftExperiment::agreement_fraction(double n_sigma) const {
    std::size_t populated = 0;
    std::size_t agree = 0;
    for (const auto& b : bins) {
        if (!b.populated) continue;
        ++populated;
        const double se = std::hypot(b.measured_se, coupling * b.weak_value_se);
        if (std::abs(b.measured - b.predicted) <= n_sigma * se) ++agree;
    }
    return populated == 0 ? 0.0 : static_cast<double>(agree) / static_cast<double>(populated);
}

ShiftExperiment classical_shift_experiment(const GaussianPhaseDensity& object,
                                           const GaussianPhaseDensity& pointer,
                                           const CNumberObservable& c, double eps,
                                           const ShiftExperimentConfig& config) {
    if (config.samples < 10'000)
        throw ValidationError("classical_shift_experiment: need at least 10^4 samples");
    const PhaseEnsemble before = sample_product(object, pointer, config.samples, config.seed, config.workers);

    ShiftExperiment out;
    out.coupling = eps;
    out.seed = config.seed;
    out.pointer_std = pointer.std_x;

    const auto Q_edges = uniform_edges(pointer.mean_x - config.range_std * pointer.std_x,
                                       pointer.mean_x + config.range_std * pointer.std_x,
                                       config.current_bins);
    out.current = classical_current_check(before, Q_edges, config.n_sigma, config.min_bin_count);
    if (!out.current.vanishing) {
        std::ostringstream os;
        os << "classical_shift_experiment: pointer current does not vanish (max |E[P|Q]| = "
           << out.current.max_abs_mean << ")";
        throw InvalidPointerState(os.str(), out.current.max_abs_mean);
    }

    const KickResult kicked = kick_evolve(before, c, eps, config.substeps, config.workers);
    const PhaseEnsemble& after = kicked.ensemble;
    out.max_invariant_drift = kicked.max_invariant_drift;

    const auto q_edges = uniform_edges(object.mean_x - config.range_std * object.std_x,
                                       object.mean_x + config.range_std * object.std_x, config.bins);
    out.marginal = q_marginal_test(before.q, after.q, q_edges);

    std::vector<double> cvals(before.size());
    for (std::size_t i = 0; i < before.size(); ++i) cvals[i] = c(before.q[i], before.p[i]);
    const auto cw = binned(before.q, cvals, q_edges);
    const auto pre = binned(before.q, before.Q, q_edges);
    const auto post = binned(after.q, after.Q, q_edges);

    for (std::size_t b = 0; b + 1 < q_edges.size(); ++b) {
        ShiftBin bin;
        bin.bin = {q_edges[b], q_edges[b + 1]};
        bin.count = pre[b].n;
        bin.populated = pre[b].n >= config.min_bin_count && post[b].n >= config.min_bin_count;
        if (bin.populated) {
            bin.weak_value = cw[b].mean();
            bin.weak_value_se = cw[b].standard_error();
            bin.predicted = eps * bin.weak_value;
            bin.measured = post[b].mean() - pre[b].mean();
            bin.measured_se = std::hypot(post[b].standard_error(), pre[b].standard_error());
            out.weakness_ratio = std::max(out.weakness_ratio, std::abs(bin.predicted) / pointer.std_x);
        }
        out.bins.push_back(bin);
    }
    return out;
}

double discrete_conditional_expectation(std::span<const double> values, std::span<const double> weights) {
    if (values.size() != weights.size() || values.empty())
        throw ValidationError("discrete_conditional_expectation: need matching non-empty inputs");
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (weights[i] < 0.0) throw ValidationError("discrete_conditional_expectation: negative weight");
        num += values[i] * weights[i];
        den += weights[i];
    }
    if (!(den > 0.0)) throw StatisticsError("discrete_conditional_expectation: zero total weight");
    return num / den;
}

}  // namespace wvlab::classical
