#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace wvlab::classical {

/// Real phase-space function c(q, p) with gradients, analytic or by central
/// differences with step h = 1e-5 * scale.
class CNumberObservable {
public:
    using Function = std::function<double(double, double)>;

    CNumberObservable(std::string name, Function value, Function grad_q, Function grad_p);
    CNumberObservable(std::string name, Function value, double fd_scale = 1.0);

    double operator()(double q, double p) const { return value_(q, p); }
    double grad_q(double q, double p) const;
    double grad_p(double q, double p) const;

    const std::string& name() const noexcept { return name_; }
    bool analytic_gradients() const noexcept { return static_cast<bool>(grad_q_); }
    double fd_step() const noexcept { return 1e-5 * fd_scale_; }

    static CNumberObservable position();      // c = q
    static CNumberObservable momentum();      // c = p
    static CNumberObservable radius_squared();  // c = q^2 + p^2
    static CNumberObservable product();       // c = q p

    /// position, momentum, radius_squared, product; ValidationError otherwise.
    static CNumberObservable named(const std::string& name);
    static std::vector<std::string> names();

private:
    std::string name_;
    Function value_;
    Function grad_q_;
    Function grad_p_;
    double fd_scale_ = 1.0;
};

/// Largest relative mismatch between analytic gradients and central differences
/// over the given points, relative to max(1, |gradient|).
double gradient_mismatch(const CNumberObservable& c, std::span<const double> q,
                         std::span<const double> p);

/// Bivariate Gaussian in (x, y): the object density F_s(q, p) or pointer F_a(Q, P).
struct GaussianPhaseDensity {
    double mean_x = 0.0;
    double mean_y = 0.0;
    double std_x = 1.0;
    double std_y = 1.0;
    double correlation = 0.0;

    void validate(const char* who) const;
};

/// Samples of (q, p, Q, P) with uniform weights 1/N.
struct PhaseEnsemble {
    std::vector<double> q, p, Q, P;
    std::uint64_t seed = 0;

    std::size_t size() const noexcept { return q.size(); }
};

/// N independent draws from F_s(q,p) F_a(Q,P). Deterministic for a given seed
/// regardless of `workers` (each fixed-size chunk has its own stream).
PhaseEnsemble sample_product(const GaussianPhaseDensity& object, const GaussianPhaseDensity& pointer,
                             std::size_t n, std::uint64_t seed, std::size_t workers = 1);

struct KickResult {
    PhaseEnsemble ensemble;
    double max_invariant_drift = 0.0;  // max |c(q',p') - c(q,p)| / max(1, |c(q,p)|)
};

/// Exact characteristics of H = eps delta(t) c(q,p) P: P is untouched,
/// Q += eps c(q0, p0), and (q, p) follow dq/ds = eps P dc/dp, dp/ds = -eps P dc/dq
/// for s in [0, 1] with `substeps` RK4 steps.
KickResult kick_evolve(const PhaseEnsemble& ensemble, const CNumberObservable& c, double eps,
                       int substeps, std::size_t workers = 1);

struct Interval {
    double lo;
    double hi;

    bool contains(double x) const noexcept { return x >= lo && x < hi; }
    double center() const noexcept { return 0.5 * (lo + hi); }
};

struct ConditionalEstimate {
    double value = 0.0;
    double standard_error = 0.0;
    std::size_t count = 0;
};

/// E[c(q, p) | q in bin] with its standard error. StatisticsError below min_count samples.
ConditionalEstimate classical_weak_value(std::span<const double> q, std::span<const double> p,
                                         const CNumberObservable& c, Interval bin,
                                         std::size_t min_count = 100);

std::vector<double> uniform_edges(double lo, double hi, std::size_t bins);

struct CurrentBin {
    Interval bin;
    std::size_t count = 0;
    double mean_momentum = 0.0;
    double standard_error = 0.0;
};

struct CurrentCheck {
    std::vector<CurrentBin> bins;  // populated bins only
    bool vanishing = true;
    double max_abs_mean = 0.0;
};

/// Conditional mean of P given Q per bin. Vanishing when every populated bin
/// mean lies within n_sigma standard errors of zero.
CurrentCheck classical_current_check(const PhaseEnsemble& ensemble, std::span<const double> Q_edges,
                                     double n_sigma = 3.0, std::size_t min_count = 100);

/// Histogram density over (Q, q).
struct ClassicalJoint {
    std::vector<double> q_edges;
    std::vector<double> Q_edges;
    Eigen::MatrixXd counts;   // rows: Q bins, cols: q bins
    Eigen::MatrixXd density;  // counts / (N dQ dq)

    double integral() const;
};

ClassicalJoint build_joint(const PhaseEnsemble& ensemble, std::span<const double> q_edges,
                           std::span<const double> Q_edges);

/// Two-sample chi-square test on q histograms before and after the kick.
struct MarginalTest {
    double chi_square = 0.0;
    double critical = 0.0;  // 99% quantile
    std::size_t dof = 0;
    bool passed = true;
    bool identical = false;  // every q coordinate unchanged
    double max_density_diff = 0.0;
};

MarginalTest q_marginal_test(std::span<const double> q_before, std::span<const double> q_after,
                             std::span<const double> edges, double confidence = 0.99);

struct ShiftBin {
    Interval bin;
    std::size_t count = 0;
    bool populated = false;
    double weak_value = 0.0;  // E[c | q] before the kick
    double weak_value_se = 0.0;
    double predicted = 0.0;   // eps * weak_value
    double measured = 0.0;    // E[Q' | q'] - E[Q | q]
    double measured_se = 0.0;
};

struct ShiftExperimentConfig {
    std::size_t samples = 1'000'000;
    std::size_t bins = 41;
    double range_std = 4.0;
    std::size_t current_bins = 11;
    int substeps = 64;
    std::uint64_t seed = 12345;
    std::size_t workers = 1;
    std::size_t min_bin_count = 100;
    double n_sigma = 3.0;
};

struct ShiftExperiment {
    double coupling = 0.0;
    std::vector<ShiftBin> bins;
    MarginalTest marginal;
    CurrentCheck current;
    double pointer_std = 0.0;
    double weakness_ratio = 0.0;  // max |eps c_w| / sigma_Q over populated bins
    double max_invariant_drift = 0.0;
    std::uint64_t seed = 0;

    /// Fraction of populated bins with |measured - predicted| <= n_sigma * combined SE.
    double agreement_fraction(double n_sigma = 3.0) const;
};

/// Samples the product state, checks the pointer current, kicks, and compares
/// the per-bin pointer shift with eps * E[c | q]. Throws InvalidPointerState
/// when the pointer current does not vanish.
ShiftExperiment classical_shift_experiment(const GaussianPhaseDensity& object,
                                           const GaussianPhaseDensity& pointer,
                                           const CNumberObservable& c, double eps,
                                           const ShiftExperimentConfig& config = {});

/// sum_i v_i w_i / sum_i w_i for a discrete joint distribution.
double discrete_conditional_expectation(std::span<const double> values, std::span<const double> weights);

}  // namespace wvlab::classical
