#pragma once

#include <cstdint>
#include <random>
#include <variant>

namespace polling {

/// Random stream owned by one simulation replication (or one test).
using RandomStream = std::mt19937_64;

struct Deterministic {};

struct Exponential {
    double rate;
};

/// Two-phase hyperexponential with balanced means: p/mu1 == (1-p)/mu2.
struct HyperExp2Balanced {
    double p;
    double mu1;
    double mu2;
};

/// With probability p an Erlang(k-1, mu), otherwise an Erlang(k, mu).
struct MixedErlang {
    int k;
    double p;
    double mu;
};

using DistributionKind = std::variant<Deterministic, Exponential, HyperExp2Balanced, MixedErlang>;

/// A sampleable law matched to a requested mean and squared coefficient of variation.
class FittedDistribution {
public:
    FittedDistribution(DistributionKind kind, double mean, double scv)
        : kind_(kind), mean_(mean), scv_(scv) {}

    const DistributionKind& kind() const noexcept { return kind_; }
    double mean() const noexcept { return mean_; }
    double scv() const noexcept { return scv_; }

    /// Mean and SCV recomputed from the phase parameters, not the requested values.
    double analytic_mean() const;
    double analytic_scv() const;

private:
    DistributionKind kind_;
    double mean_;
    double scv_;
};

/// Selects how E[A]g(0) of an interarrival law is obtained.
///
/// TwoMomentApprox uses the piecewise 2c/(c+1) / c^4 rule. The Exact* modes
/// evaluate the density of the fitted phase-type law at zero and reject an
/// SCV the named family cannot represent. UserValue passes a caller-supplied
/// number through unchanged.
struct DensityMode {
    enum class Kind { TwoMomentApprox, ExactH2, ExactMixedErlang, ExactExponential, UserValue };

    Kind kind = Kind::TwoMomentApprox;
    double user_value = 0.0;

    static DensityMode two_moment_approx() { return {Kind::TwoMomentApprox, 0.0}; }
    static DensityMode exact_h2() { return {Kind::ExactH2, 0.0}; }
    static DensityMode exact_mixed_erlang() { return {Kind::ExactMixedErlang, 0.0}; }
    static DensityMode exact_exponential() { return {Kind::ExactExponential, 0.0}; }
    static DensityMode user(double value) { return {Kind::UserValue, value}; }

    friend bool operator==(const DensityMode&, const DensityMode&) = default;
};

FittedDistribution fit_two_moments(double mean, double scv);

/// E[A]g(0) of the fitted law. Scale free.
double density_at_zero(const FittedDistribution& dist);

/// Whitt's two-moment rule: 2c/(c+1) above one, c^4 at or below one.
double density_at_zero_two_moment_approx(double scv);

/// E[A]g(0) for an interarrival SCV under the given mode.
double density_term(const DensityMode& mode, double scv);

double sample(const FittedDistribution& dist, RandomStream& rng);

/// Uniform on (0, 1], never zero so log() is safe.
inline double uniform_open0(RandomStream& rng) {
    return static_cast<double>((rng() >> 11) + 1) * 0x1.0p-53;
}

}  // namespace polling
