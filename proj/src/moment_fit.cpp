#include "polling/moment_fit.hpp"

#include <cmath>
#include <string>

#include "polling/error.hpp"

namespace polling {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// First two raw moments of the phase parameters.
std::pair<double, double> raw_moments(const DistributionKind& kind, double requested_mean) {
    return std::visit(
        overloaded{
            [&](const Deterministic&) {
                return std::pair{requested_mean, requested_mean * requested_mean};
            },
            [](const Exponential& e) {
                return std::pair{1.0 / e.rate, 2.0 / (e.rate * e.rate)};
            },
            [](const HyperExp2Balanced& h) {
                const double m1 = h.p / h.mu1 + (1.0 - h.p) / h.mu2;
                const double m2 = 2.0 * h.p / (h.mu1 * h.mu1) + 2.0 * (1.0 - h.p) / (h.mu2 * h.mu2);
                return std::pair{m1, m2};
            },
            [](const MixedErlang& m) {
                const double k = m.k;
                const double mu2 = m.mu * m.mu;
                const double m1 = m.p * (k - 1.0) / m.mu + (1.0 - m.p) * k / m.mu;
                const double m2 = m.p * (k - 1.0) * k / mu2 + (1.0 - m.p) * k * (k + 1.0) / mu2;
                return std::pair{m1, m2};
            },
        },
        kind);
}

double erlang(int phases, double rate, RandomStream& rng) {
    double log_sum = 0.0;
    for (int n = 0; n < phases; ++n) log_sum += std::log(uniform_open0(rng));
    return -log_sum / rate;
}

}  // namespace

double FittedDistribution::analytic_mean() const { return raw_moments(kind_, mean_).first; }

double FittedDistribution::analytic_scv() const {
    const auto [m1, m2] = raw_moments(kind_, mean_);
    return (m2 - m1 * m1) / (m1 * m1);
}

FittedDistribution fit_two_moments(double mean, double scv) {
    if (!(mean > 0.0) || !std::isfinite(mean)) {
        throw Error(ErrorCode::InvalidMoment, "mean must be positive and finite, got " + std::to_string(mean));
    }
    if (!(scv >= 0.0) || !std::isfinite(scv)) {
        throw Error(ErrorCode::InvalidMoment, "scv must be nonnegative and finite, got " + std::to_string(scv));
    }
    if (scv == 0.0) return {Deterministic{}, mean, scv};
    if (scv == 1.0) return {Exponential{1.0 / mean}, mean, scv};
    if (scv > 1.0) {
        const double r = std::sqrt((scv - 1.0) / (scv + 1.0));
        return {HyperExp2Balanced{0.5 * (1.0 + r), (1.0 + r) / mean, (1.0 - r) / mean}, mean, scv};
    }
    // 1/scv is nudged down so that exact reciprocals (0.25 -> 4) do not round up a phase.
    const int k = static_cast<int>(std::ceil(1.0 / scv - 1e-12));
    const double kd = k;
    const double disc = std::max(0.0, kd * (1.0 + scv) - kd * kd * scv);
    const double p = (kd * scv - std::sqrt(disc)) / (1.0 + scv);
    return {MixedErlang{k, p, (kd - p) / mean}, mean, scv};
}

double density_at_zero(const FittedDistribution& dist) {
    const double mean = dist.mean();
    return std::visit(
        overloaded{
            [](const Deterministic&) { return 0.0; },
            [](const Exponential&) { return 1.0; },
            [&](const HyperExp2Balanced& h) { return mean * (h.p * h.mu1 + (1.0 - h.p) * h.mu2); },
            // Only the Erlang(1) component of a k = 2 mixture has mass at zero.
            [&](const MixedErlang& m) { return m.k == 2 ? mean * m.p * m.mu : 0.0; },
        },
        dist.kind());
}

double density_at_zero_two_moment_approx(double scv) {
    if (scv > 1.0) return 2.0 * scv / (scv + 1.0);
    const double sq = scv * scv;
    return sq * sq;
}

double density_term(const DensityMode& mode, double scv) {
    using Kind = DensityMode::Kind;
    if (!(scv >= 0.0) || !std::isfinite(scv)) {
        throw Error(ErrorCode::InvalidMoment, "interarrival scv must be nonnegative, got " + std::to_string(scv));
    }
    switch (mode.kind) {
        case Kind::TwoMomentApprox:
            return density_at_zero_two_moment_approx(scv);
        case Kind::ExactH2:
            if (scv < 1.0) {
                throw Error(ErrorCode::InconsistentDensityMode,
                            "exact_h2 density mode needs interarrival scv >= 1, got " + std::to_string(scv));
            }
            return density_at_zero(fit_two_moments(1.0, scv));
        case Kind::ExactMixedErlang:
            if (scv > 1.0) {
                throw Error(ErrorCode::InconsistentDensityMode,
                            "exact_mixed_erlang density mode needs interarrival scv <= 1, got " + std::to_string(scv));
            }
            return density_at_zero(fit_two_moments(1.0, scv));
        case Kind::ExactExponential:
            if (std::abs(scv - 1.0) > 1e-12) {
                throw Error(ErrorCode::InconsistentDensityMode,
                            "exact_exponential density mode needs interarrival scv == 1, got " + std::to_string(scv));
            }
            return 1.0;
        case Kind::UserValue:
            if (!(mode.user_value >= 0.0) || !std::isfinite(mode.user_value)) {
                throw Error(ErrorCode::InvalidMoment,
                            "user density value must be nonnegative, got " + std::to_string(mode.user_value));
            }
            return mode.user_value;
    }
    return 0.0;
}

double sample(const FittedDistribution& dist, RandomStream& rng) {
    return std::visit(
        overloaded{
            [&](const Deterministic&) { return dist.mean(); },
            [&](const Exponential& e) { return -std::log(uniform_open0(rng)) / e.rate; },
            [&](const HyperExp2Balanced& h) {
                const double rate = uniform_open0(rng) <= h.p ? h.mu1 : h.mu2;
                return -std::log(uniform_open0(rng)) / rate;
            },
            [&](const MixedErlang& m) {
                const int phases = uniform_open0(rng) <= m.p ? m.k - 1 : m.k;
                return erlang(phases, m.mu, rng);
            },
        },
        dist.kind());
}

}  // namespace polling
