#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "polling/moment_fit.hpp"

namespace polling {

enum class Discipline { Exhaustive, Gated };

std::string_view to_string(Discipline d) noexcept;

/// One queue of the cycle. Interarrival moments are given at saturation
/// (total load 1); the switch-over is the one incurred when the server leaves
/// this queue for the next.
struct QueueSpec {
    double mean_service = 1.0;
    double scv_service = 1.0;
    double mean_interarrival_at_saturation = 1.0;
    double scv_interarrival = 1.0;
    double mean_switchover = 0.0;
    double scv_switchover = 0.0;
    DensityMode density_mode = DensityMode::two_moment_approx();

    double load_share() const noexcept { return mean_service / mean_interarrival_at_saturation; }

    friend bool operator==(const QueueSpec&, const QueueSpec&) = default;
};

struct SystemSpec {
    std::vector<QueueSpec> queues;
    Discipline discipline = Discipline::Exhaustive;
    double rho = 0.0;

    std::size_t size() const noexcept { return queues.size(); }

    /// Cyclic access: index N refers to queue 0.
    const QueueSpec& queue(std::size_t i) const { return queues[i % queues.size()]; }

    /// E[A_i] = E[Â_i]/rho; infinite at rho = 0.
    double effective_mean_interarrival(std::size_t i) const;

    friend bool operator==(const SystemSpec&, const SystemSpec&) = default;
};

/// Throws polling::Error describing the first violated invariant.
void validate(const SystemSpec& spec);

/// Every aggregate the closed-form formulas consume.
struct DerivedMoments {
    Discipline discipline = Discipline::Exhaustive;
    double rho = 0.0;

    std::vector<double> rho_hat;
    std::vector<double> lambda_hat;
    std::vector<double> mean_service;
    std::vector<double> var_s;           // per-queue switch-over variance
    double es_total = 0.0;               // E[S]
    double var_s_total = 0.0;            // V[S]
    double es_res = 0.0;                 // E[S^res]
    double eb_res_global = 0.0;          // E[B^res] of an arbitrary customer
    std::vector<double> eb_res_per_queue;
    double sigma_sq = 0.0;
    std::vector<double> density_term;    // E[Â_i] ĝ_i(0)

    std::size_t size() const noexcept { return rho_hat.size(); }
    double load(std::size_t i) const { return rho * rho_hat[i % rho_hat.size()]; }

    friend bool operator==(const DerivedMoments&, const DerivedMoments&) = default;
};

DerivedMoments derive_moments(const SystemSpec& spec);

/// Same system at a different total load; saturation interarrival means are untouched.
SystemSpec scale_to_load(const SystemSpec& spec, double rho);

/// Tolerance on |sum of load shares - 1| before a spec is rejected.
inline constexpr double kLoadShareTolerance = 1e-9;

}  // namespace polling
