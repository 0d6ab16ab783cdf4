#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "polling/core_model.hpp"

namespace polling {

/// Run-length controls. Warm-up and measurement are counted in server
/// cycles (returns to queue 1), so heavier loads get longer runs in time.
struct SimConfig {
    std::uint64_t warmup_cycles = 10'000;
    std::uint64_t measured_cycles = 100'000;
    int replications = 10;
    std::uint64_t base_seed = 20100101;
    int batch_count = 20;
    /// Hard cap on arrivals + services + switch-overs over all replications.
    std::uint64_t max_events = 4'000'000'000ULL;
};

void validate(const SimConfig& cfg);

/// Point estimate with a 95% confidence half-width.
struct Interval {
    double value = 0.0;
    double half_width = 0.0;

    friend bool operator==(const Interval&, const Interval&) = default;
};

struct SimEstimate {
    std::vector<double> mean_wait_hat;
    std::vector<double> ci_half_width;
    std::vector<double> mean_queue_length_hat;
    std::vector<std::uint64_t> customers;
    /// Number of batch means behind each CI (replications x batches).
    std::uint64_t samples = 0;
    Interval realized_load;
    Interval mean_cycle;
    /// sum_i rho_i W_i with rho_i the nominal loads; comparable to pcl_rhs.
    Interval weighted_wait;
    std::uint64_t events = 0;
    int replications = 0;
    int batch_count = 0;

    friend bool operator==(const SimEstimate&, const SimEstimate&) = default;
};

enum class SimEventKind { Arrival, VisitStart, ServiceStart, ServiceEnd, VisitEnd, SwitchEnd };

/// One structured log record. Arrival records are emitted when the server
/// first observes the customer, so they may trail the server clock.
struct SimEvent {
    double time = 0.0;
    SimEventKind kind = SimEventKind::Arrival;
    std::size_t queue = 0;
    /// Arrival epoch of the customer for ServiceStart; queue content for VisitEnd.
    double detail = 0.0;
};

using EventSink = std::function<void(const SimEvent&)>;

const char* to_string(SimEventKind kind) noexcept;

/// Raw per-batch sums from one replication.
struct ReplicationResult {
    std::size_t queues = 0;
    int batches = 0;
    std::vector<double> wait_sum;     // [batch * queues + q]
    std::vector<double> sojourn_sum;  // [batch * queues + q]
    std::vector<std::uint64_t> count; // [batch * queues + q]
    std::vector<double> busy;         // [batch]
    std::vector<double> duration;     // [batch]
    std::uint64_t cycles_per_batch = 0;
    std::uint64_t events = 0;
};

/// Expected number of events for the full run, used for the budget check.
double expected_events(const SystemSpec& spec, const SimConfig& cfg);

/// One independent replication; seeds derive from (cfg.base_seed, index).
ReplicationResult simulate_replication(const SystemSpec& spec, const SimConfig& cfg, int index,
                                       const EventSink& sink = {});

/// Batch-means pooling across replications, in replication order.
SimEstimate pool_replications(const SystemSpec& spec, const std::vector<ReplicationResult>& reps);

/// Replications run in parallel (OpenMP); pooling is ordered by index.
SimEstimate simulate(const SystemSpec& spec, const SimConfig& cfg);
/// Serial reference; bitwise identical to simulate().
SimEstimate simulate_serial(const SystemSpec& spec, const SimConfig& cfg);

/// Two-sided 95% Student-t quantile with the given degrees of freedom.
double t_quantile_975(std::uint64_t dof);

}  // namespace polling
