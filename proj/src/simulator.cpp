#include "polling/simulator.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>

#include "polling/error.hpp"
#include "polling/moment_fit.hpp"
#include "polling/parallel.hpp"

namespace polling {

const char* to_string(SimEventKind kind) noexcept {
    switch (kind) {
        case SimEventKind::Arrival: return "arrival";
        case SimEventKind::VisitStart: return "visit_start";
        case SimEventKind::ServiceStart: return "service_start";
        case SimEventKind::ServiceEnd: return "service_end";
        case SimEventKind::VisitEnd: return "visit_end";
        case SimEventKind::SwitchEnd: return "switch_end";
    }
    return "unknown";
}

void validate(const SimConfig& cfg) {
    if (cfg.replications < 1) throw Error(ErrorCode::InvalidConfig, "replications must be >= 1");
    if (cfg.batch_count < 1) throw Error(ErrorCode::InvalidConfig, "batch_count must be >= 1");
    if (cfg.warmup_cycles < 1) throw Error(ErrorCode::InvalidConfig, "warmup_cycles must be >= 1");
    if (cfg.measured_cycles < 100ULL * static_cast<std::uint64_t>(cfg.batch_count)) {
        throw Error(ErrorCode::InvalidConfig, "measured_cycles must be at least 100 x batch_count");
    }
    if (cfg.replications * cfg.batch_count < 2) {
        throw Error(ErrorCode::InvalidConfig, "need at least two batch means for a confidence interval");
    }
}

double t_quantile_975(std::uint64_t dof) {
    if (dof == 0) return std::numeric_limits<double>::infinity();
    const boost::math::students_t dist(static_cast<double>(dof));
    return boost::math::quantile(dist, 0.975);
}

double expected_events(const SystemSpec& spec, const SimConfig& cfg) {
    double rate = 0.0;
    double switch_total = 0.0;
    for (const auto& q : spec.queues) {
        rate += spec.rho / q.mean_interarrival_at_saturation;
        switch_total += q.mean_switchover;
    }
    const double cycle = switch_total / (1.0 - spec.rho);
    const double per_cycle = static_cast<double>(spec.size()) + 2.0 * rate * cycle;
    return per_cycle * static_cast<double>(cfg.warmup_cycles + cfg.measured_cycles) * cfg.replications;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

RandomStream make_stream(std::uint64_t base_seed, int replication, std::size_t stream) {
    const std::uint64_t rep_key = splitmix64(base_seed ^ splitmix64(static_cast<std::uint64_t>(replication) + 1));
    return RandomStream(splitmix64(rep_key + 0x632be59bd9b4e019ULL * (stream + 1)));
}

struct QueueState {
    FittedDistribution interarrival;
    FittedDistribution service;
    FittedDistribution switchover;
    RandomStream arrival_rng;
    RandomStream service_rng;
    RandomStream switch_rng;
    double next_arrival = 0.0;
    std::deque<double> waiting;
};

class Replication {
public:
    Replication(const SystemSpec& spec, const SimConfig& cfg, int index, const EventSink& sink)
        : spec_(spec), cfg_(cfg), sink_(sink) {
        const std::size_t n = spec.size();
        queues_.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            const QueueSpec& q = spec.queues[i];
            QueueState s{
                fit_two_moments(spec.effective_mean_interarrival(i), q.scv_interarrival),
                fit_two_moments(q.mean_service, q.scv_service),
                q.mean_switchover > 0.0 ? fit_two_moments(q.mean_switchover, q.scv_switchover)
                                        : FittedDistribution(Deterministic{}, 0.0, 0.0),
                make_stream(cfg.base_seed, index, 3 * i),
                make_stream(cfg.base_seed, index, 3 * i + 1),
                make_stream(cfg.base_seed, index, 3 * i + 2),
                0.0,
                {},
            };
            s.next_arrival = sample(s.interarrival, s.arrival_rng);
            queues_.push_back(std::move(s));
        }
        out_.queues = n;
        out_.batches = cfg.batch_count;
        out_.cycles_per_batch = cfg.measured_cycles / static_cast<std::uint64_t>(cfg.batch_count);
        out_.wait_sum.assign(n * cfg.batch_count, 0.0);
        out_.sojourn_sum.assign(n * cfg.batch_count, 0.0);
        out_.count.assign(n * cfg.batch_count, 0);
        out_.busy.assign(cfg.batch_count, 0.0);
        out_.duration.assign(cfg.batch_count, 0.0);
        event_cap_ = cfg.max_events / static_cast<std::uint64_t>(cfg.replications);
    }

    ReplicationResult run() {
        const std::uint64_t measured = out_.cycles_per_batch * static_cast<std::uint64_t>(cfg_.batch_count);
        for (std::uint64_t cycle = 0; cycle < cfg_.warmup_cycles + measured; ++cycle) {
            batch_ = -1;
            if (cycle >= cfg_.warmup_cycles) {
                batch_ = static_cast<int>((cycle - cfg_.warmup_cycles) / out_.cycles_per_batch);
            }
            const double cycle_start = now_;
            for (std::size_t i = 0; i < queues_.size(); ++i) {
                visit(i);
                switch_over(i);
            }
            if (batch_ >= 0) out_.duration[batch_] += now_ - cycle_start;
        }
        out_.events = events_;
        return std::move(out_);
    }

private:
    void emit(SimEventKind kind, std::size_t queue, double time, double detail = 0.0) {
        if (sink_) sink_(SimEvent{time, kind, queue, detail});
    }

    void count_event() {
        if (++events_ > event_cap_) {
            std::ostringstream os;
            os << "simulation exceeded its event budget of " << cfg_.max_events << " events";
            throw Error(ErrorCode::NumericalBudget, os.str());
        }
    }

    // Moves arrivals up to `until` into the queue; strict excludes arrivals at exactly `until`.
    void admit(std::size_t i, double until, bool strict) {
        QueueState& q = queues_[i];
        while (strict ? q.next_arrival < until : q.next_arrival <= until) {
            q.waiting.push_back(q.next_arrival);
            emit(SimEventKind::Arrival, i, q.next_arrival);
            count_event();
            q.next_arrival += sample(q.interarrival, q.arrival_rng);
        }
    }

    void serve_one(std::size_t i) {
        QueueState& q = queues_[i];
        const double arrival = q.waiting.front();
        q.waiting.pop_front();
        const double wait = now_ - arrival;
        const double service = sample(q.service, q.service_rng);
        emit(SimEventKind::ServiceStart, i, now_, arrival);
        if (batch_ >= 0) {
            const std::size_t slot = static_cast<std::size_t>(batch_) * queues_.size() + i;
            out_.wait_sum[slot] += wait;
            out_.sojourn_sum[slot] += wait + service;
            out_.count[slot] += 1;
            out_.busy[batch_] += service;
        }
        now_ += service;
        count_event();
        emit(SimEventKind::ServiceEnd, i, now_);
    }

    void visit(std::size_t i) {
        QueueState& q = queues_[i];
        emit(SimEventKind::VisitStart, i, now_);
        if (spec_.discipline == Discipline::Exhaustive) {
            admit(i, now_, false);
            while (!q.waiting.empty()) {
                serve_one(i);
                admit(i, now_, false);
            }
        } else {
            admit(i, now_, true);
            for (std::size_t gated = q.waiting.size(); gated > 0; --gated) serve_one(i);
            if (sink_) admit(i, now_, false);
        }
        emit(SimEventKind::VisitEnd, i, now_, static_cast<double>(q.waiting.size()));
    }

    void switch_over(std::size_t i) {
        QueueState& q = queues_[i];
        now_ += sample(q.switchover, q.switch_rng);
        count_event();
        emit(SimEventKind::SwitchEnd, i, now_);
    }

    const SystemSpec& spec_;
    const SimConfig& cfg_;
    const EventSink& sink_;
    std::vector<QueueState> queues_;
    ReplicationResult out_;
    double now_ = 0.0;
    int batch_ = -1;
    std::uint64_t events_ = 0;
    std::uint64_t event_cap_ = 0;
};

void precheck(const SystemSpec& spec, const SimConfig& cfg) {
    validate(spec);
    validate(cfg);
    if (spec.rho <= 0.0) {
        throw Error(ErrorCode::ZeroLoad, "cannot simulate at rho = 0: no customers arrive; use rho > 0");
    }
    const double expected = expected_events(spec, cfg);
    if (expected > static_cast<double>(cfg.max_events)) {
        std::ostringstream os;
        os << "run would need about " << expected << " events, above the budget of " << cfg.max_events
           << "; reduce cycles/replications or raise the budget";
        throw Error(ErrorCode::NumericalBudget, os.str());
    }
}

// Mean and CI half-width of a set of batch means.
Interval batch_interval(const std::vector<double>& xs) {
    Interval out;
    if (xs.empty()) return out;
    double sum = 0.0;
    for (double x : xs) sum += x;
    const double mean = sum / static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    out.value = mean;
    if (xs.size() > 1) {
        const double sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
        out.half_width = t_quantile_975(xs.size() - 1) * sd / std::sqrt(static_cast<double>(xs.size()));
    }
    return out;
}

}  // namespace

ReplicationResult simulate_replication(const SystemSpec& spec, const SimConfig& cfg, int index, const EventSink& sink) {
    precheck(spec, cfg);
    return Replication(spec, cfg, index, sink).run();
}

SimEstimate pool_replications(const SystemSpec& spec, const std::vector<ReplicationResult>& reps) {
    const std::size_t n = spec.size();
    SimEstimate est;
    est.mean_wait_hat.assign(n, 0.0);
    est.ci_half_width.assign(n, 0.0);
    est.mean_queue_length_hat.assign(n, 0.0);
    est.customers.assign(n, 0);
    est.replications = static_cast<int>(reps.size());
    est.batch_count = reps.empty() ? 0 : reps.front().batches;

    std::vector<double> load_means;
    std::vector<double> cycle_means;
    std::vector<double> weighted_means;
    std::vector<std::vector<double>> wait_means(n);
    std::vector<double> wait_total(n, 0.0);
    std::vector<double> sojourn_total(n, 0.0);
    double time_total = 0.0;

    for (const auto& rep : reps) {
        est.events += rep.events;
        for (int b = 0; b < rep.batches; ++b) {
            const double duration = rep.duration[b];
            time_total += duration;
            load_means.push_back(rep.busy[b] / duration);
            cycle_means.push_back(duration / static_cast<double>(rep.cycles_per_batch));
            double weighted = 0.0;
            bool complete = true;
            for (std::size_t q = 0; q < n; ++q) {
                const std::size_t slot = static_cast<std::size_t>(b) * n + q;
                wait_total[q] += rep.wait_sum[slot];
                sojourn_total[q] += rep.sojourn_sum[slot];
                est.customers[q] += rep.count[slot];
                if (rep.count[slot] == 0) {
                    complete = false;
                    continue;
                }
                const double w = rep.wait_sum[slot] / static_cast<double>(rep.count[slot]);
                wait_means[q].push_back(w);
                weighted += spec.rho * spec.queues[q].load_share() * w;
            }
            if (complete) weighted_means.push_back(weighted);
        }
    }

    est.samples = load_means.size();
    for (std::size_t q = 0; q < n; ++q) {
        const auto ci = batch_interval(wait_means[q]);
        est.mean_wait_hat[q] = est.customers[q] > 0 ? wait_total[q] / static_cast<double>(est.customers[q]) : 0.0;
        est.ci_half_width[q] = ci.half_width;
        est.mean_queue_length_hat[q] = time_total > 0.0 ? sojourn_total[q] / time_total : 0.0;
    }
    est.realized_load = batch_interval(load_means);
    est.mean_cycle = batch_interval(cycle_means);
    // Pooled ratio for the point estimate; a mean of per-batch ratios is biased low.
    est.weighted_wait = batch_interval(weighted_means);
    est.weighted_wait.value = 0.0;
    for (std::size_t q = 0; q < n; ++q) {
        est.weighted_wait.value += spec.rho * spec.queues[q].load_share() * est.mean_wait_hat[q];
    }
    return est;
}

SimEstimate simulate(const SystemSpec& spec, const SimConfig& cfg) {
    precheck(spec, cfg);
    std::vector<ReplicationResult> reps(static_cast<std::size_t>(cfg.replications));
    parallel_for(reps.size(), [&](std::size_t r) {
        reps[r] = Replication(spec, cfg, static_cast<int>(r), EventSink{}).run();
    });
    return pool_replications(spec, reps);
}

SimEstimate simulate_serial(const SystemSpec& spec, const SimConfig& cfg) {
    precheck(spec, cfg);
    std::vector<ReplicationResult> reps;
    reps.reserve(static_cast<std::size_t>(cfg.replications));
    for (int r = 0; r < cfg.replications; ++r) reps.push_back(Replication(spec, cfg, r, EventSink{}).run());
    return pool_replications(spec, reps);
}

}  // namespace polling
