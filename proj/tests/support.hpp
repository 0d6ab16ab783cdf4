#pragma once

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "polling/approximator.hpp"
#include "polling/core_model.hpp"

namespace polling::oracle {

inline bool rel_close(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b)) || a == b;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

struct SpecOptions {
    int min_n = 1;
    int max_n = 6;
    bool poisson = false;
    Discipline discipline = Discipline::Exhaustive;
};

/// Random valid spec: arbitrary load shares, means and SCVs (switch-over SCV may be 0).
inline SystemSpec random_spec(std::mt19937_64& rng, const SpecOptions& opt) {
    const int n = std::uniform_int_distribution<int>(opt.min_n, opt.max_n)(rng);
    std::vector<double> share(n);
    for (auto& s : share) s = uniform(rng, 0.05, 1.0);
    const double total = std::accumulate(share.begin(), share.end(), 0.0);
    SystemSpec spec;
    spec.discipline = opt.discipline;
    spec.rho = uniform(rng, 0.05, 0.95);
    const double scv_choices[] = {0.0, 0.25, 0.5, 1.0, 2.0, 5.0};
    for (int i = 0; i < n; ++i) {
        QueueSpec q;
        q.mean_service = uniform(rng, 0.1, 3.0);
        q.scv_service = scv_choices[std::uniform_int_distribution<int>(0, 5)(rng)];
        q.mean_interarrival_at_saturation = q.mean_service / (share[i] / total);
        q.scv_interarrival = opt.poisson ? 1.0 : uniform(rng, 0.2, 4.0);
        q.mean_switchover = uniform(rng, 0.0, 2.0);
        q.scv_switchover = scv_choices[std::uniform_int_distribution<int>(0, 5)(rng)];
        spec.queues.push_back(q);
    }
    if (spec.queues.front().mean_switchover < 0.05) spec.queues.front().mean_switchover = 0.5;
    // Re-normalise so the shares sum to one within rounding.
    double sum = 0.0;
    for (const auto& q : spec.queues) sum += q.load_share();
    for (auto& q : spec.queues) q.mean_interarrival_at_saturation *= sum;
    return spec;
}

/// Symmetric Poisson system: equal shares, identical service laws, unequal
/// switch-over means with a common variance.
inline SystemSpec symmetric_spec(int n, Discipline d, double rho, double mean_b, double scv_b, double var_s) {
    SystemSpec spec;
    spec.discipline = d;
    spec.rho = rho;
    for (int i = 0; i < n; ++i) {
        QueueSpec q;
        q.mean_service = mean_b;
        q.scv_service = scv_b;
        q.mean_interarrival_at_saturation = mean_b * n;
        q.scv_interarrival = 1.0;
        q.mean_switchover = 0.4 + 0.3 * i;
        q.scv_switchover = var_s / (q.mean_switchover * q.mean_switchover);
        spec.queues.push_back(q);
    }
    return spec;
}

/// Light-traffic slope written from the residual-intervisit expansion:
/// rho_i (Ag(0) - 1) E[B_i^res] + E[B^res] + (1 - rho_i)(E[S] - E[S^res])
/// + (1/E[S]) sum_{k=i+1}^{i+N-1} rho_k sum_{j=i}^{k-1} V[S_j], plus rho_i E[S] when gated.
/// Everything is recomputed from the SystemSpec, not from DerivedMoments.
inline double lt_slope_oracle(const SystemSpec& spec, std::size_t i) {
    const std::size_t n = spec.size();
    double es = 0.0, es2 = 0.0, num = 0.0, den = 0.0;
    std::vector<double> share(n), var_s(n);
    for (std::size_t j = 0; j < n; ++j) {
        const QueueSpec& q = spec.queues[j];
        share[j] = q.mean_service / q.mean_interarrival_at_saturation;
        var_s[j] = q.scv_switchover * q.mean_switchover * q.mean_switchover;
        es += q.mean_switchover;
        const double lam = 1.0 / q.mean_interarrival_at_saturation;
        num += lam * (1.0 + q.scv_service) * q.mean_service * q.mean_service;
        den += 2.0 * lam * q.mean_service;
    }
    for (std::size_t j = 0; j < n; ++j) es2 += var_s[j];
    const double es_res = (es2 + es * es) / (2.0 * es);
    const double eb_res = num / den;
    const QueueSpec& qi = spec.queues[i];
    const double ebi_res = (1.0 + qi.scv_service) * qi.mean_service / 2.0;
    double ag0 = 0.0;
    switch (qi.density_mode.kind) {
        case DensityMode::Kind::UserValue: ag0 = qi.density_mode.user_value; break;
        default: ag0 = density_term(qi.density_mode, qi.scv_interarrival);
    }
    double tail = 0.0;
    for (std::size_t k = i + 1; k <= i + n - 1; ++k) {
        double inner = 0.0;
        for (std::size_t j = i; j <= k - 1; ++j) inner += var_s[j % n];
        tail += share[k % n] * inner;
    }
    double slope = share[i] * (ag0 - 1.0) * ebi_res + eb_res + (1.0 - share[i]) * (es - es_res) + tail / es;
    if (spec.discipline == Discipline::Gated) slope += share[i] * es;
    return slope;
}

/// Closed-form mean wait of a symmetric Poisson system.
inline double symmetric_closed_form(const SystemSpec& spec) {
    const double n = static_cast<double>(spec.size());
    const double rho = spec.rho;
    const QueueSpec& q = spec.queues.front();
    const double eb_res = (1.0 + q.scv_service) * q.mean_service / 2.0;
    double es = 0.0, vs = 0.0;
    for (const auto& s : spec.queues) {
        es += s.mean_switchover;
        vs += s.scv_switchover * s.mean_switchover * s.mean_switchover;
    }
    const double es_res = (vs + es * es) / (2.0 * es);
    const double visit = spec.discipline == Discipline::Exhaustive ? 1.0 - 1.0 / n : 1.0 + 1.0 / n;
    return rho / (1.0 - rho) * eb_res + es_res + rho * visit / (1.0 - rho) * es / 2.0;
}

}  // namespace polling::oracle
