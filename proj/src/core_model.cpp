#include "polling/core_model.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "polling/error.hpp"

namespace polling {

std::string_view to_string(Discipline d) noexcept {
    return d == Discipline::Exhaustive ? "exhaustive" : "gated";
}

double SystemSpec::effective_mean_interarrival(std::size_t i) const {
    if (rho <= 0.0) return std::numeric_limits<double>::infinity();
    return queue(i).mean_interarrival_at_saturation / rho;
}

namespace {

void check_rho(double rho) {
    if (!(rho >= 0.0 && rho < 1.0)) {
        std::ostringstream os;
        os << "load rho = " << rho << " is outside [0, 1); stability requires rho < 1";
        throw Error(ErrorCode::LoadOutOfRange, os.str());
    }
}

void fail_queue(ErrorCode code, std::size_t i, const std::string& what) {
    std::ostringstream os;
    os << "queue " << i + 1 << ": " << what;
    throw Error(code, os.str());
}

}  // namespace

void validate(const SystemSpec& spec) {
    if (spec.queues.empty()) throw Error(ErrorCode::EmptySystem, "a polling system needs at least one queue");
    check_rho(spec.rho);

    double share_sum = 0.0;
    double switch_sum = 0.0;
    for (std::size_t i = 0; i < spec.size(); ++i) {
        const QueueSpec& q = spec.queues[i];
        if (!(q.mean_service > 0.0) || !std::isfinite(q.mean_service)) {
            fail_queue(ErrorCode::InvalidMoment, i, "mean_service must be positive");
        }
        if (!std::isfinite(q.mean_interarrival_at_saturation)) {
            fail_queue(ErrorCode::ZeroArrivalRate, i, "queue receives no customers (infinite interarrival mean)");
        }
        if (!(q.mean_interarrival_at_saturation > 0.0)) {
            fail_queue(ErrorCode::InvalidMoment, i, "mean_interarrival_at_saturation must be positive");
        }
        if (!(q.mean_switchover >= 0.0) || !std::isfinite(q.mean_switchover)) {
            fail_queue(ErrorCode::InvalidMoment, i, "mean_switchover must be nonnegative");
        }
        for (double scv : {q.scv_service, q.scv_interarrival, q.scv_switchover}) {
            if (!(scv >= 0.0) || !std::isfinite(scv)) fail_queue(ErrorCode::InvalidMoment, i, "SCVs must be nonnegative");
        }
        share_sum += q.load_share();
        switch_sum += q.mean_switchover;
    }
    if (!(switch_sum > 0.0)) {
        throw Error(ErrorCode::ZeroTotalSwitchover, "total mean switch-over time must be positive");
    }
    if (std::abs(share_sum - 1.0) > kLoadShareTolerance) {
        std::ostringstream os;
        os.precision(17);
        os << "load shares E[B_i]/E[A_i] at saturation sum to " << share_sum << ", expected 1";
        throw Error(ErrorCode::UnnormalizedLoads, os.str());
    }
}

DerivedMoments derive_moments(const SystemSpec& spec) {
    validate(spec);
    const std::size_t n = spec.size();

    DerivedMoments dm;
    dm.discipline = spec.discipline;
    dm.rho = spec.rho;
    dm.rho_hat.resize(n);
    dm.lambda_hat.resize(n);
    dm.mean_service.resize(n);
    dm.var_s.resize(n);
    dm.eb_res_per_queue.resize(n);
    dm.density_term.resize(n);

    double rate_b1 = 0.0;
    double rate_b2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const QueueSpec& q = spec.queues[i];
        const double eb = q.mean_service;
        const double eb2 = (1.0 + q.scv_service) * eb * eb;
        const double lam = 1.0 / q.mean_interarrival_at_saturation;
        const double var_b = q.scv_service * eb * eb;
        const double var_a = q.scv_interarrival * q.mean_interarrival_at_saturation * q.mean_interarrival_at_saturation;

        dm.lambda_hat[i] = lam;
        dm.rho_hat[i] = eb * lam;
        dm.mean_service[i] = eb;
        dm.var_s[i] = q.scv_switchover * q.mean_switchover * q.mean_switchover;
        dm.es_total += q.mean_switchover;
        dm.var_s_total += dm.var_s[i];
        dm.eb_res_per_queue[i] = 0.5 * (1.0 + q.scv_service) * eb;
        dm.sigma_sq += lam * (var_b + dm.rho_hat[i] * dm.rho_hat[i] * var_a);
        dm.density_term[i] = density_term(q.density_mode, q.scv_interarrival);

        rate_b1 += lam * eb;
        rate_b2 += lam * eb2;
    }
    dm.es_res = (dm.var_s_total + dm.es_total * dm.es_total) / (2.0 * dm.es_total);
    dm.eb_res_global = rate_b2 / (2.0 * rate_b1);
    return dm;
}

SystemSpec scale_to_load(const SystemSpec& spec, double rho) {
    check_rho(rho);
    SystemSpec out = spec;
    out.rho = rho;
    return out;
}

}  // namespace polling
