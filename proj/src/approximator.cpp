#include "polling/approximator.hpp"

#include <algorithm>
#include <cmath>

#include "polling/error.hpp"
#include "polling/parallel.hpp"

namespace polling {

std::string_view to_string(Method m) noexcept {
    switch (m) {
        case Method::Interpolation: return "interpolation";
        case Method::LTOnly: return "lt_only";
        case Method::HTOnly: return "ht_only";
        case Method::LargeS: return "large_s";
        case Method::PCLBased: return "pcl_based";
    }
    return "unknown";
}

std::optional<Method> parse_method(std::string_view name) noexcept {
    for (Method m : kAllMethods) {
        if (name == to_string(m)) return m;
    }
    if (name == "interp") return Method::Interpolation;
    if (name == "lt") return Method::LTOnly;
    if (name == "ht") return Method::HTOnly;
    if (name == "pcl") return Method::PCLBased;
    return std::nullopt;
}

std::string_view to_string(ExactnessClass c) noexcept {
    switch (c) {
        case ExactnessClass::None: return "none";
        case ExactnessClass::SymmetricPoisson: return "symmetric_poisson";
        case ExactnessClass::TwoQueueConstraint: return "two_queue_constraint";
    }
    return "unknown";
}

bool WaitingTimeResult::has_negative_wait() const noexcept {
    return std::any_of(mean_wait.begin(), mean_wait.end(), [](double w) { return w < 0.0; });
}

double switchover_variance_term(const DerivedMoments& dm, std::size_t i) {
    const std::size_t n = dm.size();
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        double shares = 0.0;
        for (std::size_t k = 0; k <= j; ++k) shares += dm.rho_hat[(i + k) % n];
        sum += shares * dm.var_s[(i + j) % n];
    }
    return sum / dm.es_total;
}

double ht_numerator(const DerivedMoments& dm, std::size_t i) {
    const std::size_t n = dm.size();
    const double sign = dm.discipline == Discipline::Exhaustive ? -1.0 : 1.0;
    const double share = dm.rho_hat[i];
    double spread = 0.0;
    for (double r : dm.rho_hat) spread += r * (1.0 + sign * r);
    // A lone exhaustive queue makes (1 - rho_hat)/spread a 0/0; its limit is 1/rho_hat.
    const double weight = (n == 1 && sign < 0.0) ? 1.0 / share : (1.0 + sign * share) / spread;
    return 0.5 * (weight * dm.sigma_sq + (1.0 + sign * share) * dm.es_total);
}

namespace {

double k1_common(const DerivedMoments& dm, std::size_t i) {
    return dm.rho_hat[i] * (dm.density_term[i] - 1.0) * dm.eb_res_per_queue[i] + dm.eb_res_global -
           switchover_variance_term(dm, i);
}

InterpolationConstants finish(const DerivedMoments& dm, std::size_t i, double k1) {
    InterpolationConstants c;
    c.queue_index = i;
    c.k0 = dm.es_res;
    c.k1 = k1;
    c.k2 = ht_numerator(dm, i) - c.k0 - c.k1;
    return c;
}

void check_index(const DerivedMoments& dm, std::size_t i) {
    if (i >= dm.size()) throw Error(ErrorCode::InvalidConfig, "queue index out of range");
}

WaitingTimeResult make_result(Method method, const SystemSpec& spec, std::vector<double> waits) {
    WaitingTimeResult r;
    r.method = method;
    r.rho = spec.rho;
    r.mean_queue_length.resize(waits.size());
    for (std::size_t i = 0; i < waits.size(); ++i) {
        const QueueSpec& q = spec.queues[i];
        r.mean_queue_length[i] = spec.rho * (waits[i] + q.mean_service) / q.mean_interarrival_at_saturation;
    }
    r.mean_wait = std::move(waits);
    return r;
}

std::vector<InterpolationConstants> all_constants(const DerivedMoments& dm) {
    std::vector<InterpolationConstants> out;
    out.reserve(dm.size());
    for (std::size_t i = 0; i < dm.size(); ++i) out.push_back(constants_for(dm, i));
    return out;
}

double discipline_sign(Discipline d) { return d == Discipline::Exhaustive ? -1.0 : 1.0; }

}  // namespace

InterpolationConstants constants_exhaustive(const DerivedMoments& dm, std::size_t i) {
    check_index(dm, i);
    if (dm.discipline != Discipline::Exhaustive) {
        DerivedMoments as_exh = dm;
        as_exh.discipline = Discipline::Exhaustive;
        return constants_exhaustive(as_exh, i);
    }
    return finish(dm, i, k1_common(dm, i) + dm.rho_hat[i] * (dm.es_res - dm.es_total));
}

InterpolationConstants constants_gated(const DerivedMoments& dm, std::size_t i) {
    check_index(dm, i);
    if (dm.discipline != Discipline::Gated) {
        DerivedMoments as_gated = dm;
        as_gated.discipline = Discipline::Gated;
        return constants_gated(as_gated, i);
    }
    return finish(dm, i, k1_common(dm, i) + dm.rho_hat[i] * dm.es_res);
}

InterpolationConstants constants_for(const DerivedMoments& dm, std::size_t i) {
    return dm.discipline == Discipline::Exhaustive ? constants_exhaustive(dm, i) : constants_gated(dm, i);
}

WaitingTimeResult mean_wait_interpolation(const SystemSpec& spec) {
    const DerivedMoments dm = derive_moments(spec);
    auto constants = all_constants(dm);
    std::vector<double> waits(dm.size());
    for (std::size_t i = 0; i < dm.size(); ++i) waits[i] = constants[i].numerator(spec.rho) / (1.0 - spec.rho);
    auto r = make_result(Method::Interpolation, spec, std::move(waits));
    r.constants = std::move(constants);
    return r;
}

WaitingTimeResult mean_wait_lt_only(const SystemSpec& spec) {
    const DerivedMoments dm = derive_moments(spec);
    auto constants = all_constants(dm);
    std::vector<double> waits(dm.size());
    for (std::size_t i = 0; i < dm.size(); ++i) {
        const auto& c = constants[i];
        waits[i] = (c.k0 + (c.k1 - c.k0) * spec.rho) / (1.0 - spec.rho);
    }
    auto r = make_result(Method::LTOnly, spec, std::move(waits));
    r.constants = std::move(constants);
    return r;
}

WaitingTimeResult mean_wait_ht_only(const SystemSpec& spec) {
    const DerivedMoments dm = derive_moments(spec);
    std::vector<double> waits(dm.size());
    for (std::size_t i = 0; i < dm.size(); ++i) waits[i] = ht_numerator(dm, i) / (1.0 - spec.rho);
    return make_result(Method::HTOnly, spec, std::move(waits));
}

WaitingTimeResult mean_wait_large_s(const SystemSpec& spec) {
    const DerivedMoments dm = derive_moments(spec);
    const double sign = discipline_sign(spec.discipline);
    std::vector<double> waits(dm.size());
    for (std::size_t i = 0; i < dm.size(); ++i) {
        waits[i] = dm.es_total * (1.0 + sign * dm.load(i)) / (2.0 * (1.0 - spec.rho));
    }
    return make_result(Method::LargeS, spec, std::move(waits));
}

double pcl_rhs(const SystemSpec& spec) {
    const DerivedMoments dm = derive_moments(spec);
    const double rho = spec.rho;
    double sum_sq = 0.0;
    for (std::size_t j = 0; j < dm.size(); ++j) sum_sq += dm.load(j) * dm.load(j);
    const double work_left = spec.discipline == Discipline::Gated ? sum_sq * dm.es_total / (1.0 - rho) : 0.0;
    return rho * rho / (1.0 - rho) * dm.eb_res_global + rho * dm.es_res +
           0.5 * dm.es_total * (rho * rho - sum_sq) / (1.0 - rho) + work_left;
}

WaitingTimeResult mean_wait_pcl_based(const SystemSpec& spec) {
    const DerivedMoments dm = derive_moments(spec);
    const double sign = discipline_sign(spec.discipline);
    std::vector<double> waits(dm.size(), dm.es_res);
    if (spec.rho > 0.0) {
        double denom = 0.0;
        for (std::size_t i = 0; i < dm.size(); ++i) denom += dm.load(i) * (1.0 + sign * dm.load(i));
        if (!(denom > 0.0)) {
            throw Error(ErrorCode::DegenerateLoad, "sum of rho_i (1 -+ rho_i) vanishes; PCL-based method undefined");
        }
        const double residual_cycle = pcl_rhs(spec) / denom;
        for (std::size_t i = 0; i < dm.size(); ++i) waits[i] = (1.0 + sign * dm.load(i)) * residual_cycle;
    }
    return make_result(Method::PCLBased, spec, std::move(waits));
}

WaitingTimeResult mean_wait(const SystemSpec& spec, Method method) {
    switch (method) {
        case Method::Interpolation: return mean_wait_interpolation(spec);
        case Method::LTOnly: return mean_wait_lt_only(spec);
        case Method::HTOnly: return mean_wait_ht_only(spec);
        case Method::LargeS: return mean_wait_large_s(spec);
        case Method::PCLBased: return mean_wait_pcl_based(spec);
    }
    throw Error(ErrorCode::InvalidConfig, "unknown method");
}

double pcl_residual(const SystemSpec& spec) {
    const auto r = mean_wait_interpolation(spec);
    double weighted = 0.0;
    for (std::size_t i = 0; i < spec.size(); ++i) weighted += spec.rho * spec.queues[i].load_share() * r.mean_wait[i];
    return weighted - pcl_rhs(spec);
}

namespace {

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)}); }

}  // namespace

ExactnessClass classify_exactness(const SystemSpec& spec, double tol) {
    const DerivedMoments dm = derive_moments(spec);
    const std::size_t n = dm.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (!close(spec.queues[i].scv_interarrival, 1.0, tol) || !close(dm.density_term[i], 1.0, tol)) {
            return ExactnessClass::None;
        }
    }
    const QueueSpec& first = spec.queues.front();
    bool symmetric = true;
    for (std::size_t i = 0; i < n && symmetric; ++i) {
        const QueueSpec& q = spec.queues[i];
        symmetric = close(dm.rho_hat[i], 1.0 / static_cast<double>(n), tol) && close(q.mean_service, first.mean_service, tol) &&
                    close(q.scv_service, first.scv_service, tol) && close(dm.var_s[i], dm.var_s[0], tol);
    }
    if (symmetric) return ExactnessClass::SymmetricPoisson;

    if (n != 2 || spec.discipline != Discipline::Exhaustive) return ExactnessClass::None;
    const QueueSpec& a = spec.queues[0];
    const QueueSpec& b = spec.queues[1];
    const bool matched = close(a.mean_service, b.mean_service, tol) && close(a.mean_switchover, b.mean_switchover, tol) &&
                         close(a.scv_interarrival, b.scv_interarrival, tol) && close(a.scv_service, b.scv_service, tol) &&
                         close(a.scv_switchover, b.scv_switchover, tol);
    if (!matched) return ExactnessClass::None;
    const double imbalance = dm.rho_hat[0] / dm.rho_hat[1];
    const double curve = (1.0 + imbalance * imbalance) / (2.0 * imbalance) -
                         a.scv_switchover / (1.0 + a.scv_service) * a.mean_switchover / a.mean_service;
    return close(spec.rho, curve, tol) ? ExactnessClass::TwoQueueConstraint : ExactnessClass::None;
}

namespace {

void fill_rho(const SystemSpec& spec, double rho, std::span<const Method> methods, GridPoint* out) {
    const SystemSpec at = scale_to_load(spec, rho);
    std::size_t k = 0;
    for (Method m : methods) {
        const auto r = mean_wait(at, m);
        for (std::size_t q = 0; q < spec.size(); ++q) {
            out[k++] = GridPoint{rho, q, m, r.mean_wait[q], r.mean_queue_length[q]};
        }
    }
}

}  // namespace

std::vector<GridPoint> evaluate_grid(const SystemSpec& spec, std::span<const double> rhos,
                                     std::span<const Method> methods) {
    validate(spec);
    const std::size_t stride = methods.size() * spec.size();
    std::vector<GridPoint> out(rhos.size() * stride);
    parallel_for(rhos.size(), [&](std::size_t r) { fill_rho(spec, rhos[r], methods, out.data() + r * stride); });
    return out;
}

std::vector<GridPoint> evaluate_grid_serial(const SystemSpec& spec, std::span<const double> rhos,
                                            std::span<const Method> methods) {
    validate(spec);
    const std::size_t stride = methods.size() * spec.size();
    std::vector<GridPoint> out(rhos.size() * stride);
    for (std::size_t r = 0; r < rhos.size(); ++r) fill_rho(spec, rhos[r], methods, out.data() + r * stride);
    return out;
}

}  // namespace polling
