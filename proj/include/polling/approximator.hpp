#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "polling/core_model.hpp"

namespace polling {

enum class Method { Interpolation, LTOnly, HTOnly, LargeS, PCLBased };

inline constexpr Method kAllMethods[] = {Method::Interpolation, Method::LTOnly, Method::HTOnly, Method::LargeS,
                                         Method::PCLBased};

std::string_view to_string(Method m) noexcept;
/// Accepts the canonical names ("interpolation", "lt_only", "ht_only", "large_s", "pcl_based").
std::optional<Method> parse_method(std::string_view name) noexcept;

/// Numerator coefficients of E[W_i] = (k0 + k1 rho + k2 rho^2) / (1 - rho).
struct InterpolationConstants {
    double k0 = 0.0;
    double k1 = 0.0;
    double k2 = 0.0;
    std::size_t queue_index = 0;

    double numerator(double rho) const noexcept { return k0 + rho * (k1 + rho * k2); }
};

struct WaitingTimeResult {
    Method method = Method::Interpolation;
    double rho = 0.0;
    std::vector<double> mean_wait;
    std::vector<double> mean_queue_length;
    /// Filled for Interpolation and LTOnly; empty otherwise.
    std::vector<InterpolationConstants> constants;

    /// Negative waits are reported, never clamped.
    bool has_negative_wait() const noexcept;
};

/// (1/E[S]) sum_{j=0}^{N-1} sum_{k=0}^{j} rho_hat_{i+k} V[S_{i+j}], indices cyclic.
double switchover_variance_term(const DerivedMoments& dm, std::size_t i);

/// Mean asymptotic scaled delay: lim (1 - rho) E[W_i] as rho -> 1.
double ht_numerator(const DerivedMoments& dm, std::size_t i);

InterpolationConstants constants_exhaustive(const DerivedMoments& dm, std::size_t i);
InterpolationConstants constants_gated(const DerivedMoments& dm, std::size_t i);
/// Dispatches on dm.discipline.
InterpolationConstants constants_for(const DerivedMoments& dm, std::size_t i);

WaitingTimeResult mean_wait_interpolation(const SystemSpec& spec);
/// (k0 + (k1 - k0) rho) / (1 - rho).
WaitingTimeResult mean_wait_lt_only(const SystemSpec& spec);
/// omega_i / (1 - rho).
WaitingTimeResult mean_wait_ht_only(const SystemSpec& spec);
/// E[S] (1 -+ rho_i) / (2 (1 - rho)).
WaitingTimeResult mean_wait_large_s(const SystemSpec& spec);
/// (1 -+ rho_i) E[C^res] with E[C^res] solved from the pseudo-conservation law.
WaitingTimeResult mean_wait_pcl_based(const SystemSpec& spec);

WaitingTimeResult mean_wait(const SystemSpec& spec, Method method);

/// Right-hand side of the pseudo-conservation law for sum_i rho_i E[W_i].
double pcl_rhs(const SystemSpec& spec);

/// sum_i rho_i E[W_i,app] - pcl_rhs. Zero (to rounding) whenever all arrivals are Poisson.
double pcl_residual(const SystemSpec& spec);

/// Cases in which the interpolation is known to be exact.
enum class ExactnessClass { None, SymmetricPoisson, TwoQueueConstraint };

std::string_view to_string(ExactnessClass c) noexcept;

/// Structural test for exactness. Symmetric: all arrivals Poisson, equal load
/// shares, identical service laws, equal switch-over variances. Two-queue:
/// exhaustive, Poisson, matched means and SCVs, and rho on the curve
/// (1 + I^2)/(2I) - C_S^2/(1 + C_B^2) E[S_i]/E[B_i] with I = rho_hat_1/rho_hat_2.
ExactnessClass classify_exactness(const SystemSpec& spec, double tol = 1e-9);

/// One (rho, queue, method) evaluation of a load sweep.
struct GridPoint {
    double rho = 0.0;
    std::size_t queue = 0;
    Method method = Method::Interpolation;
    double mean_wait = 0.0;
    double mean_queue_length = 0.0;
};

/// Sweep kernel: rows ordered by (rho, method, queue). OpenMP over rho.
std::vector<GridPoint> evaluate_grid(const SystemSpec& spec, std::span<const double> rhos,
                                     std::span<const Method> methods);
/// Serial reference for evaluate_grid; identical output.
std::vector<GridPoint> evaluate_grid_serial(const SystemSpec& spec, std::span<const double> rhos,
                                            std::span<const Method> methods);

}  // namespace polling
