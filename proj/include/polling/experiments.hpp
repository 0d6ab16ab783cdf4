#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "polling/approximator.hpp"
#include "polling/core_model.hpp"
#include "polling/simulator.hpp"

namespace polling {

/// One parameter combination of the test bed.
struct TestBedCase {
    std::size_t index = 0;
    int n_queues = 2;
    double rho = 0.1;
    double scv_a = 1.0;
    double scv_b = 1.0;
    double scv_s = 1.0;
    double imbalance_a = 1.0;
    double imbalance_b = 1.0;
    double switch_service_ratio = 1.0;

    bool poisson() const noexcept { return scv_a == 1.0; }
    friend bool operator==(const TestBedCase&, const TestBedCase&) = default;
};

/// Value lists for each factor; the grid is their cross product.
struct GridAxes {
    std::vector<int> n_queues;
    std::vector<double> rho;
    std::vector<double> scv_a;
    std::vector<double> scv_b;
    std::vector<double> scv_s;
    std::vector<double> imbalance_a;
    std::vector<double> imbalance_b;
    std::vector<double> switch_service_ratio;
};

/// The 4 x 6 x 3 x 2^5 = 2304 case grid.
GridAxes table1_axes();
/// Poisson arrivals with service and switch-over SCVs in {2, 5}: 768 cases.
GridAxes high_scv_axes();

/// Cross product in factor order (N, rho, C_A, C_B, C_S, I_A, I_B, S/B), last factor fastest.
std::vector<TestBedCase> enumerate_grid(const GridAxes& axes);
std::vector<TestBedCase> enumerate_testbed();

/// Linear arrival rates with mean 1 and lambda_1/lambda_N = I_A, linearly
/// increasing service means with E[B_N] = I_B E[B_1] normalised so that
/// sum lambda_i E[B_i] = 1, and E[S_i] = ratio x E[B_i].
SystemSpec materialize_case(const TestBedCase& c, Discipline discipline,
                            DensityMode density = DensityMode::two_moment_approx());

enum class Subset { Poisson, Sampled, Full };
const char* to_string(Subset s) noexcept;

/// Poisson: every case with C_A^2 = 1. Sampled: a stratified non-Poisson
/// sample, paired across N (same other factors for every N), covering
/// rho in {0.1, ..., 0.9} and C_A^2 in {0.25, 2}; 80 cases.
std::vector<TestBedCase> select_subset(const std::vector<TestBedCase>& grid, Subset subset);

struct ExactCount {
    std::size_t symmetric = 0;
    std::size_t two_queue = 0;
    std::size_t asymmetric_poisson_only = 0;
    std::vector<std::size_t> case_indices;
    std::size_t total() const noexcept { return symmetric + two_queue; }
};

/// Counts cases the interpolation reproduces exactly (structural test, no simulation).
ExactCount count_exact_cases(const std::vector<TestBedCase>& cases, Discipline discipline);

struct ComparisonOptions {
    Discipline discipline = Discipline::Exhaustive;
    DensityMode density = DensityMode::two_moment_approx();
    SimConfig sim;
    /// Stretch cycle counts by max(1, 0.1/(1-rho)) so rho > 0.9 gets longer runs.
    bool scale_cycles_with_load = true;
    /// A case is flagged when the CI half-width exceeds this fraction of the estimate.
    double ci_flag_fraction = 0.05;
};

/// One (case, queue, method) comparison.
struct ErrorRow {
    TestBedCase tcase;
    Discipline discipline = Discipline::Exhaustive;
    std::size_t queue = 0;
    Method method = Method::Interpolation;
    double approx = 0.0;
    double oracle = 0.0;
    double ci_half_width = 0.0;
    /// (approx - oracle) / oracle; tables use its absolute value.
    double rel_error = 0.0;
    bool ci_flag = false;

    friend bool operator==(const ErrorRow&, const ErrorRow&) = default;
};

SimConfig case_sim_config(const TestBedCase& c, const ComparisonOptions& opts);

/// Simulation oracle per case, OpenMP over cases; rows ordered by (case, method, queue).
std::vector<ErrorRow> run_comparison(const std::vector<TestBedCase>& cases, const std::vector<Method>& methods,
                                     const ComparisonOptions& opts);
std::vector<ErrorRow> run_comparison_serial(const std::vector<TestBedCase>& cases,
                                            const std::vector<Method>& methods, const ComparisonOptions& opts);

/// Rows x columns of percentages, rows keyed by N.
struct Table {
    std::string name;
    std::string title;
    std::vector<std::string> columns;
    std::vector<int> row_n;
    std::vector<std::vector<double>> cells;
    /// Observations behind each row.
    std::vector<std::size_t> row_counts;

    friend bool operator==(const Table&, const Table&) = default;
};

enum class Facet { Rho, ScvA, Imbalance };

/// Share (%) of |rel err| in 5-point bins: [0,5), [5,10), [10,15), [15,20), >= 20.
Table bin_table(const std::vector<ErrorRow>& rows, Method method, const std::string& name, const std::string& title,
                bool poisson_only = false);
/// Mean |rel err| (%) per N and facet value.
Table facet_table(const std::vector<ErrorRow>& rows, Method method, Facet facet, const std::string& name,
                  const std::string& title);
/// Mean |rel err| (%) per N.
Table mean_by_n(const std::vector<ErrorRow>& rows, Method method, const std::string& name, const std::string& title,
                bool poisson_only = false);

/// The table set matching the layouts of the published tables for one discipline.
std::vector<Table> standard_tables(const std::vector<ErrorRow>& rows, Discipline discipline);

void write_raw_csv(std::ostream& os, const std::vector<ErrorRow>& rows);
std::vector<ErrorRow> read_raw_csv(std::istream& is);

void write_table_csv(std::ostream& os, const Table& t);
void write_table_text(std::ostream& os, const Table& t);

/// Three-queue showcase: loads split 0.1/0.3/0.6, exponential service and
/// switch-over with mean 1, interarrival SCV 3 with exact H2 density.
SystemSpec showcase_system(double rho, Discipline discipline = Discipline::Exhaustive);

}  // namespace polling
