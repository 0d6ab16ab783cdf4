#include "polling/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "polling/error.hpp"
#include "polling/parallel.hpp"

namespace polling {

GridAxes table1_axes() {
    return GridAxes{{2, 3, 4, 5}, {0.1, 0.3, 0.5, 0.7, 0.9, 0.99}, {0.25, 1.0, 2.0}, {0.25, 1.0}, {0.25, 1.0},
                    {1.0, 5.0},   {1.0, 5.0},                       {1.0, 5.0}};
}

GridAxes high_scv_axes() {
    GridAxes axes = table1_axes();
    axes.scv_a = {1.0};
    axes.scv_b = {2.0, 5.0};
    axes.scv_s = {2.0, 5.0};
    return axes;
}

std::vector<TestBedCase> enumerate_grid(const GridAxes& axes) {
    std::vector<TestBedCase> out;
    for (int n : axes.n_queues)
        for (double rho : axes.rho)
            for (double ca : axes.scv_a)
                for (double cb : axes.scv_b)
                    for (double cs : axes.scv_s)
                        for (double ia : axes.imbalance_a)
                            for (double ib : axes.imbalance_b)
                                for (double ratio : axes.switch_service_ratio) {
                                    out.push_back(TestBedCase{out.size(), n, rho, ca, cb, cs, ia, ib, ratio});
                                }
    return out;
}

std::vector<TestBedCase> enumerate_testbed() { return enumerate_grid(table1_axes()); }

SystemSpec materialize_case(const TestBedCase& c, Discipline discipline, DensityMode density) {
    if (c.n_queues < 1) throw Error(ErrorCode::InvalidConfig, "test-bed case needs at least one queue");
    const int n = c.n_queues;
    const double ia = c.imbalance_a;

    // lambda_i = a - b i with mean 1 and lambda_1 / lambda_N = I_A.
    double a = 1.0;
    double b = 0.0;
    if (ia != 1.0 && n > 1) {
        b = 1.0 / ((ia * n - 1.0) / (ia - 1.0) - 0.5 * (n + 1.0));
        a = 1.0 + 0.5 * b * (n + 1.0);
    }

    std::vector<double> rates(n);
    std::vector<double> service_shape(n);
    double scale = 0.0;
    for (int i = 1; i <= n; ++i) {
        rates[i - 1] = a - b * i;
        service_shape[i - 1] = n > 1 ? 1.0 + (c.imbalance_b - 1.0) * (i - 1.0) / (n - 1.0) : 1.0;
        scale += rates[i - 1] * service_shape[i - 1];
    }

    SystemSpec spec;
    spec.discipline = discipline;
    spec.rho = c.rho;
    for (int i = 0; i < n; ++i) {
        const double eb = service_shape[i] / scale;
        QueueSpec q;
        q.mean_service = eb;
        q.scv_service = c.scv_b;
        q.mean_interarrival_at_saturation = 1.0 / rates[i];
        q.scv_interarrival = c.scv_a;
        q.mean_switchover = c.switch_service_ratio * eb;
        q.scv_switchover = c.scv_s;
        q.density_mode = density;
        spec.queues.push_back(q);
    }
    return spec;
}

const char* to_string(Subset s) noexcept {
    switch (s) {
        case Subset::Poisson: return "poisson";
        case Subset::Sampled: return "sampled";
        case Subset::Full: return "full";
    }
    return "unknown";
}

namespace {

std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// The 32 combinations of (C_B, C_S, I_A, I_B, S/B), in grid order.
struct OtherFactors {
    double scv_b, scv_s, ia, ib, ratio;
};

OtherFactors other_factors(std::uint64_t combo) {
    return OtherFactors{(combo & 16) ? 1.0 : 0.25, (combo & 8) ? 1.0 : 0.25, (combo & 4) ? 5.0 : 1.0,
                        (combo & 2) ? 5.0 : 1.0, (combo & 1) ? 5.0 : 1.0};
}

bool matches(const TestBedCase& c, int n, double rho, double ca, const OtherFactors& f) {
    return c.n_queues == n && c.rho == rho && c.scv_a == ca && c.scv_b == f.scv_b && c.scv_s == f.scv_s &&
           c.imbalance_a == f.ia && c.imbalance_b == f.ib && c.switch_service_ratio == f.ratio;
}

}  // namespace

std::vector<TestBedCase> select_subset(const std::vector<TestBedCase>& grid, Subset subset) {
    std::vector<TestBedCase> out;
    if (subset == Subset::Full) return grid;
    if (subset == Subset::Poisson) {
        std::copy_if(grid.begin(), grid.end(), std::back_inserter(out), [](const TestBedCase& c) { return c.poisson(); });
        return out;
    }
    const double rhos[] = {0.1, 0.3, 0.5, 0.7, 0.9};
    const double scvs[] = {0.25, 2.0};
    for (int n = 2; n <= 5; ++n) {
        for (int r = 0; r < 5; ++r) {
            for (int a = 0; a < 2; ++a) {
                // Two distinct combos per (rho, C_A) stratum, identical for every N.
                const std::uint64_t first = mix(static_cast<std::uint64_t>(r * 2 + a)) % 32;
                const std::uint64_t second = (first + 1 + mix(static_cast<std::uint64_t>(100 + r * 2 + a)) % 31) % 32;
                for (std::uint64_t combo : {first, second}) {
                    const OtherFactors f = other_factors(combo);
                    for (const auto& c : grid) {
                        if (matches(c, n, rhos[r], scvs[a], f)) out.push_back(c);
                    }
                }
            }
        }
    }
    std::sort(out.begin(), out.end(), [](const TestBedCase& x, const TestBedCase& y) { return x.index < y.index; });
    return out;
}

ExactCount count_exact_cases(const std::vector<TestBedCase>& cases, Discipline discipline) {
    ExactCount count;
    for (const auto& c : cases) {
        const SystemSpec spec = materialize_case(c, discipline);
        switch (classify_exactness(spec)) {
            case ExactnessClass::SymmetricPoisson:
                ++count.symmetric;
                count.case_indices.push_back(c.index);
                break;
            case ExactnessClass::TwoQueueConstraint:
                ++count.two_queue;
                count.case_indices.push_back(c.index);
                break;
            case ExactnessClass::None:
                break;
        }
    }
    return count;
}

SimConfig case_sim_config(const TestBedCase& c, const ComparisonOptions& opts) {
    SimConfig cfg = opts.sim;
    cfg.base_seed = opts.sim.base_seed + 7919ULL * c.index;
    if (opts.scale_cycles_with_load && c.rho > 0.9) {
        const double stretch = 0.1 / (1.0 - c.rho);
        cfg.measured_cycles = static_cast<std::uint64_t>(std::ceil(cfg.measured_cycles * stretch));
        cfg.warmup_cycles = static_cast<std::uint64_t>(std::ceil(cfg.warmup_cycles * stretch));
    }
    return cfg;
}

namespace {

void compare_case(const TestBedCase& c, const std::vector<Method>& methods, const ComparisonOptions& opts,
                  ErrorRow* out) {
    const SystemSpec spec = materialize_case(c, opts.discipline, opts.density);
    const SimEstimate sim = simulate_serial(spec, case_sim_config(c, opts));
    std::size_t k = 0;
    for (Method m : methods) {
        const auto approx = mean_wait(spec, m);
        for (std::size_t q = 0; q < spec.size(); ++q) {
            ErrorRow row;
            row.tcase = c;
            row.discipline = opts.discipline;
            row.queue = q;
            row.method = m;
            row.approx = approx.mean_wait[q];
            row.oracle = sim.mean_wait_hat[q];
            row.ci_half_width = sim.ci_half_width[q];
            row.rel_error = (row.approx - row.oracle) / row.oracle;
            row.ci_flag = !(row.ci_half_width <= opts.ci_flag_fraction * std::abs(row.oracle));
            out[k++] = row;
        }
    }
}

std::size_t rows_per_case(const TestBedCase& c, std::size_t methods) {
    return static_cast<std::size_t>(c.n_queues) * methods;
}

std::vector<std::size_t> offsets(const std::vector<TestBedCase>& cases, std::size_t methods) {
    std::vector<std::size_t> off(cases.size() + 1, 0);
    for (std::size_t i = 0; i < cases.size(); ++i) off[i + 1] = off[i] + rows_per_case(cases[i], methods);
    return off;
}

}  // namespace

std::vector<ErrorRow> run_comparison(const std::vector<TestBedCase>& cases, const std::vector<Method>& methods,
                                     const ComparisonOptions& opts) {
    const auto off = offsets(cases, methods.size());
    std::vector<ErrorRow> rows(off.back());
    parallel_for(cases.size(), [&](std::size_t i) { compare_case(cases[i], methods, opts, rows.data() + off[i]); });
    return rows;
}

std::vector<ErrorRow> run_comparison_serial(const std::vector<TestBedCase>& cases,
                                            const std::vector<Method>& methods, const ComparisonOptions& opts) {
    const auto off = offsets(cases, methods.size());
    std::vector<ErrorRow> rows(off.back());
    for (std::size_t i = 0; i < cases.size(); ++i) compare_case(cases[i], methods, opts, rows.data() + off[i]);
    return rows;
}

namespace {

const char* const kBinColumns[] = {"0-5%", "5-10%", "10-15%", "15-20%", ">=20%"};

std::string fmt_value(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

std::vector<int> sorted_n(const std::vector<ErrorRow>& rows) {
    std::vector<int> ns;
    for (const auto& r : rows) ns.push_back(r.tcase.n_queues);
    std::sort(ns.begin(), ns.end());
    ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
    return ns;
}

std::string facet_key(const TestBedCase& c, Facet f) {
    switch (f) {
        case Facet::Rho: return fmt_value(c.rho);
        case Facet::ScvA: return fmt_value(c.scv_a);
        case Facet::Imbalance: return "I_A=" + fmt_value(c.imbalance_a) + ",I_B=" + fmt_value(c.imbalance_b);
    }
    return {};
}

std::vector<const ErrorRow*> pick(const std::vector<ErrorRow>& rows, Method method, bool poisson_only) {
    std::vector<const ErrorRow*> out;
    for (const auto& r : rows) {
        if (r.method == method && (!poisson_only || r.tcase.poisson())) out.push_back(&r);
    }
    return out;
}

}  // namespace

Table bin_table(const std::vector<ErrorRow>& rows, Method method, const std::string& name, const std::string& title,
                bool poisson_only) {
    const auto chosen = pick(rows, method, poisson_only);
    Table t;
    t.name = name;
    t.title = title;
    t.columns.assign(std::begin(kBinColumns), std::end(kBinColumns));
    for (int n : sorted_n(rows)) {
        std::vector<double> counts(t.columns.size(), 0.0);
        std::size_t total = 0;
        for (const ErrorRow* r : chosen) {
            if (r->tcase.n_queues != n) continue;
            const double pct = 100.0 * std::abs(r->rel_error);
            const auto bin = std::min<std::size_t>(static_cast<std::size_t>(pct / 5.0), t.columns.size() - 1);
            counts[bin] += 1.0;
            ++total;
        }
        if (total == 0) continue;
        for (double& c : counts) c = 100.0 * c / static_cast<double>(total);
        t.row_n.push_back(n);
        t.cells.push_back(counts);
        t.row_counts.push_back(total);
    }
    return t;
}

Table facet_table(const std::vector<ErrorRow>& rows, Method method, Facet facet, const std::string& name,
                  const std::string& title) {
    const auto chosen = pick(rows, method, false);
    Table t;
    t.name = name;
    t.title = title;
    // Column order follows the numeric order of the facet's underlying case values.
    std::vector<std::pair<std::vector<double>, std::string>> keys;
    for (const ErrorRow* r : chosen) {
        std::vector<double> order;
        switch (facet) {
            case Facet::Rho: order = {r->tcase.rho}; break;
            case Facet::ScvA: order = {r->tcase.scv_a}; break;
            case Facet::Imbalance: order = {r->tcase.imbalance_a, r->tcase.imbalance_b}; break;
        }
        keys.emplace_back(order, facet_key(r->tcase, facet));
    }
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    for (const auto& k : keys) t.columns.push_back(k.second);

    for (int n : sorted_n(rows)) {
        std::vector<double> sums(t.columns.size(), 0.0);
        std::vector<std::size_t> counts(t.columns.size(), 0);
        std::size_t total = 0;
        for (const ErrorRow* r : chosen) {
            if (r->tcase.n_queues != n) continue;
            const auto col = std::find(t.columns.begin(), t.columns.end(), facet_key(r->tcase, facet)) - t.columns.begin();
            sums[col] += 100.0 * std::abs(r->rel_error);
            counts[col] += 1;
            ++total;
        }
        if (total == 0) continue;
        std::vector<double> means(t.columns.size(), std::nan(""));
        for (std::size_t c = 0; c < means.size(); ++c) {
            if (counts[c] > 0) means[c] = sums[c] / static_cast<double>(counts[c]);
        }
        t.row_n.push_back(n);
        t.cells.push_back(means);
        t.row_counts.push_back(total);
    }
    return t;
}

Table mean_by_n(const std::vector<ErrorRow>& rows, Method method, const std::string& name, const std::string& title,
                bool poisson_only) {
    const auto chosen = pick(rows, method, poisson_only);
    Table t;
    t.name = name;
    t.title = title;
    t.columns = {"mean |rel err| %"};
    for (int n : sorted_n(rows)) {
        double sum = 0.0;
        std::size_t total = 0;
        for (const ErrorRow* r : chosen) {
            if (r->tcase.n_queues != n) continue;
            sum += 100.0 * std::abs(r->rel_error);
            ++total;
        }
        if (total == 0) continue;
        t.row_n.push_back(n);
        t.cells.push_back({sum / static_cast<double>(total)});
        t.row_counts.push_back(total);
    }
    return t;
}

std::vector<Table> standard_tables(const std::vector<ErrorRow>& rows, Discipline discipline) {
    auto has = [&](Method m) {
        return std::any_of(rows.begin(), rows.end(), [&](const ErrorRow& r) { return r.method == m; });
    };
    auto has_poisson = std::any_of(rows.begin(), rows.end(), [](const ErrorRow& r) { return r.tcase.poisson(); });
    std::vector<Table> out;
    const bool exh = discipline == Discipline::Exhaustive;
    const std::string d = exh ? "exhaustive" : "gated";
    if (has(Method::Interpolation)) {
        out.push_back(mean_by_n(rows, Method::Interpolation, "summary_" + d, "Mean relative error by N, " + d));
        out.push_back(bin_table(rows, Method::Interpolation, exh ? "table2" : "table7",
                                "Relative error bins (5%), interpolation, " + d));
        const char* prefix = exh ? "table3" : "table8";
        out.push_back(facet_table(rows, Method::Interpolation, Facet::Rho, std::string(prefix) + "a",
                                  "Mean relative error by N and load, " + d));
        out.push_back(facet_table(rows, Method::Interpolation, Facet::ScvA, std::string(prefix) + "b",
                                  "Mean relative error by N and interarrival SCV, " + d));
        out.push_back(facet_table(rows, Method::Interpolation, Facet::Imbalance, std::string(prefix) + "c",
                                  "Mean relative error by N and imbalance, " + d));
    }
    if (exh) {
        if (has(Method::HTOnly))
            out.push_back(facet_table(rows, Method::HTOnly, Facet::Rho, "table5a", "Heavy-traffic-only method by load"));
        if (has(Method::LargeS))
            out.push_back(
                facet_table(rows, Method::LargeS, Facet::Rho, "table5b", "Large-switch-over method by load"));
        if (has(Method::LTOnly))
            out.push_back(facet_table(rows, Method::LTOnly, Facet::Rho, "table5c", "Light-traffic-only method by load"));
        if (has_poisson && has(Method::Interpolation))
            out.push_back(bin_table(rows, Method::Interpolation, "table6a",
                                    "Relative error bins, Poisson cases, interpolation", true));
        if (has_poisson && has(Method::PCLBased))
            out.push_back(
                bin_table(rows, Method::PCLBased, "table6b", "Relative error bins, Poisson cases, PCL-based", true));
    }
    return out;
}

namespace {

std::string exact(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

const char* kRawHeader =
    "case,n_queues,rho,scv_a,scv_b,scv_s,imbalance_a,imbalance_b,switch_service_ratio,discipline,queue,method,"
    "approx,oracle,ci_half_width,rel_error,ci_flag";

}  // namespace

void write_raw_csv(std::ostream& os, const std::vector<ErrorRow>& rows) {
    os << kRawHeader << '\n';
    for (const auto& r : rows) {
        const auto& c = r.tcase;
        os << c.index << ',' << c.n_queues << ',' << exact(c.rho) << ',' << exact(c.scv_a) << ',' << exact(c.scv_b)
           << ',' << exact(c.scv_s) << ',' << exact(c.imbalance_a) << ',' << exact(c.imbalance_b) << ','
           << exact(c.switch_service_ratio) << ',' << to_string(r.discipline) << ',' << r.queue + 1 << ','
           << to_string(r.method) << ',' << exact(r.approx) << ',' << exact(r.oracle) << ','
           << exact(r.ci_half_width) << ',' << exact(r.rel_error) << ',' << (r.ci_flag ? 1 : 0) << '\n';
    }
}

std::vector<ErrorRow> read_raw_csv(std::istream& is) {
    std::vector<ErrorRow> rows;
    std::string line;
    if (!std::getline(is, line) || line != kRawHeader) {
        throw Error(ErrorCode::Schema, "raw results CSV has an unexpected header");
    }
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (f.size() != 17) {
            throw Error(ErrorCode::Schema, "raw results CSV line " + std::to_string(line_no) + " has wrong field count");
        }
        try {
            ErrorRow r;
            r.tcase = TestBedCase{std::stoul(f[0]), std::stoi(f[1]), std::stod(f[2]), std::stod(f[3]), std::stod(f[4]),
                                  std::stod(f[5]), std::stod(f[6]), std::stod(f[7]), std::stod(f[8])};
            if (f[9] == "exhaustive") r.discipline = Discipline::Exhaustive;
            else if (f[9] == "gated") r.discipline = Discipline::Gated;
            else throw Error(ErrorCode::Schema, "unknown discipline '" + f[9] + "'");
            r.queue = std::stoul(f[10]) - 1;
            const auto m = parse_method(f[11]);
            if (!m) throw Error(ErrorCode::Schema, "unknown method '" + f[11] + "'");
            r.method = *m;
            r.approx = std::stod(f[12]);
            r.oracle = std::stod(f[13]);
            r.ci_half_width = std::stod(f[14]);
            r.rel_error = std::stod(f[15]);
            r.ci_flag = f[16] == "1";
            rows.push_back(r);
        } catch (const std::logic_error&) {
            throw Error(ErrorCode::Schema, "raw results CSV line " + std::to_string(line_no) + " is malformed");
        }
    }
    return rows;
}

void write_table_csv(std::ostream& os, const Table& t) {
    os << "N";
    for (const auto& c : t.columns) os << ",\"" << c << '"';
    os << ",observations\n";
    for (std::size_t r = 0; r < t.row_n.size(); ++r) {
        os << t.row_n[r];
        for (double v : t.cells[r]) os << ',' << exact(v);
        os << ',' << t.row_counts[r] << '\n';
    }
}

void write_table_text(std::ostream& os, const Table& t) {
    std::size_t width = 8;
    for (const auto& c : t.columns) width = std::max(width, c.size() + 2);
    os << t.name << ": " << t.title << '\n';
    os << std::setw(4) << "N";
    for (const auto& c : t.columns) os << std::setw(static_cast<int>(width)) << c;
    os << std::setw(8) << "obs" << '\n';
    for (std::size_t r = 0; r < t.row_n.size(); ++r) {
        os << std::setw(4) << t.row_n[r];
        for (double v : t.cells[r]) {
            os << std::setw(static_cast<int>(width));
            if (std::isnan(v)) os << "-";
            else os << std::fixed << std::setprecision(2) << v << std::defaultfloat;
        }
        os << std::setw(8) << t.row_counts[r] << '\n';
    }
}

SystemSpec showcase_system(double rho, Discipline discipline) {
    SystemSpec spec;
    spec.discipline = discipline;
    spec.rho = rho;
    for (double share : {0.1, 0.3, 0.6}) {
        QueueSpec q;
        q.mean_service = 1.0;
        q.scv_service = 1.0;
        q.mean_interarrival_at_saturation = 1.0 / share;
        q.scv_interarrival = 3.0;
        q.mean_switchover = 1.0;
        q.scv_switchover = 1.0;
        q.density_mode = DensityMode::exact_h2();
        spec.queues.push_back(q);
    }
    return spec;
}

}  // namespace polling
