#include "polling/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>

#include "polling/approximator.hpp"
#include "polling/experiments.hpp"
#include "polling/parallel.hpp"
#include "polling/simulator.hpp"
#include "polling/spec_io.hpp"

namespace polling::cli {

using nlohmann::json;
namespace fs = std::filesystem;

int exit_code_for(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::NumericalBudget: return kExitBudget;
        case ErrorCode::Io: return kExitIo;
        default: return kExitValidation;
    }
}

RhoGrid parse_rho_grid(const std::string& text) {
    RhoGrid g;
    std::vector<double> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) {
        try {
            std::size_t used = 0;
            parts.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::logic_error&) {
            throw Error(ErrorCode::InvalidConfig, "rho grid '" + text + "' must look like start:stop:step");
        }
    }
    if (parts.size() != 3) throw Error(ErrorCode::InvalidConfig, "rho grid '" + text + "' must look like start:stop:step");
    g = {parts[0], parts[1], parts[2]};
    if (!(g.step > 0.0)) throw Error(ErrorCode::InvalidConfig, "rho grid step must be positive");
    if (!(g.start >= 0.0) || !(g.stop < 1.0) || g.start > g.stop) {
        throw Error(ErrorCode::InvalidConfig, "rho grid must satisfy 0 <= start <= stop < 1 (stability needs rho < 1)");
    }
    return g;
}

std::vector<double> expand(const RhoGrid& grid) {
    std::vector<double> out;
    for (std::size_t k = 0;; ++k) {
        const double raw = grid.start + static_cast<double>(k) * grid.step;
        if (raw > grid.stop + 1e-9 * grid.step) break;
        out.push_back(std::round(raw * 1e12) / 1e12);
    }
    return out;
}

namespace {

struct SimFlags {
    std::uint64_t cycles = SimConfig{}.measured_cycles;
    std::uint64_t warmup = SimConfig{}.warmup_cycles;
    int reps = SimConfig{}.replications;
    int batches = SimConfig{}.batch_count;
    std::uint64_t seed = SimConfig{}.base_seed;
    std::uint64_t max_events = SimConfig{}.max_events;

    SimConfig config() const {
        SimConfig c;
        c.measured_cycles = cycles;
        c.warmup_cycles = warmup;
        c.replications = reps;
        c.batch_count = batches;
        c.base_seed = seed;
        c.max_events = max_events;
        return c;
    }
};

void add_sim_flags(CLI::App* cmd, SimFlags& f) {
    cmd->add_option("--cycles", f.cycles, "Measured server cycles per replication");
    cmd->add_option("--warmup", f.warmup, "Warm-up cycles per replication");
    cmd->add_option("--reps", f.reps, "Independent replications");
    cmd->add_option("--batches", f.batches, "Batch count per replication (batch means)");
    cmd->add_option("--seed", f.seed, "Base seed");
    cmd->add_option("--max-events", f.max_events, "Event budget across all replications");
}

std::vector<Method> parse_methods(const std::string& list) {
    std::vector<Method> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item == "all") {
            out.assign(std::begin(kAllMethods), std::end(kAllMethods));
            continue;
        }
        const auto m = parse_method(item);
        if (!m) throw Error(ErrorCode::InvalidConfig, "unknown method '" + item + "'");
        out.push_back(*m);
    }
    if (out.empty()) throw Error(ErrorCode::InvalidConfig, "no methods given");
    return out;
}

std::string num(double v) {
    std::ostringstream os;
    os << std::setprecision(12) << v;
    return os.str();
}

std::string cell(double v) {
    std::ostringstream os;
    os << std::setprecision(10) << v;
    return os.str();
}

// ---- analyze ---------------------------------------------------------------

struct AnalyzeArgs {
    std::string spec_path;
    std::string method = "interpolation";
    std::optional<double> rho;
    std::string format = "text";
};

int cmd_analyze(const AnalyzeArgs& a, std::ostream& out, std::ostream& err) {
    SystemSpec spec = load_spec_file(a.spec_path);
    if (a.rho) spec = scale_to_load(spec, *a.rho);
    const auto methods = parse_methods(a.method);
    const DerivedMoments dm = derive_moments(spec);
    const double rhs = pcl_rhs(spec);
    const double residual = pcl_residual(spec);
    const auto exactness = classify_exactness(spec);

    std::vector<WaitingTimeResult> results;
    for (Method m : methods) results.push_back(mean_wait(spec, m));
    for (const auto& r : results) {
        if (r.has_negative_wait()) err << "warning: " << to_string(r.method) << " produced a negative mean wait\n";
    }

    if (a.format == "json") {
        json doc;
        doc["spec"] = spec_to_json(spec);
        doc["pcl_rhs"] = rhs;
        doc["pcl_residual"] = residual;
        doc["exactness"] = std::string(to_string(exactness));
        json jr = json::array();
        for (const auto& r : results) {
            json queues = json::array();
            for (std::size_t i = 0; i < spec.size(); ++i) {
                const auto c = constants_for(dm, i);
                queues.push_back({{"queue", i + 1},
                                  {"mean_wait", r.mean_wait[i]},
                                  {"mean_queue_length", r.mean_queue_length[i]},
                                  {"k0", c.k0},
                                  {"k1", c.k1},
                                  {"k2", c.k2},
                                  {"omega", ht_numerator(dm, i)}});
            }
            jr.push_back({{"method", std::string(to_string(r.method))},
                          {"rho", r.rho},
                          {"negative_wait", r.has_negative_wait()},
                          {"queues", queues}});
        }
        doc["results"] = jr;
        out << doc.dump(2) << '\n';
    } else if (a.format == "csv") {
        out << "method,rho,queue,mean_wait,mean_queue_length,k0,k1,k2,omega\n";
        for (const auto& r : results) {
            for (std::size_t i = 0; i < spec.size(); ++i) {
                const auto c = constants_for(dm, i);
                out << to_string(r.method) << ',' << num(r.rho) << ',' << i + 1 << ',' << num(r.mean_wait[i]) << ','
                    << num(r.mean_queue_length[i]) << ',' << num(c.k0) << ',' << num(c.k1) << ',' << num(c.k2) << ','
                    << num(ht_numerator(dm, i)) << '\n';
            }
        }
    } else if (a.format == "text") {
        out << "N = " << spec.size() << ", discipline = " << to_string(spec.discipline) << ", rho = " << num(spec.rho)
            << '\n';
        for (const auto& r : results) {
            out << "\nmethod: " << to_string(r.method) << '\n';
            out << std::setw(6) << "queue" << std::setw(16) << "E[W]" << std::setw(16) << "E[L]" << std::setw(16)
                << "K0" << std::setw(16) << "K1" << std::setw(16) << "K2" << std::setw(16) << "omega" << '\n';
            for (std::size_t i = 0; i < spec.size(); ++i) {
                const auto c = constants_for(dm, i);
                // Round-off below 1e-12 of the scale prints as an exact zero.
                const double scale = std::max({1.0, std::abs(c.k0), std::abs(c.k1)});
                const double k2 = std::abs(c.k2) < 1e-12 * scale ? 0.0 : c.k2;
                out << std::setw(6) << i + 1 << std::setw(16) << cell(r.mean_wait[i]) << std::setw(16)
                    << cell(r.mean_queue_length[i]) << std::setw(16) << cell(c.k0) << std::setw(16) << cell(c.k1)
                    << std::setw(16) << cell(k2) << std::setw(16) << cell(ht_numerator(dm, i)) << '\n';
            }
        }
        out << "\nPCL right-hand side: " << num(rhs) << ", residual of interpolation: " << num(residual) << '\n';
        out << "exactness: " << to_string(exactness) << '\n';
    } else {
        throw Error(ErrorCode::InvalidConfig, "unknown format '" + a.format + "' (json, csv, text)");
    }
    return kExitOk;
}

// ---- sweep -----------------------------------------------------------------

struct SweepArgs {
    std::string spec_path;
    std::string grid;
    std::string methods = "interpolation";
    std::string preset;
    bool simulate = false;
    SimFlags sim;
};

int cmd_sweep(const SweepArgs& a, std::ostream& out) {
    SystemSpec spec;
    bool simulate_points = a.simulate;
    std::string grid_text = a.grid;
    if (!a.preset.empty()) {
        if (a.preset != "figure1") throw Error(ErrorCode::InvalidConfig, "unknown preset '" + a.preset + "' (figure1)");
        spec = showcase_system(0.5);
        simulate_points = true;
        if (grid_text.empty()) grid_text = "0.1:0.9:0.1";
    } else {
        if (a.spec_path.empty()) throw Error(ErrorCode::InvalidConfig, "sweep needs a spec file or --preset");
        spec = load_spec_file(a.spec_path);
    }
    if (grid_text.empty()) throw Error(ErrorCode::InvalidConfig, "sweep needs --rho-grid start:stop:step");
    const auto rhos = expand(parse_rho_grid(grid_text));
    const auto methods = parse_methods(a.methods);

    out << "rho,queue,method,mean_wait,ci_half_width\n";
    for (const auto& p : evaluate_grid(spec, rhos, methods)) {
        out << num(p.rho) << ',' << p.queue + 1 << ',' << to_string(p.method) << ',' << num(p.mean_wait) << ",\n";
    }
    if (simulate_points) {
        for (double rho : rhos) {
            if (rho <= 0.0) continue;
            const auto est = simulate(scale_to_load(spec, rho), a.sim.config());
            for (std::size_t q = 0; q < spec.size(); ++q) {
                out << num(rho) << ',' << q + 1 << ",simulation," << num(est.mean_wait_hat[q]) << ','
                    << num(est.ci_half_width[q]) << '\n';
            }
        }
    }
    return kExitOk;
}

// ---- simulate --------------------------------------------------------------

struct SimulateArgs {
    std::string spec_path;
    std::optional<double> rho;
    std::string event_log;
    SimFlags sim;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
    SystemSpec spec = load_spec_file(a.spec_path);
    if (a.rho) spec = scale_to_load(spec, *a.rho);
    const SimConfig cfg = a.sim.config();
    const SimEstimate est = simulate(spec, cfg);

    if (!a.event_log.empty()) {
        std::ofstream log(a.event_log);
        if (!log) throw Error(ErrorCode::Io, "cannot write event log '" + a.event_log + "'");
        log << "time,event,queue,detail\n";
        log << std::setprecision(17);
        SimConfig one = cfg;
        one.replications = 1;
        one.batch_count = std::max(2, cfg.batch_count);
        simulate_replication(spec, one, 0, [&](const SimEvent& e) {
            log << e.time << ',' << to_string(e.kind) << ',' << e.queue + 1 << ',' << e.detail << '\n';
        });
        if (!log) throw Error(ErrorCode::Io, "failed writing event log '" + a.event_log + "'");
    }

    json doc = estimate_to_json(est);
    doc["spec"] = spec_to_json(spec);
    doc["config"] = {{"warmup_cycles", cfg.warmup_cycles}, {"measured_cycles", cfg.measured_cycles},
                     {"replications", cfg.replications},   {"batch_count", cfg.batch_count},
                     {"base_seed", cfg.base_seed}};
    const auto approx = mean_wait_interpolation(spec);
    doc["interpolation_mean_wait"] = approx.mean_wait;
    out << doc.dump(2) << '\n';
    return kExitOk;
}

// ---- testbed ---------------------------------------------------------------

struct TestbedArgs {
    std::string discipline = "exhaustive";
    std::string subset = "poisson";
    std::string grid = "table1";
    std::string out_dir;
    std::string methods = "interpolation";
    std::string density = "two_moment_approx";
    double max_total_events = 5e9;
    SimFlags sim;
};

void write_files_atomically(const fs::path& dir, const std::vector<std::pair<std::string, std::string>>& files) {
    std::vector<fs::path> written;
    auto rollback = [&] {
        std::error_code ec;
        for (const auto& p : written) fs::remove(p, ec);
    };
    for (const auto& [name, content] : files) {
        const fs::path target = dir / name;
        const fs::path tmp = dir / (name + ".tmp");
        std::ofstream os(tmp, std::ios::binary);
        if (os) os << content;
        os.close();
        if (!os) {
            std::error_code ec;
            fs::remove(tmp, ec);
            rollback();
            throw Error(ErrorCode::Io, "cannot write '" + target.string() + "'");
        }
        std::error_code ec;
        fs::rename(tmp, target, ec);
        if (ec) {
            fs::remove(tmp, ec);
            rollback();
            throw Error(ErrorCode::Io, "cannot write '" + target.string() + "'");
        }
        written.push_back(target);
    }
}

void ensure_writable_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw Error(ErrorCode::Io, "cannot create output directory '" + dir.string() + "'");
    const fs::path probe = dir / ".polling_write_probe";
    {
        std::ofstream os(probe);
        if (!os) throw Error(ErrorCode::Io, "output directory '" + dir.string() + "' is not writable");
    }
    fs::remove(probe, ec);
}

int cmd_testbed(const TestbedArgs& a, std::ostream& out) {
    ComparisonOptions opts;
    if (a.discipline == "exhaustive") opts.discipline = Discipline::Exhaustive;
    else if (a.discipline == "gated") opts.discipline = Discipline::Gated;
    else throw Error(ErrorCode::InvalidConfig, "discipline must be exhaustive or gated");
    opts.density = density_mode_from_json(a.density);
    opts.sim = a.sim.config();
    validate(opts.sim);

    Subset subset;
    if (a.subset == "poisson") subset = Subset::Poisson;
    else if (a.subset == "sampled") subset = Subset::Sampled;
    else if (a.subset == "full") subset = Subset::Full;
    else throw Error(ErrorCode::InvalidConfig, "subset must be poisson, sampled or full");

    GridAxes axes;
    if (a.grid == "table1") axes = table1_axes();
    else if (a.grid == "highscv") axes = high_scv_axes();
    else throw Error(ErrorCode::InvalidConfig, "grid must be table1 or highscv");
    const auto grid = enumerate_grid(axes);
    const auto cases = select_subset(grid, subset);
    if (cases.empty()) throw Error(ErrorCode::InvalidConfig, "selected subset is empty for this grid");
    const auto methods = parse_methods(a.methods);

    if (a.out_dir.empty()) throw Error(ErrorCode::InvalidConfig, "--out is required");
    const fs::path dir(a.out_dir);
    ensure_writable_dir(dir);

    double budget = 0.0;
    for (const auto& c : cases) {
        budget += expected_events(materialize_case(c, opts.discipline, opts.density), case_sim_config(c, opts));
    }
    if (budget > a.max_total_events) {
        std::ostringstream os;
        os << "test bed run needs about " << budget << " simulated events, above --max-total-events "
           << a.max_total_events << "; lower --cycles/--reps or raise the budget for full-length runs";
        throw Error(ErrorCode::NumericalBudget, os.str());
    }

    const auto rows = run_comparison(cases, methods, opts);

    std::vector<std::pair<std::string, std::string>> files;
    {
        std::ostringstream raw;
        write_raw_csv(raw, rows);
        files.emplace_back("raw_results.csv", raw.str());
    }
    auto tables = standard_tables(rows, opts.discipline);
    if (a.grid == "highscv" && std::find(methods.begin(), methods.end(), Method::Interpolation) != methods.end()) {
        tables.push_back(bin_table(rows, Method::Interpolation, "table4", "Relative error bins, high service/switch-over SCV"));
    }
    std::ostringstream all_text;
    for (const auto& t : tables) {
        std::ostringstream csv;
        write_table_csv(csv, t);
        files.emplace_back(t.name + ".csv", csv.str());
        write_table_text(all_text, t);
        all_text << '\n';
    }
    files.emplace_back("tables.txt", all_text.str());
    write_files_atomically(dir, files);

    std::size_t flagged = 0;
    for (const auto& r : rows) flagged += r.ci_flag ? 1 : 0;
    out << "cases: " << cases.size() << " of " << grid.size() << " (" << to_string(subset) << "), observations: " << rows.size()
        << ", CI-flagged: " << flagged << '\n';
    if (subset != Subset::Sampled && opts.discipline == Discipline::Exhaustive) {
        const auto exact = count_exact_cases(cases, opts.discipline);
        out << "structurally exact cases: " << exact.total() << " (symmetric " << exact.symmetric << ", two-queue "
            << exact.two_queue << ")\n";
    }
    for (Method m : methods) {
        const auto t = mean_by_n(rows, m, "summary", "");
        out << "mean |rel err| % for " << to_string(m) << ":";
        for (std::size_t r = 0; r < t.row_n.size(); ++r) {
            out << "  N=" << t.row_n[r] << ' ' << std::fixed << std::setprecision(2) << t.cells[r][0]
                << std::defaultfloat;
        }
        out << '\n';
    }
    out << "wrote " << files.size() << " files to " << dir.string() << '\n';
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Closed-form mean waiting times for cyclic polling systems, with a simulation oracle", "polling"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "Worker threads (default: POLLING_THREADS or OpenMP default)");

    AnalyzeArgs analyze;
    auto* c_analyze = app.add_subcommand("analyze", "Evaluate approximations for one system");
    c_analyze->add_option("spec", analyze.spec_path, "Spec JSON file")->required();
    c_analyze->add_option("--method", analyze.method, "Method or comma list (interpolation, lt_only, ht_only, large_s, pcl_based, all)");
    c_analyze->add_option("--rho", analyze.rho, "Override the load in the JSON file");
    c_analyze->add_option("--format", analyze.format, "json, csv or text");

    SweepArgs sweep;
    auto* c_sweep = app.add_subcommand("sweep", "Evaluate methods over a load grid (CSV)");
    c_sweep->add_option("spec", sweep.spec_path, "Spec JSON file");
    c_sweep->add_option("--rho-grid", sweep.grid, "start:stop:step");
    c_sweep->add_option("--methods", sweep.methods, "Comma separated methods");
    c_sweep->add_option("--preset", sweep.preset, "figure1: three-queue showcase with simulation points");
    c_sweep->add_flag("--simulate", sweep.simulate, "Add simulation points at each grid load");
    add_sim_flags(c_sweep, sweep.sim);

    SimulateArgs simulate_args;
    auto* c_sim = app.add_subcommand("simulate", "Run the discrete-event simulator (JSON)");
    c_sim->add_option("spec", simulate_args.spec_path, "Spec JSON file")->required();
    c_sim->add_option("--rho", simulate_args.rho, "Override the load in the JSON file");
    c_sim->add_option("--event-log", simulate_args.event_log, "Write replication 0's event log as CSV");
    add_sim_flags(c_sim, simulate_args.sim);

    TestbedArgs testbed;
    auto* c_tb = app.add_subcommand("testbed", "Reproduce the test-bed error tables");
    c_tb->add_option("--discipline", testbed.discipline, "exhaustive or gated");
    c_tb->add_option("--subset", testbed.subset, "poisson, sampled or full");
    c_tb->add_option("--grid", testbed.grid, "table1 or highscv");
    c_tb->add_option("--out", testbed.out_dir, "Output directory")->required();
    c_tb->add_option("--methods", testbed.methods, "Comma separated methods");
    c_tb->add_option("--density", testbed.density, "Density mode for the approximation");
    c_tb->add_option("--max-total-events", testbed.max_total_events, "Simulation budget for the whole run");
    add_sim_flags(c_tb, testbed.sim);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitValidation;
    }
    if (threads > 0) set_thread_count(threads);

    try {
        if (c_analyze->parsed()) return cmd_analyze(analyze, out, err);
        if (c_sweep->parsed()) return cmd_sweep(sweep, out);
        if (c_sim->parsed()) return cmd_simulate(simulate_args, out);
        if (c_tb->parsed()) return cmd_testbed(testbed, out);
    } catch (const Error& e) {
        err << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    }
    return kExitValidation;
}

}  // namespace polling::cli
