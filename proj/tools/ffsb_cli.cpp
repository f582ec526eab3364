// ffsb: shape-based and minimum-time low-thrust transfer runs from scenario files.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "ffsb/collocation.hpp"
#include "ffsb/propagation.hpp"
#include "ffsb/report.hpp"
#include "ffsb/scenario.hpp"
#include "ffsb/shaping.hpp"

namespace fs = std::filesystem;
using namespace ffsb;

namespace {

enum Exit { kOk = 0, kConfigError = 1, kNotConverged = 2, kInfeasible = 3 };

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Globals {
    std::string out_dir = "out";
    bool seedless = false;
    std::string log_level = "info";
};

class Run {
public:
    Run(const Globals& g, std::string command, std::string scenario)
        : out_(g.out_dir), start_(std::chrono::steady_clock::now()) {
        manifest_.command = std::move(command);
        manifest_.scenario_path = std::move(scenario);
        std::error_code ec;
        fs::create_directories(out_, ec);
        if (ec) throw ConfigError("cannot create output directory " + out_.string());
    }

    fs::path path(const std::string& name) const { return out_ / name; }

    template <class Writer>
    void emit(const std::string& name, Writer&& write) {
        std::ostringstream os;
        write(os);
        write_file_atomic(path(name), os.str());
        manifest_.outputs.push_back(path(name).string());
        spdlog::debug("wrote {}", path(name).string());
    }

    void echo(const ScenarioConfig& cfg) { manifest_.config_echo = format_scenario(cfg); }

    void finish(const std::string& stem) {
        manifest_.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        write_file_atomic(path(stem + "_manifest.json"), to_json(manifest_));
    }

private:
    fs::path out_;
    std::chrono::steady_clock::time_point start_;
    RunManifest manifest_;
};

ScenarioConfig load(const std::string& path) {
    if (!fs::exists(path)) throw ConfigError("scenario not found: " + path);
    return load_scenario(path);
}

std::string stem_of(const std::string& path) {
    std::string s = fs::path(path).stem().string();
    constexpr std::string_view kSuffix = "_summary";
    if (s.size() > kSuffix.size() && s.ends_with(kSuffix)) s.resize(s.size() - kSuffix.size());
    return s;
}

void write_solution(Run& run, const std::string& stem, const TrajectoryProfile& profile, Summary summary) {
    const std::string traj = stem + "_trajectory.csv";
    run.emit(traj, [&](std::ostream& os) { write_trajectory_csv(os, profile); });
    run.emit(stem + "_thrust.csv", [&](std::ostream& os) { write_thrust_csv(os, profile); });
    summary.set("trajectory_csv", traj);
    run.emit(stem + "_summary.txt", [&](std::ostream& os) { summary.write(os); });
}

int cmd_solve(const Globals& g, const std::string& scenario, bool baseline) {
    ScenarioConfig cfg = load(scenario);
    const std::string stem = stem_of(scenario);
    Run run(g, "solve", scenario);
    run.echo(cfg);

    spdlog::info("solving {} (omega = {})", stem, cfg.omega);
    const ShapeSolution sol = solve(cfg);
    Summary s = summarize(sol, cfg);
    spdlog::info("J = {:.6g}, fsq = {:.6g}, tof = {:.4f} h, dV = {:.6f}, status {}", sol.objective, sol.fsq,
                 cfg.tof_hours(sol.tof), sol.delta_v, to_string(sol.nlp.status));

    if (baseline && cfg.objective_mode != ObjectiveMode::none && cfg.omega != 0.0) {
        ScenarioConfig base = cfg;
        base.omega = 0.0;
        const ShapeSolution b = solve(base);
        const double base_h = cfg.tof_hours(b.tof), tof_h = cfg.tof_hours(sol.tof);
        s.set("baseline_status", to_string(b.nlp.status));
        s.set("baseline_fsq", b.fsq);
        s.set("baseline_tof_hours", base_h);
        s.set("baseline_delta_v", b.delta_v);
        s.set("tof_reduction_hours", base_h - tof_h);
        s.set("tof_reduction_percent", 100.0 * (base_h - tof_h) / base_h);
        s.set("delta_v_reduction", b.delta_v - sol.delta_v);
        spdlog::info("baseline (omega = 0): tof = {:.4f} h, dV = {:.6f}; reduction {:.2f}%", base_h, b.delta_v,
                     100.0 * (base_h - tof_h) / base_h);
    }
    write_solution(run, stem, sol.profile, s);
    run.finish(stem);
    return sol.nlp.converged() ? kOk : kNotConverged;
}

std::vector<double> weight_grid(double from, double to, double step) {
    if (!(step > 0.0)) throw ConfigError("--omega-step must be positive");
    if (!(from >= 0.0 && to <= 1.0 && from <= to)) throw ConfigError("omega range must satisfy 0 <= from <= to <= 1");
    std::vector<double> w;
    for (int k = 0;; ++k) {
        const double v = std::round((from + k * step) * 1e12) / 1e12;
        if (v > to + 1e-9) break;
        w.push_back(std::min(v, 1.0));
    }
    return w;
}

std::pair<int, int> parse_orders(const std::string& s) {
    const auto slash = s.find('/');
    try {
        if (slash == std::string::npos) throw std::invalid_argument(s);
        return {std::stoi(s.substr(0, slash)), std::stoi(s.substr(slash + 1))};
    } catch (const std::exception&) {
        throw ConfigError("--orders entries look like n_r/n_theta, got '" + s + "'");
    }
}

int cmd_sweep(const Globals& g, const std::string& scenario, double from, double to, double step,
              const std::vector<std::string>& orders, bool parallel, unsigned threads) {
    const ScenarioConfig cfg = load(scenario);
    const std::vector<double> weights = weight_grid(from, to, step);
    const std::string stem = stem_of(scenario);
    Run run(g, "sweep", scenario);
    run.echo(cfg);

    std::vector<std::pair<int, int>> variants;
    for (const auto& o : orders) variants.push_back(parse_orders(o));

    SweepOptions opts;
    opts.parallel = parallel;
    opts.threads = threads;
    auto one = [&](const ScenarioConfig& c, const std::string& name) {
        spdlog::info("sweep {}: {} weights, n_r = {}, n_theta = {}", name, weights.size(), c.n_r, c.n_theta);
        const auto records = sweep(c, weights, opts);
        run.emit(name, [&](std::ostream& os) { write_sweep_csv(os, records); });
    };
    if (variants.empty()) {
        one(cfg, stem + "_sweep.csv");
    } else {
        for (const auto& [nr, nt] : variants) {
            ScenarioConfig c = cfg;
            c.n_r = nr;
            c.n_theta = nt;
            try {
                c.validate();
            } catch (const ScenarioError& e) {
                throw ConfigError(e.what());
            }
            one(c, fmt::format("{}_sweep_nr{}_nt{}.csv", stem, nr, nt));
        }
    }
    run.finish(stem + "_sweep");
    return kOk;
}

int cmd_validate(const Globals& g, const std::string& solution, const std::string& scenario) {
    const ScenarioConfig cfg = load(scenario);
    const Summary summary = read_summary(solution);
    const ShapeSolution sol = restore_solution(summary, cfg);

    // The stored trajectory must agree with the coefficients it came from.
    if (summary.has("trajectory_csv")) {
        const fs::path csv = fs::path(solution).parent_path() / summary.text("trajectory_csv");
        std::ifstream in(csv);
        if (!in) throw ReportError("cannot open " + csv.string());
        const TrajectoryProfile stored = read_trajectory_csv(in);
        if (stored.samples.size() != sol.profile.samples.size())
            throw ReportError(csv.string() + ": grid size does not match the coefficients");
        for (std::size_t k = 0; k < stored.samples.size(); ++k) {
            const auto& a = stored.samples[k];
            const auto& b = sol.profile.samples[k];
            if (std::abs(a.r - b.r) > 1e-8 || std::abs(a.theta - b.theta) > 1e-8 || std::abs(a.t - b.t) > 1e-8)
                throw ReportError(csv.string() + ": trajectory does not match the stored coefficients");
        }
    }

    const std::string stem = stem_of(solution);
    Run run(g, "validate", scenario);
    run.echo(cfg);
    const PropagationReport rep = integrate_open_loop(sol, cfg);
    const FeasibilityLimits limits;
    const bool ok = is_feasible(rep, limits);
    run.emit(stem + "_dense.csv", [&](std::ostream& os) { write_dense_csv(os, rep.trajectory); });
    run.emit(stem + "_validation.txt", [&](std::ostream& os) { summarize(rep, limits).write(os); });
    run.finish(stem + "_validation");
    spdlog::info("final radius error {:.3g} (limit {}), final angle error {:.3g} deg (limit {}): {}",
                 rep.final_radius_error_rel, limits.radius_rel, rep.final_angle_error_deg, limits.angle_deg,
                 ok ? "feasible" : "infeasible");
    return ok ? kOk : kInfeasible;
}

int cmd_mintime(const Globals& g, const std::string& scenario, int segments, double effort_weight) {
    const ScenarioConfig cfg = load(scenario);
    if (segments < kMinSegments) throw ConfigError(fmt::format("--segments must be >= {}", kMinSegments));
    const std::string stem = stem_of(scenario) + "_mintime";
    Run run(g, "mintime", scenario);
    run.echo(cfg);
    CollocationOptions opts;
    opts.segments = segments;
    opts.effort_weight = effort_weight;
    spdlog::info("minimum-time collocation, {} segments", segments);
    const OptimalSolution sol = solve_min_time(cfg, opts);
    spdlog::info("tof = {:.4f} h, saturation {:.3f}, off {:.3f}, status {}", sol.tof_hours, saturation_fraction(sol),
                 off_fraction(sol), to_string(sol.nlp.status));
    write_solution(run, stem, sol.profile, summarize(sol, cfg));
    run.finish(stem);
    return sol.converged() ? kOk : kNotConverged;
}

int cmd_compare(const Globals& g, const std::string& ffs_path, const std::string& mintime_path) {
    const Summary ffs = read_summary(ffs_path);
    const Summary mt = read_summary(mintime_path);
    const double pen = ffs.number("tof_hours");
    const double base = ffs.has("baseline_tof_hours") ? ffs.number("baseline_tof_hours") : pen;
    const double opt = mt.number("tof_hours");
    auto red = [&](double v) { return 100.0 * (base - v) / base; };

    std::ostringstream os;
    os << fmt::format("{:<24}{:>16}{:>16}{:>16}\n", "", "ToF w/o penalty", "ToF w/ penalty", "Min-time ToF");
    os << fmt::format("{:<24}{:>16.2f}{:>16.2f}{:>16.2f}\n", "ToF (h)", base, pen, opt);
    os << fmt::format("{:<24}{:>16.2f}{:>16.2f}{:>16.2f}\n", "ToF Reduction (%)", 0.0, red(pen), red(opt));
    os << fmt::format("{:<24}{:>16}{:>16.2f}{:>16}\n", "Diff. to min-time (%)", "-", 100.0 * (pen - opt) / opt, "-");
    std::cout << os.str();

    Run run(g, "compare", ffs_path);
    run.emit(stem_of(ffs_path) + "_compare.txt", [&](std::ostream& o) { o << os.str(); });
    run.finish(stem_of(ffs_path) + "_compare");
    return kOk;
}

void setup_logging(const Globals& g) {
    auto logger = spdlog::stderr_color_mt("ffsb");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");
    const auto level = spdlog::level::from_str(g.log_level);
    if (level == spdlog::level::off && g.log_level != "off")
        throw ConfigError("unknown --log-level '" + g.log_level + "'");
    spdlog::set_level(level);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finite Fourier series shape-based and minimum-time low-thrust transfers"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", FFSB_VERSION);
    Globals g;
    app.add_option("--out-dir", g.out_dir, "Directory for all outputs")->capture_default_str()->take_last();
    app.add_flag("--seedless", g.seedless, "Accepted for reproducibility scripts; no solver draws random numbers");
    app.add_option("--log-level", g.log_level, "trace, debug, info, warn, error or off")
        ->capture_default_str()
        ->take_last();

    std::string scenario, solution, other;
    bool no_baseline = false;
    auto* solve_cmd = app.add_subcommand("solve", "Shape-based solve plus the omega = 0 baseline");
    solve_cmd->add_option("scenario", scenario)->required();
    solve_cmd->add_flag("--no-baseline", no_baseline, "Skip the omega = 0 reference run");

    double from = 0.01, to = 0.99, step = 0.01;
    std::vector<std::string> orders;
    bool parallel = false;
    unsigned threads = 0;
    auto* sweep_cmd = app.add_subcommand("sweep", "Weight sweep, one CSV row per omega");
    sweep_cmd->add_option("scenario", scenario)->required();
    sweep_cmd->add_option("--omega-from", from)->capture_default_str();
    sweep_cmd->add_option("--omega-to", to)->capture_default_str();
    sweep_cmd->add_option("--omega-step", step)->capture_default_str();
    sweep_cmd->add_option("--orders", orders, "n_r/n_theta pairs, one CSV each (default: scenario orders)");
    sweep_cmd->add_flag("--parallel", parallel, "Cold-start every weight on a worker pool");
    sweep_cmd->add_option("--threads", threads, "Worker count for --parallel (0: all cores)");

    auto* validate_cmd = app.add_subcommand("validate", "Propagate a shaped solution open-loop");
    validate_cmd->add_option("solution", solution, "Summary written by solve")->required();
    validate_cmd->add_option("scenario", scenario)->required();

    int segments = kDefaultSegments;
    double effort = CollocationOptions{}.effort_weight;
    auto* mintime_cmd = app.add_subcommand("mintime", "Minimum-time transfer by direct collocation");
    mintime_cmd->add_option("scenario", scenario)->required();
    mintime_cmd->add_option("--segments", segments)->capture_default_str();
    mintime_cmd->add_option("--effort-weight", effort, "Control-effort regularisation weight")->capture_default_str();

    auto* compare_cmd = app.add_subcommand("compare", "Time-of-flight table: shaped vs minimum time");
    compare_cmd->add_option("ffs_summary", solution)->required();
    compare_cmd->add_option("mintime_summary", other)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        setup_logging(g);
        if (g.seedless) spdlog::debug("--seedless: no random number generator is used");
        if (*solve_cmd) return cmd_solve(g, scenario, !no_baseline);
        if (*sweep_cmd) return cmd_sweep(g, scenario, from, to, step, orders, parallel, threads);
        if (*validate_cmd) return cmd_validate(g, solution, scenario);
        if (*mintime_cmd) return cmd_mintime(g, scenario, segments, effort);
        if (*compare_cmd) return cmd_compare(g, solution, other);
    } catch (const ConfigError& e) {
        spdlog::error("{}", e.what());
        return kConfigError;
    } catch (const ScenarioError& e) {
        spdlog::error("{}", e.what());
        return kConfigError;
    } catch (const ReportError& e) {
        spdlog::error("{}", e.what());
        return kConfigError;
    } catch (const std::invalid_argument& e) {
        spdlog::error("{}", e.what());
        return kConfigError;
    } catch (const PropagationError& e) {
        spdlog::error("propagation failed at t = {}: {}", e.time(), e.what());
        return kInfeasible;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return kConfigError;
    }
    return kConfigError;
}
