#include "ffsb/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

namespace ffsb {

namespace {

std::string num(double v) { return fmt::format("{:.17g}", v); }

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::optional<double> parse_double(std::string_view s) {
    const std::string t = trim(s);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) return std::nullopt;
    return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream ss(line);
    while (std::getline(ss, cur, sep)) out.push_back(cur);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

// Numeric rows under an exact header; `text_cols` trailing columns stay text.
struct Table {
    std::vector<std::vector<double>> rows;
    std::vector<std::string> text;
};

Table read_table(std::istream& is, const char* header, std::size_t cols, bool trailing_text = false) {
    std::string line;
    if (!std::getline(is, line) || trim(line) != header)
        throw ReportError(fmt::format("csv: expected header '{}'", header));
    Table t;
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        auto fields = split(trim(line), ',');
        if (fields.size() != cols) throw ReportError(fmt::format("csv line {}: expected {} fields", lineno, cols));
        const std::size_t numeric = trailing_text ? cols - 1 : cols;
        std::vector<double> row;
        for (std::size_t i = 0; i < numeric; ++i) {
            const auto v = parse_double(fields[i]);
            if (!v || !std::isfinite(*v))
                throw ReportError(fmt::format("csv line {}: field {} is not a finite number", lineno, i + 1));
            row.push_back(*v);
        }
        if (!t.rows.empty() && row[0] < t.rows.back()[0] && !trailing_text)
            throw ReportError(fmt::format("csv line {}: times must be non-decreasing", lineno));
        t.rows.push_back(std::move(row));
        if (trailing_text) t.text.push_back(trim(fields.back()));
    }
    if (t.rows.empty()) throw ReportError("csv: no data rows");
    return t;
}

}  // namespace

void write_trajectory_csv(std::ostream& os, const TrajectoryProfile& profile) {
    if (profile.samples.size() != profile.thrust.size())
        throw std::invalid_argument("write_trajectory_csv: samples and thrust differ in length");
    os << kTrajectoryHeader << '\n';
    for (std::size_t k = 0; k < profile.samples.size(); ++k) {
        const auto& s = profile.samples[k];
        const auto& u = profile.thrust[k];
        os << num(s.t) << ',' << num(s.r) << ',' << num(s.theta) << ',' << num(s.rdot) << ',' << num(s.thetadot)
           << ',' << num(u.ta) << ',' << num(u.alpha) << '\n';
    }
}

void write_thrust_csv(std::ostream& os, const TrajectoryProfile& profile) {
    os << kThrustHeader << '\n';
    for (const auto& u : profile.thrust) os << num(u.t) << ',' << num(u.ta) << ',' << num(u.alpha) << '\n';
}

void write_dense_csv(std::ostream& os, const std::vector<DenseState>& states) {
    os << kDenseHeader << '\n';
    for (const auto& s : states)
        os << num(s.t) << ',' << num(s.r) << ',' << num(s.theta) << ',' << num(s.rdot) << ',' << num(s.thetadot)
           << '\n';
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRecord>& records) {
    os << kSweepHeader << '\n';
    for (const auto& r : records) {
        std::string status = r.status;
        for (char& c : status)
            if (c == ',' || c == '\n') c = ';';
        os << num(r.omega) << ',' << num(r.fsq) << ',' << num(r.tof_hours) << ',' << num(r.delta_v) << ','
           << status << '\n';
    }
}

TrajectoryProfile read_trajectory_csv(std::istream& is) {
    const Table t = read_table(is, kTrajectoryHeader, 7);
    TrajectoryProfile p;
    for (const auto& row : t.rows) {
        p.samples.push_back({row[0], row[1], row[2], row[3], row[4], 0.0, 0.0});
        p.thrust.push_back({row[0], row[5], row[6]});
    }
    p.tof = t.rows.back()[0] - t.rows.front()[0];
    return p;
}

std::vector<DenseState> read_dense_csv(std::istream& is) {
    const Table t = read_table(is, kDenseHeader, 5);
    std::vector<DenseState> out;
    for (const auto& row : t.rows) out.push_back({row[0], row[1], row[2], row[3], row[4]});
    return out;
}

std::vector<SweepRecord> read_sweep_csv(std::istream& is) {
    const Table t = read_table(is, kSweepHeader, 5, true);
    std::vector<SweepRecord> out;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& row = t.rows[i];
        out.push_back({row[0], row[1], row[2], row[3], t.text[i]});
    }
    return out;
}

void Summary::set(const std::string& key, const std::string& value) {
    if (key.empty() || key.find('=') != std::string::npos || value.find('\n') != std::string::npos)
        throw std::invalid_argument("Summary::set: bad key or value for '" + key + "'");
    for (auto& [k, v] : entries_) {
        if (k == key) {
            v = value;
            return;
        }
    }
    entries_.emplace_back(key, value);
}

void Summary::set(const std::string& key, double value) { set(key, num(value)); }
void Summary::set(const std::string& key, int value) { set(key, std::to_string(value)); }
void Summary::set(const std::string& key, bool value) { set(key, std::string(value ? "true" : "false")); }

void Summary::set(const std::string& key, const Eigen::VectorXd& value) {
    std::string s;
    for (Eigen::Index i = 0; i < value.size(); ++i) {
        if (i) s += ' ';
        s += num(value(i));
    }
    set(key, s);
}

bool Summary::has(const std::string& key) const {
    for (const auto& e : entries_)
        if (e.first == key) return true;
    return false;
}

const std::string& Summary::text(const std::string& key) const {
    for (const auto& e : entries_)
        if (e.first == key) return e.second;
    throw ReportError("summary: missing key '" + key + "'");
}

double Summary::number(const std::string& key) const {
    const auto v = parse_double(text(key));
    if (!v) throw ReportError("summary: '" + key + "' is not a number");
    return *v;
}

Eigen::VectorXd Summary::vector(const std::string& key) const {
    std::istringstream ss(text(key));
    std::vector<double> vals;
    std::string tok;
    while (ss >> tok) {
        const auto v = parse_double(tok);
        if (!v) throw ReportError("summary: '" + key + "' holds a non-numeric entry");
        vals.push_back(*v);
    }
    return Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

void Summary::write(std::ostream& os) const {
    for (const auto& [k, v] : entries_) os << k << " = " << v << '\n';
}

Summary Summary::parse(std::istream& is) {
    Summary s;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw ReportError(fmt::format("summary line {}: expected key = value", lineno));
        const std::string key = trim(std::string_view(t).substr(0, eq));
        if (key.empty()) throw ReportError(fmt::format("summary line {}: empty key", lineno));
        s.set(key, trim(std::string_view(t).substr(eq + 1)));
    }
    return s;
}

Summary summarize(const ShapeSolution& sol, const ScenarioConfig& cfg) {
    Summary s;
    s.set("method", "ffs");
    s.set("scenario", cfg.name);
    s.set("objective_mode", std::string(to_string(cfg.objective_mode)));
    s.set("omega", cfg.omega);
    s.set("n_r", cfg.n_r);
    s.set("n_theta", cfg.n_theta);
    s.set("dp", cfg.dp);
    s.set("J", sol.objective);
    s.set("fsq", sol.fsq);
    s.set("tof_tu", sol.tof);
    s.set("tof_hours", cfg.tof_hours(sol.tof));
    s.set("delta_v", sol.delta_v);
    s.set("max_abs_ta", sol.max_abs_ta);
    if (sol.theta_f) s.set("theta_f", *sol.theta_f);
    s.set("singular_points", sol.singular_points);
    s.set("status", to_string(sol.nlp.status));
    s.set("iterations", sol.nlp.iterations);
    s.set("outer_iterations", sol.nlp.outer_iterations);
    s.set("max_violation", sol.nlp.max_violation);
    s.set("coeffs_r", sol.coeffs_r);
    s.set("coeffs_theta", sol.coeffs_theta);
    s.set("free", sol.free);
    return s;
}

Summary summarize(const OptimalSolution& sol, const ScenarioConfig& cfg) {
    Summary s;
    s.set("method", "collocation");
    s.set("scenario", cfg.name);
    s.set("segments", sol.grid.segments);
    s.set("tof_tu", sol.grid.tof);
    s.set("tof_hours", sol.tof_hours);
    s.set("theta_f", sol.theta_f_target);
    s.set("defect_norm", sol.defect_norm);
    s.set("boundary_error", sol.boundary_error);
    s.set("saturation_fraction", saturation_fraction(sol));
    s.set("off_fraction", off_fraction(sol));
    s.set("bang_off_bang", bang_off_bang(sol));
    s.set("status", to_string(sol.nlp.status));
    s.set("iterations", sol.nlp.iterations);
    s.set("outer_iterations", sol.nlp.outer_iterations);
    s.set("max_violation", sol.nlp.max_violation);
    return s;
}

Summary summarize(const PropagationReport& report, const FeasibilityLimits& limits) {
    Summary s;
    s.set("final_radius_error_rel", report.final_radius_error_rel);
    s.set("final_angle_error_deg", report.final_angle_error_deg);
    s.set("final_state_error", Eigen::VectorXd(report.final_state_error));
    s.set("max_path_deviation", report.max_path_deviation);
    s.set("mean_radial_deviation", report.deviation.mean_radial);
    s.set("max_angular_deviation", report.deviation.max_angular);
    s.set("steps", report.steps_taken);
    s.set("rejected_steps", report.rejected_steps);
    s.set("radius_limit_rel", limits.radius_rel);
    s.set("angle_limit_deg", limits.angle_deg);
    s.set("feasible", is_feasible(report, limits));
    return s;
}

ShapeSolution restore_solution(const Summary& summary, const ScenarioConfig& cfg) {
    const ShapeModel model(cfg);
    const Eigen::VectorXd x = summary.vector("free");
    if (x.size() != model.layout().dim())
        throw ReportError(fmt::format("summary: 'free' has {} entries, scenario expects {}", x.size(),
                                      model.layout().dim()));
    return assemble_solution(model, x);
}

Summary read_summary(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ReportError("cannot open " + path.string());
    try {
        return Summary::parse(in);
    } catch (const ReportError& e) {
        throw ReportError(path.string() + ": " + e.what());
    }
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ReportError("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw ReportError("write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw ReportError("cannot move " + tmp.string() + " to " + path.string());
    }
}

std::string to_json(const RunManifest& m) {
    nlohmann::ordered_json j;
    j["command"] = m.command;
    j["scenario"] = m.scenario_path;
    j["config"] = m.config_echo;
    j["outputs"] = m.outputs;
    j["wall_time_s"] = m.wall_time_s;
    j["version"] = m.version;
    return j.dump(2) + "\n";
}

}  // namespace ffsb
