#include "ffsb/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace ffsb {

namespace {

double scale_of(UnitKind kind, const CanonicalUnits& u) {
    switch (kind) {
    case UnitKind::distance: return u.du_km;
    case UnitKind::time: return u.tu_s;
    case UnitKind::rate: return u.du_km / u.tu_s;
    case UnitKind::angular_rate: return 1.0 / u.tu_s;
    case UnitKind::acceleration: return u.du_km / (u.tu_s * u.tu_s);
    case UnitKind::angle: return 1.0;
    case UnitKind::grav_parameter: return u.du_km * u.du_km * u.du_km / (u.tu_s * u.tu_s);
    }
    return 1.0;
}

[[noreturn]] void fail(const std::string& field, const std::string& what) {
    throw ScenarioError("scenario field '" + field + "': " + what);
}

std::string trim(std::string s) {
    auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

}  // namespace

CanonicalUnits CanonicalUnits::from_mu(double mu_km3s2, double du_km) {
    if (!(du_km > 0.0)) fail("du_km", "must be > 0");
    if (!(mu_km3s2 > 0.0)) fail("mu_km3s2", "must be > 0");
    CanonicalUnits u;
    u.du_km = du_km;
    u.tu_s = std::sqrt(du_km * du_km * du_km / mu_km3s2);
    u.mu_canonical = 1.0;
    return u;
}

double to_canonical(double value, UnitKind kind, const CanonicalUnits& units) {
    return value / scale_of(kind, units);
}

double to_physical(double value, UnitKind kind, const CanonicalUnits& units) {
    return value * scale_of(kind, units);
}

double circular_rate(double r, double mu) {
    if (!(r > 0.0)) throw std::domain_error("circular_rate: radius must be positive");
    return std::sqrt(mu / (r * r * r));
}

std::string_view to_string(ObjectiveMode m) {
    switch (m) {
    case ObjectiveMode::none: return "none";
    case ObjectiveMode::tof: return "tof";
    case ObjectiveMode::delta_v: return "delta_v";
    }
    return "?";
}

std::string_view to_string(FinalAngleMode m) {
    switch (m) {
    case FinalAngleMode::free: return "free";
    case FinalAngleMode::fixed: return "fixed";
    case FinalAngleMode::rendezvous_sync: return "rendezvous_sync";
    }
    return "?";
}

ObjectiveMode parse_objective_mode(std::string_view s) {
    if (s == "none") return ObjectiveMode::none;
    if (s == "tof") return ObjectiveMode::tof;
    if (s == "delta_v") return ObjectiveMode::delta_v;
    fail("objective_mode", "expected one of none|tof|delta_v, got '" + std::string(s) + "'");
}

FinalAngleMode parse_final_angle_mode(std::string_view s) {
    if (s == "free") return FinalAngleMode::free;
    if (s == "fixed") return FinalAngleMode::fixed;
    if (s == "rendezvous_sync") return FinalAngleMode::rendezvous_sync;
    fail("final_angle_mode",
         "expected one of free|fixed|rendezvous_sync, got '" + std::string(s) + "'");
}

void ScenarioConfig::validate() const {
    if (!(units.du_km > 0.0)) fail("du_km", "must be > 0");
    if (!(units.tu_s > 0.0)) fail("tu_s", "must be > 0");
    if (!(bcs.r_i > 0.0)) fail("r_i_km", "must be > 0");
    if (!(bcs.r_f > 0.0)) fail("r_f_km", "must be > 0");
    if (n_r < 2) fail("n_r", "must be >= 2, got " + std::to_string(n_r));
    if (n_theta < 2) fail("n_theta", "must be >= 2, got " + std::to_string(n_theta));
    const int min_dp = 2 * std::max(n_r, n_theta) + 1;
    if (dp < min_dp)
        fail("dp", "must be >= 2*max(n_r, n_theta)+1 = " + std::to_string(min_dp) +
                       ", got " + std::to_string(dp));
    if (!(omega >= 0.0 && omega <= 1.0))
        fail("omega", "must lie in [0, 1], got " + std::to_string(omega));
    if (!(ta_max > 0.0)) fail("ta_max_canonical", "must be > 0");
    if (!(tof_0 > 0.0)) fail("tof0_s", "must be > 0");
    if (objective_mode == ObjectiveMode::delta_v && !tof_fixed)
        fail("objective_mode", "delta_v requires a fixed time of flight");
    if (objective_mode == ObjectiveMode::tof && tof_fixed)
        fail("objective_mode", "tof mode requires the time of flight as a decision variable");
    const bool needs_theta_f = final_angle_mode != FinalAngleMode::free;
    if (needs_theta_f && !bcs.theta_f)
        fail("theta_f_deg", "required when final_angle_mode is " +
                                std::string(to_string(final_angle_mode)));
    if (!needs_theta_f && bcs.theta_f)
        fail("theta_f_deg", "must be omitted when final_angle_mode is free");
}

ScenarioConfig parse_scenario(std::string_view text, std::string name) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    std::istringstream in{std::string(text)};
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ScenarioError("scenario parse error: " + std::string(e.message()) + " (line " +
                            std::to_string(e.line()) + ")");
    }

    auto raw = [&](const char* key) -> std::optional<std::string> {
        if (auto v = tree.get_optional<std::string>(key)) return trim(*v);
        return std::nullopt;
    };
    auto number = [&](const char* key) -> std::optional<double> {
        auto v = raw(key);
        if (!v) return std::nullopt;
        try {
            std::size_t used = 0;
            double d = std::stod(*v, &used);
            if (used != v->size()) throw std::invalid_argument(*v);
            return d;
        } catch (const std::exception&) {
            fail(key, "not a number: '" + *v + "'");
        }
    };
    auto required = [&](const char* key) {
        auto v = number(key);
        if (!v) fail(key, "missing");
        return *v;
    };
    auto integer = [&](const char* key) {
        double v = required(key);
        if (v != std::floor(v)) fail(key, "must be an integer");
        return static_cast<int>(v);
    };

    ScenarioConfig cfg;
    cfg.name = std::move(name);
    const double mu_phys = number("mu_km3s2").value_or(kEarthMuKm3s2);
    cfg.units = CanonicalUnits::from_mu(mu_phys, number("du_km").value_or(kEarthRadiusKm));
    const auto& u = cfg.units;
    constexpr double deg = kPi / 180.0;

    auto& b = cfg.bcs;
    b.r_i = to_canonical(required("r_i_km"), UnitKind::distance, u);
    b.theta_i = number("theta_i_deg").value_or(0.0) * deg;
    b.rdot_i = to_canonical(required("rdot_i_kms"), UnitKind::rate, u);
    b.r_f = to_canonical(required("r_f_km"), UnitKind::distance, u);
    b.rdot_f = to_canonical(required("rdot_f_kms"), UnitKind::rate, u);
    if (auto tf = number("theta_f_deg")) b.theta_f = *tf * deg;
    if (!(b.r_i > 0.0)) fail("r_i_km", "must be > 0");
    if (!(b.r_f > 0.0)) fail("r_f_km", "must be > 0");
    // Terminal orbits are circular.
    b.thetadot_i = circular_rate(b.r_i, u.mu_canonical);
    b.thetadot_f = circular_rate(b.r_f, u.mu_canonical);

    cfg.n_r = integer("n_r");
    cfg.n_theta = integer("n_theta");
    cfg.dp = integer("dp");
    cfg.ta_max = required("ta_max_canonical");
    cfg.omega = required("omega");
    cfg.tof_0 = to_canonical(required("tof0_s"), UnitKind::time, u);
    cfg.objective_mode = parse_objective_mode(raw("objective_mode").value_or("none"));
    cfg.final_angle_mode = parse_final_angle_mode(raw("final_angle_mode").value_or("free"));
    cfg.tof_fixed = cfg.objective_mode != ObjectiveMode::tof;
    cfg.validate();
    return cfg;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("cannot open scenario file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str(), path.stem().string());
}

std::string format_scenario(const ScenarioConfig& cfg) {
    const auto& u = cfg.units;
    constexpr double rad = 180.0 / kPi;
    std::ostringstream os;
    os.precision(17);
    os << "r_i_km = " << to_physical(cfg.bcs.r_i, UnitKind::distance, u) << '\n'
       << "theta_i_deg = " << cfg.bcs.theta_i * rad << '\n'
       << "rdot_i_kms = " << to_physical(cfg.bcs.rdot_i, UnitKind::rate, u) << '\n'
       << "r_f_km = " << to_physical(cfg.bcs.r_f, UnitKind::distance, u) << '\n'
       << "rdot_f_kms = " << to_physical(cfg.bcs.rdot_f, UnitKind::rate, u) << '\n';
    if (cfg.bcs.theta_f) os << "theta_f_deg = " << *cfg.bcs.theta_f * rad << '\n';
    os << "n_r = " << cfg.n_r << '\n'
       << "n_theta = " << cfg.n_theta << '\n'
       << "dp = " << cfg.dp << '\n'
       << "ta_max_canonical = " << cfg.ta_max << '\n'
       << "omega = " << cfg.omega << '\n'
       << "tof0_s = " << to_physical(cfg.tof_0, UnitKind::time, u) << '\n'
       << "objective_mode = " << to_string(cfg.objective_mode) << '\n'
       << "final_angle_mode = " << to_string(cfg.final_angle_mode) << '\n'
       << "mu_km3s2 = "
       << to_physical(u.mu_canonical, UnitKind::grav_parameter, u) << '\n'
       << "du_km = " << u.du_km << '\n';
    return os.str();
}

}  // namespace ffsb
