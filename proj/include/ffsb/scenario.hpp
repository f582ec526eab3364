// Scenario definitions, canonical units and configuration loading.
#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ffsb {

/// Raised for unreadable scenario files and invariant violations.
/// The message always names the offending field.
class ScenarioError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kEarthRadiusKm = 6378.140;
inline constexpr double kEarthMuKm3s2 = 398601.2;

/**
 * Canonical distance/time units. The time unit is derived from the distance
 * unit so that the gravitational parameter is exactly one in DU^3/TU^2.
 */
struct CanonicalUnits {
    double du_km = kEarthRadiusKm;
    double tu_s = 0.0;
    double mu_canonical = 1.0;

    static CanonicalUnits from_mu(double mu_km3s2, double du_km = kEarthRadiusKm);

    double tu_hours() const { return tu_s / 3600.0; }
};

enum class UnitKind {
    distance,         // km      <-> DU
    time,             // s       <-> TU
    rate,             // km/s    <-> DU/TU
    angular_rate,     // rad/s   <-> rad/TU
    acceleration,     // km/s^2  <-> DU/TU^2
    angle,            // rad, unchanged
    grav_parameter,   // km^3/s^2 <-> DU^3/TU^2
};

double to_canonical(double value, UnitKind kind, const CanonicalUnits& units);
double to_physical(double value, UnitKind kind, const CanonicalUnits& units);

/// Circular-orbit angular rate sqrt(mu / r^3). Throws on r <= 0.
double circular_rate(double r, double mu);

/// Endpoint states in canonical units.
struct BoundaryConditions {
    double r_i = 0.0;
    double theta_i = 0.0;
    double rdot_i = 0.0;
    double thetadot_i = 0.0;
    double r_f = 0.0;
    double rdot_f = 0.0;
    double thetadot_f = 0.0;
    std::optional<double> theta_f;
};

enum class ObjectiveMode { none, tof, delta_v };
enum class FinalAngleMode { free, fixed, rendezvous_sync };

std::string_view to_string(ObjectiveMode m);
std::string_view to_string(FinalAngleMode m);
ObjectiveMode parse_objective_mode(std::string_view s);
FinalAngleMode parse_final_angle_mode(std::string_view s);

struct ScenarioConfig {
    std::string name;
    CanonicalUnits units = CanonicalUnits::from_mu(kEarthMuKm3s2);
    BoundaryConditions bcs;
    int n_r = 2;
    int n_theta = 2;
    int dp = 5;
    double ta_max = 0.0102;  // DU/TU^2
    double omega = 0.0;
    double tof_0 = 1.0;      // TU
    ObjectiveMode objective_mode = ObjectiveMode::none;
    FinalAngleMode final_angle_mode = FinalAngleMode::free;
    bool tof_fixed = true;

    double mu() const { return units.mu_canonical; }
    double tof_hours(double tof_tu) const { return tof_tu * units.tu_hours(); }

    /// Throws ScenarioError naming the first violated invariant.
    void validate() const;
};

/// Parse an INI-style `key = value` scenario file (physical units) into a
/// validated canonical configuration.
ScenarioConfig load_scenario(const std::filesystem::path& path);
ScenarioConfig parse_scenario(std::string_view text, std::string name = {});

/// Physical-unit echo of a configuration in the same key = value format.
std::string format_scenario(const ScenarioConfig& cfg);

}  // namespace ffsb
