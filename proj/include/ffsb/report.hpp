// Output artifacts: trajectory/sweep CSVs, key = value summaries and run
// manifests, plus the readers the validate and compare commands rely on.
#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ffsb/collocation.hpp"
#include "ffsb/dynamics.hpp"
#include "ffsb/propagation.hpp"
#include "ffsb/scenario.hpp"
#include "ffsb/shaping.hpp"

namespace ffsb {

/// Unreadable or malformed artifact; the message names the file or field.
class ReportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr const char* kTrajectoryHeader = "t,r,theta,rdot,thetadot,ta,alpha";
inline constexpr const char* kThrustHeader = "t,ta,alpha";
inline constexpr const char* kDenseHeader = "t,r,theta,rdot,thetadot";
inline constexpr const char* kSweepHeader = "omega,fsq,tof_hours,delta_v,status";

void write_trajectory_csv(std::ostream& os, const TrajectoryProfile& profile);
void write_thrust_csv(std::ostream& os, const TrajectoryProfile& profile);
void write_dense_csv(std::ostream& os, const std::vector<DenseState>& states);
void write_sweep_csv(std::ostream& os, const std::vector<SweepRecord>& records);

/// Accelerations are not stored in the CSV and come back as zero.
TrajectoryProfile read_trajectory_csv(std::istream& is);
std::vector<DenseState> read_dense_csv(std::istream& is);
std::vector<SweepRecord> read_sweep_csv(std::istream& is);

/// Ordered `key = value` block. Numbers are written with round-trip
/// precision; vectors as space-separated numbers.
class Summary {
public:
    void set(const std::string& key, const std::string& value);
    void set(const std::string& key, const char* value) { set(key, std::string(value)); }
    void set(const std::string& key, double value);
    void set(const std::string& key, int value);
    void set(const std::string& key, bool value);
    void set(const std::string& key, const Eigen::VectorXd& value);

    bool has(const std::string& key) const;
    /// Throw ReportError when the key is missing or does not parse.
    const std::string& text(const std::string& key) const;
    double number(const std::string& key) const;
    Eigen::VectorXd vector(const std::string& key) const;

    const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

    void write(std::ostream& os) const;
    static Summary parse(std::istream& is);

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

Summary summarize(const ShapeSolution& sol, const ScenarioConfig& cfg);
Summary summarize(const OptimalSolution& sol, const ScenarioConfig& cfg);
Summary summarize(const PropagationReport& report, const FeasibilityLimits& limits = {});

/// Rebuild a shaping solution from the `free` vector of its summary.
ShapeSolution restore_solution(const Summary& summary, const ScenarioConfig& cfg);

Summary read_summary(const std::filesystem::path& path);

/// Write to a sibling temporary file, then rename over the target.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

struct RunManifest {
    std::string command;
    std::string scenario_path;
    std::string config_echo;
    std::vector<std::string> outputs;
    double wall_time_s = 0.0;
    std::string version = FFSB_VERSION;
};

std::string to_json(const RunManifest& manifest);

}  // namespace ffsb
