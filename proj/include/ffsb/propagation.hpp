// Open-loop propagation of a shaped solution through the full polar
// equations of motion, and comparison against the shaped trajectory.
#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "ffsb/dynamics.hpp"
#include "ffsb/scenario.hpp"
#include "ffsb/shaping.hpp"

namespace ffsb {

class PropagationError : public std::runtime_error {
public:
    PropagationError(const std::string& what, double t) : std::runtime_error(what), t_(t) {}
    double time() const { return t_; }

private:
    double t_;
};

struct OdeTolerance {
    double rel = 1e-10;
    double abs = 1e-12;
};

using OdeRhs = std::function<void(double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy)>;
/// Called after every accepted step; return false to abort with PropagationError.
using OdeGuard = std::function<bool(double t, const Eigen::VectorXd& y)>;

struct OdeSolution {
    std::vector<double> times;
    std::vector<Eigen::VectorXd> states;
    int steps = 0;
    int rejected = 0;
};

/**
 * Dormand-Prince 5(4) with a PI step-size controller. Steps are shortened so
 * that every requested output time (ascending, within [t0, t1]) is hit
 * exactly; t1 is always the last output.
 */
OdeSolution integrate(const OdeRhs& rhs, const Eigen::VectorXd& y0, double t0, double t1,
                      const std::vector<double>& output_times, const OdeTolerance& tol = {},
                      const OdeGuard& guard = {});

struct DenseState {
    double t = 0.0;
    double r = 0.0;
    double theta = 0.0;
    double rdot = 0.0;
    double thetadot = 0.0;
};

struct ProfileDeviation {
    double max_radial = 0.0;
    double mean_radial = 0.0;
    double max_angular = 0.0;  // rad
    double mean_angular = 0.0;
    double final_radial = 0.0;  // integrated - shaped at the last grid time
    double final_angular = 0.0;
};

/// Samples the integrated states at the shaped grid times (cubic Hermite in
/// r and theta using their rates) and reports absolute deviations. Throws
/// std::invalid_argument when the shaped span leaves the integrated span.
ProfileDeviation compare_profiles(const TrajectoryProfile& shaped, const std::vector<DenseState>& integrated);

struct PropagationReport {
    std::vector<DenseState> trajectory;  // on the shaped grid
    Eigen::Vector4d final_state_error = Eigen::Vector4d::Zero();  // (r, theta, rdot, thetadot)
    double max_path_deviation = 0.0;                              // max |r_int - r_shaped|, DU
    ProfileDeviation deviation;
    double final_radius_error_rel = 0.0;
    double final_angle_error_deg = 0.0;
    int steps_taken = 0;
    int rejected_steps = 0;
};

/// Integrates from the shaped initial state with (ta, alpha)(t) evaluated
/// from the Fourier coefficients at every stage time.
PropagationReport integrate_open_loop(const ShapeSolution& sol, const ScenarioConfig& cfg,
                                      const OdeTolerance& tol = {});

struct FeasibilityLimits {
    double radius_rel = 0.02;
    double angle_deg = 5.0;
};

bool is_feasible(const PropagationReport& report, const FeasibilityLimits& limits = {});

}  // namespace ffsb
