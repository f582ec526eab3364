// Minimum-time transfer by Hermite-Simpson direct collocation, solved with the
// same inequality-only NLP core as the shaping method.
#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "ffsb/dynamics.hpp"
#include "ffsb/nlp.hpp"
#include "ffsb/scenario.hpp"

namespace ffsb {

inline constexpr int kDefaultSegments = 80;
inline constexpr int kMinSegments = 20;

/// Node values on tau in [0, 1]; node k sits at t = tof * k / segments.
struct TranscriptionGrid {
    int segments = 0;
    Eigen::MatrixXd states;  // (segments+1) x 4: r, theta, rdot, thetadot
    Eigen::VectorXd ta;      // signed thrust acceleration per node
    double tof = 0.0;        // TU

    Eigen::VectorXd times() const;
};

/// Linear interpolation of a grid onto a different segment count.
TranscriptionGrid resample(const TranscriptionGrid& grid, int segments);

enum class CollocationGuess {
    propagated,  // coast, then full thrust to the final radius
    linear,      // straight line between the boundary conditions, zero control
};

struct CollocationOptions {
    int segments = kDefaultSegments;
    double tol_defect = 1e-7;
    NlpOptions nlp = default_nlp_options();
    /// Built-in starting point, used when `initial_guess` is empty.
    CollocationGuess guess = CollocationGuess::propagated;
    /// Objective is tof/tof_0 + effort_weight * mean((ta/ta_max)^2).
    double effort_weight = 3e-2;
    /// Without an explicit starting point, solve on kMinSegments first and
    /// refine from that solution.
    bool coarse_start = true;
    /// Explicit starting point; resampled to `segments`.
    std::optional<TranscriptionGrid> initial_guess;

    static NlpOptions default_nlp_options();
};

struct OptimalSolution {
    TranscriptionGrid grid;
    double tof_hours = 0.0;
    double ta_max = 0.0;
    double theta_f_target = 0.0;  // coupling target (rendezvous) or reached angle
    TrajectoryProfile profile;    // nodes with accelerations from the dynamics
    double defect_norm = 0.0;     // max |defect| over segments and components
    double boundary_error = 0.0;  // max |node - boundary condition|
    NlpResult nlp;
    double elapsed_s = 0.0;

    bool converged() const { return nlp.converged(); }
};

/// Requires segments >= kMinSegments (std::invalid_argument). The final angle
/// is free for orbit raising and coupled to the target's motion otherwise.
OptimalSolution solve_min_time(const ScenarioConfig& cfg, const CollocationOptions& options = {});

/// Hermite-Simpson defects of a grid: segments x 4, physical units.
Eigen::MatrixXd hermite_simpson_defects(const TranscriptionGrid& grid, double mu);

/// Fraction of nodes with |ta| >= 0.99 ta_max or |ta| <= 0.01 ta_max.
double saturation_fraction(const OptimalSolution& sol);
/// Fraction of nodes with |ta| <= 0.01 ta_max.
double off_fraction(const OptimalSolution& sol);
/// Off arc on at least 10% of the nodes and at least one saturated node.
bool bang_off_bang(const OptimalSolution& sol);

}  // namespace ffsb
