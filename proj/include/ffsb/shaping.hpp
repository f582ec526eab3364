// Finite-Fourier-series shape-based solver: the free coefficients (and
// optionally the time of flight) become the decision vector of a constrained
// NLP whose objective is the weighted dynamics residual.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ffsb/boundary.hpp"
#include "ffsb/dynamics.hpp"
#include "ffsb/fourier.hpp"
#include "ffsb/nlp.hpp"
#include "ffsb/scenario.hpp"

namespace ffsb {

/// Decision vector = [free radius coefficients | free angle coefficients | ToF/ToF0].
struct DecisionLayout {
    int n_free_r = 0;
    int n_free_theta = 0;
    bool has_tof = false;

    int theta_begin() const { return n_free_r; }
    int tof_index() const { return n_free_r + n_free_theta; }
    int dim() const { return n_free_r + n_free_theta + (has_tof ? 1 : 0); }
};

inline constexpr double kTofLowerRatio = 0.1;
inline constexpr double kTofUpperRatio = 2.0;
/// Value reported by thrust_constraints at a singular steering point.
inline constexpr double kSingularPenaltyCap = 1e8;

/// Everything derived from one decision vector on the DP grid.
struct ShapeEvaluation {
    double tof = 0.0;
    std::optional<double> theta_f;
    Eigen::VectorXd coeffs_r;
    Eigen::VectorXd coeffs_theta;
    TrajectoryProfile profile;
    Eigen::VectorXd residual;
    Eigen::VectorXd cos_alpha;
    int singular_points = 0;
    double fsq = 0.0;
};

/**
 * Binds a scenario to its decision layout, basis tables and boundary maps.
 * Cheap to copy; evaluation is const and thread-safe.
 */
class ShapeModel {
public:
    explicit ShapeModel(const ScenarioConfig& cfg);

    const ScenarioConfig& config() const { return cfg_; }
    const DecisionLayout& layout() const { return layout_; }

    double tof_of(const Eigen::VectorXd& x) const;
    std::optional<double> theta_f_of(double tof) const;

    ShapeEvaluation evaluate(const Eigen::VectorXd& x) const;

    Eigen::VectorXd residual_vector(const Eigen::VectorXd& x) const;
    double objective(const Eigen::VectorXd& x) const;
    double objective(const ShapeEvaluation& e) const;
    Eigen::VectorXd thrust_constraints(const Eigen::VectorXd& x) const;
    Eigen::VectorXd thrust_constraints(const ShapeEvaluation& e) const;

    Eigen::VectorXd lower_bounds() const;
    Eigen::VectorXd upper_bounds() const;

    /// Least-squares fit of the free coefficients to a smooth spiral
    /// (smoothstep radius, circular-rate angle) at ToF0.
    Eigen::VectorXd initial_guess() const;

    /// Project a decision vector into the bounds (used for warm starts).
    Eigen::VectorXd clamp(const Eigen::VectorXd& x) const;

private:
    std::pair<CoefficientMap, CoefficientMap> maps_for(double tof) const;

    ScenarioConfig cfg_;
    DecisionLayout layout_;
    FourierBasis basis_r_;
    FourierBasis basis_theta_;
    CoefficientMap map_r_;
    CoefficientMap map_theta_;
};

/// theta_f0 + sqrt(mu / r_f^3) * (tof - ToF0). Throws std::invalid_argument
/// unless the scenario is in rendezvous_sync mode.
double rendezvous_theta_f(double tof, const ScenarioConfig& cfg);

Eigen::VectorXd residual_vector(const Eigen::VectorXd& x, const ScenarioConfig& cfg);
double objective(const Eigen::VectorXd& x, const ScenarioConfig& cfg);
Eigen::VectorXd thrust_constraints(const Eigen::VectorXd& x, const ScenarioConfig& cfg);

struct ShapeSolution {
    Eigen::VectorXd free;
    Eigen::VectorXd coeffs_r;
    Eigen::VectorXd coeffs_theta;
    double tof = 0.0;  // TU
    std::optional<double> theta_f;
    TrajectoryProfile profile;
    double fsq = 0.0;
    double delta_v = 0.0;
    double objective = 0.0;
    double max_abs_ta = 0.0;
    int singular_points = 0;
    NlpResult nlp;
    double elapsed_s = 0.0;
};

struct ShapeOptions {
    NlpOptions nlp = default_nlp_options();
    std::optional<Eigen::VectorXd> warm_start;

    static NlpOptions default_nlp_options();
};

/// Runs the NLP. Non-convergence is reported in nlp.status; the solution is
/// returned either way.
ShapeSolution solve(const ScenarioConfig& cfg, const ShapeOptions& options = {});

/// Rebuild a solution record (profile, FtF, dV, J) from a decision vector.
ShapeSolution assemble_solution(const ShapeModel& model, const Eigen::VectorXd& x);

struct SweepRecord {
    double omega = 0.0;
    double fsq = 0.0;
    double tof_hours = 0.0;
    double delta_v = 0.0;
    std::string status;
};

struct SweepOptions {
    NlpOptions nlp = ShapeOptions::default_nlp_options();
    /// Cold-start every weight on a thread pool instead of warm-starting
    /// sequentially.
    bool parallel = false;
    unsigned threads = 0;  // 0: hardware concurrency
};

/// 0.01, 0.02, ..., 0.99.
std::vector<double> default_sweep_weights();

/// Weights must be strictly increasing within [0, 1] (std::invalid_argument).
std::vector<SweepRecord> sweep(const ScenarioConfig& cfg, const std::vector<double>& omegas,
                               const SweepOptions& options = {});

/// Spearman rank correlation with average ranks for ties.
double spearman(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace ffsb
