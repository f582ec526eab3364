// Bound- and inequality-constrained smooth minimization.
//
// Augmented Lagrangian outer loop over the inequality multipliers, with a
// projected BFGS inner solver (backtracking Armijo line search, active-set
// handling of variable bounds). Gradients default to central differences.
#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace ffsb {

using ScalarFunction = std::function<double(const Eigen::VectorXd&)>;
using VectorFunction = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using SparseJacobianFunction = std::function<Eigen::SparseMatrix<double>(const Eigen::VectorXd&)>;
/// Objective and inequalities from one pass: returns f, fills g.
using CombinedFunction = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

/// Inequalities are feasible when <= 0.
struct NlpProblem {
    int dim = 0;
    ScalarFunction objective;
    VectorFunction inequalities;  // may be empty
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
    Eigen::VectorXd x0;

    // Optional accelerators; never change the mathematical problem.
    CombinedFunction combined;
    VectorFunction objective_gradient;
    SparseJacobianFunction inequality_jacobian;
};

struct NlpOptions {
    double tol_con = 1e-6;
    double tol_obj = 1e-9;
    double tol_grad = 1e-10;
    double initial_penalty = 10.0;
    double penalty_growth = 10.0;
    double max_penalty = 1e12;
    double multiplier_cap = 1e8;
    int max_inner = 500;
    int max_outer = 50;
    bool record_history = true;
    /// With an inequality Jacobian, start BFGS (and restart it after a failed
    /// search direction) from the inverse Gauss-Newton curvature of the penalty.
    bool jacobian_seeding = true;
};

enum class NlpStatus { converged, max_iter, line_search_failure };
const char* to_string(NlpStatus s);

struct IterationRecord {
    int iteration = 0;  // global inner-iteration counter
    int outer = 0;
    double merit = 0.0;
    double f = 0.0;
    double max_violation = 0.0;
    double step_norm = 0.0;
};

struct NlpResult {
    Eigen::VectorXd x_star;
    double f_star = 0.0;
    double max_violation = 0.0;
    int iterations = 0;
    int outer_iterations = 0;
    NlpStatus status = NlpStatus::max_iter;
    Eigen::VectorXd multipliers;
    double penalty = 0.0;
    std::vector<IterationRecord> history;

    bool converged() const { return status == NlpStatus::converged; }
};

/// Central-difference gradient with step max(1e-7, 1e-7*|x_i|).
/// Throws std::domain_error on a non-finite evaluation.
Eigen::VectorXd gradient(const ScalarFunction& f, const Eigen::VectorXd& x);

/// Problem errors (dimension mismatch, x0 outside bounds) throw
/// std::invalid_argument; solver failures are reported through status.
NlpResult minimize(const NlpProblem& problem, const NlpOptions& options = {});

/// CSV rows `iter,f,max_violation,step_norm`.
void write_iteration_log(std::ostream& os, const NlpResult& result);

}  // namespace ffsb
