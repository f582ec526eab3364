#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "ffsb/nlp.hpp"

using namespace ffsb;
using Eigen::VectorXd;

namespace {

NlpProblem box_problem(int dim, ScalarFunction f, VectorXd x0, double lo = -1e6, double hi = 1e6) {
    NlpProblem p;
    p.dim = dim;
    p.objective = std::move(f);
    p.x0 = std::move(x0);
    p.lower = VectorXd::Constant(dim, lo);
    p.upper = VectorXd::Constant(dim, hi);
    return p;
}

double rosenbrock(const VectorXd& x) {
    return 100.0 * std::pow(x(1) - x(0) * x(0), 2) + std::pow(1.0 - x(0), 2);
}

}  // namespace

TEST_CASE("finite-difference gradient") {
    const VectorXd g = gradient([](const VectorXd& x) { return x.squaredNorm(); }, VectorXd::LinSpaced(2, 1, 2));
    CHECK(g(0) == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(g(1) == doctest::Approx(4.0).epsilon(1e-6));

    const VectorXd z = gradient([](const VectorXd&) { return 3.0; }, VectorXd::Ones(4));
    CHECK(z.cwiseAbs().maxCoeff() == 0.0);

    std::mt19937_64 rng(59);
    std::normal_distribution<double> nd;
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 2 + trial % 7;
        Eigen::MatrixXd A(n, n);
        VectorXd b(n), x(n);
        for (auto& a : A.reshaped()) a = nd(rng);
        for (auto& v : b) v = nd(rng);
        for (auto& v : x) v = 3.0 * nd(rng);
        const Eigen::MatrixXd Q = A.transpose() * A;
        auto f = [&](const VectorXd& y) { return 0.5 * y.dot(Q * y) + b.dot(y); };
        worst = std::max(worst, (gradient(f, x) - (Q * x + b)).cwiseAbs().maxCoeff());
    }
    CHECK(worst < 1e-5);

    CHECK_THROWS_AS(gradient([](const VectorXd& x) { return x(0) > 1.0 ? NAN : 0.0; }, VectorXd::Ones(1)),
                    std::domain_error);
}

TEST_CASE("active lower constraint: min x^2 s.t. x >= 1") {
    auto p = box_problem(1, [](const VectorXd& x) { return x(0) * x(0); }, VectorXd::Constant(1, 3.0));
    p.inequalities = [](const VectorXd& x) { return VectorXd::Constant(1, 1.0 - x(0)); };
    const auto r = minimize(p);
    CHECK(r.converged());
    CHECK(std::abs(r.x_star(0) - 1.0) < 1e-6);
    CHECK(r.max_violation <= 1e-6);
}

TEST_CASE("unconstrained Rosenbrock") {
    auto p = box_problem(2, rosenbrock, (VectorXd(2) << -1.2, 1.0).finished());
    const auto r = minimize(p);
    CHECK(r.converged());
    CHECK(std::abs(r.x_star(0) - 1.0) < 1e-4);
    CHECK(std::abs(r.x_star(1) - 1.0) < 1e-4);
}

TEST_CASE("active upper constraint carries a positive multiplier") {
    auto p = box_problem(1, [](const VectorXd& x) { return std::pow(x(0) - 2.0, 2); }, VectorXd::Zero(1));
    p.inequalities = [](const VectorXd& x) { return VectorXd::Constant(1, x(0) - 1.0); };
    const auto r = minimize(p);
    CHECK(r.converged());
    CHECK(std::abs(r.x_star(0) - 1.0) < 1e-6);
    CHECK(r.multipliers(0) > 0.0);
    CHECK(r.multipliers(0) == doctest::Approx(2.0).epsilon(1e-3));
}

TEST_CASE("linear constraint with bounds") {
    auto p = box_problem(2, [](const VectorXd& x) { return std::pow(x(0) - 3, 2) + std::pow(x(1) - 2, 2); },
                         VectorXd::Zero(2), 0.0, 10.0);
    p.inequalities = [](const VectorXd& x) { return VectorXd::Constant(1, x(0) + x(1) - 4.0); };
    const auto r = minimize(p);
    CHECK(r.converged());
    CHECK(r.x_star(0) == doctest::Approx(2.5).epsilon(1e-5));
    CHECK(r.x_star(1) == doctest::Approx(1.5).epsilon(1e-5));
}

TEST_CASE("bound-constrained minimum sits on the bound") {
    auto p = box_problem(3, [](const VectorXd& x) { return x.sum() + 0.1 * x.squaredNorm(); },
                         VectorXd::Ones(3), -3.0, 5.0);
    const auto r = minimize(p);
    CHECK(r.converged());
    for (int i = 0; i < 3; ++i) CHECK(r.x_star(i) == doctest::Approx(-3.0));
}

TEST_CASE("merit never increases across accepted inner iterations") {
    auto p = box_problem(2, rosenbrock, (VectorXd(2) << -1.2, 1.0).finished());
    p.inequalities = [](const VectorXd& x) {
        return (VectorXd(2) << x.squaredNorm() - 1.5, -x(0) - 0.5).finished();
    };
    const auto r = minimize(p);
    CHECK(r.converged());
    REQUIRE(r.history.size() > 2);
    for (std::size_t k = 1; k < r.history.size(); ++k)
        if (r.history[k].outer == r.history[k - 1].outer) CHECK(r.history[k].merit <= r.history[k - 1].merit);
}

TEST_CASE("feasible start with a strictly feasible minimum") {
    auto p = box_problem(2, [](const VectorXd& x) { return std::pow(x(0) - 1, 2) + std::pow(x(1) - 2, 2); },
                         VectorXd::Zero(2));
    p.inequalities = [](const VectorXd& x) { return VectorXd::Constant(1, x.squaredNorm() - 25.0); };
    const auto r = minimize(p);
    CHECK(r.converged());
    CHECK(r.max_violation <= 1e-6);
    CHECK(r.x_star(0) == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(r.x_star(1) == doctest::Approx(2.0).epsilon(1e-5));
}

TEST_CASE("nonlinear inequalities: circle-constrained Rosenbrock") {
    auto p = box_problem(2, rosenbrock, VectorXd::Zero(2));
    p.inequalities = [](const VectorXd& x) { return VectorXd::Constant(1, x.squaredNorm() - 1.0); };
    const auto r = minimize(p);
    CHECK(r.converged());
    // Known optimum on the unit circle.
    CHECK(r.x_star(0) == doctest::Approx(0.7864).epsilon(1e-3));
    CHECK(r.x_star(1) == doctest::Approx(0.6177).epsilon(1e-3));
}

TEST_CASE("analytic derivatives reproduce the finite-difference path") {
    auto p = box_problem(2, rosenbrock, VectorXd::Zero(2));
    p.inequalities = [](const VectorXd& x) { return VectorXd::Constant(1, x.squaredNorm() - 1.0); };
    const auto fd = minimize(p);

    p.objective_gradient = [](const VectorXd& x) {
        VectorXd g(2);
        g(0) = -400.0 * x(0) * (x(1) - x(0) * x(0)) - 2.0 * (1.0 - x(0));
        g(1) = 200.0 * (x(1) - x(0) * x(0));
        return g;
    };
    p.inequality_jacobian = [](const VectorXd& x) {
        Eigen::SparseMatrix<double> J(1, 2);
        J.insert(0, 0) = 2 * x(0);
        J.insert(0, 1) = 2 * x(1);
        return J;
    };
    const auto an = minimize(p);
    CHECK(an.converged());
    CHECK((an.x_star - fd.x_star).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("identical problems give bitwise identical results") {
    auto make = [] {
        auto p = box_problem(2, rosenbrock, (VectorXd(2) << -1.2, 1.0).finished());
        p.inequalities = [](const VectorXd& x) { return VectorXd::Constant(1, x(0) + x(1) - 1.5); };
        return p;
    };
    const auto a = minimize(make()), b = minimize(make());
    CHECK(a.x_star == b.x_star);
    CHECK(a.f_star == b.f_star);
    CHECK(a.iterations == b.iterations);
}

TEST_CASE("iteration caps surface through status") {
    auto p = box_problem(2, rosenbrock, (VectorXd(2) << -1.2, 1.0).finished());
    NlpOptions o;
    o.max_inner = 3;
    o.max_outer = 1;
    const auto r = minimize(p, o);
    CHECK_FALSE(r.converged());
    CHECK(r.iterations <= 3);
}

TEST_CASE("iteration log and problem validation") {
    auto p = box_problem(1, [](const VectorXd& x) { return x(0) * x(0); }, VectorXd::Constant(1, 3.0));
    const auto r = minimize(p);
    std::ostringstream os;
    write_iteration_log(os, r);
    CHECK(os.str().rfind("iter,f,max_violation,step_norm\n", 0) == 0);

    p.x0(0) = 2e6;
    CHECK_THROWS_AS(minimize(p), std::invalid_argument);
    p.x0 = VectorXd::Zero(2);
    CHECK_THROWS_AS(minimize(p), std::invalid_argument);
}
