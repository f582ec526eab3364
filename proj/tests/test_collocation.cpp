#include <doctest.h>

#include <cmath>

#include "ballistic_arc.hpp"
#include "ffsb/collocation.hpp"

using namespace ffsb;
using Eigen::VectorXd;

namespace {

ScenarioConfig scenario(const char* file) { return load_scenario(std::string(FFSB_SCENARIO_DIR) + "/" + file); }

// Zero-thrust grid sampled from an independent integration of an elliptic coast.
TranscriptionGrid coast_grid(int segments, double e) {
    const double rp = 1.0 - e;
    const double tof = 2.0;
    std::vector<double> t(segments + 1);
    for (int k = 0; k <= segments; ++k) t[k] = tof * k / segments;
    const auto states = testing::odeint_coast({rp, 0.0, 0.0, std::sqrt((1.0 + e) / rp) / rp}, t);
    TranscriptionGrid g;
    g.segments = segments;
    g.tof = tof;
    g.states.resize(segments + 1, 4);
    for (int k = 0; k <= segments; ++k)
        for (int i = 0; i < 4; ++i) g.states(k, i) = states[k][i];
    g.ta = VectorXd::Zero(segments + 1);
    return g;
}

OptimalSolution with_controls(const VectorXd& ta, double ta_max) {
    OptimalSolution s;
    s.ta_max = ta_max;
    s.grid.segments = static_cast<int>(ta.size()) - 1;
    s.grid.ta = ta;
    return s;
}

}  // namespace

TEST_CASE("Hermite-Simpson defects vanish on integrated coasts at fifth order") {
    // Circular orbit: r constant, theta linear; the scheme is exact.
    TranscriptionGrid circ = coast_grid(20, 0.0);
    CHECK(hermite_simpson_defects(circ, 1.0).cwiseAbs().maxCoeff() < 1e-12);

    const double d20 = hermite_simpson_defects(coast_grid(20, 0.3), 1.0).cwiseAbs().maxCoeff();
    const double d40 = hermite_simpson_defects(coast_grid(40, 0.3), 1.0).cwiseAbs().maxCoeff();
    CHECK(d20 < 1e-4);
    // Local error O(h^5): halving h divides the defect by about 32.
    CHECK(d20 / d40 > 20.0);
    CHECK(hermite_simpson_defects(coast_grid(20, 0.3), 1.0).rows() == 20);

    // A wrong control shows up in the velocity defects.
    TranscriptionGrid pushed = coast_grid(20, 0.3);
    pushed.ta.setConstant(0.01);
    CHECK(hermite_simpson_defects(pushed, 1.0).cwiseAbs().maxCoeff() > 1e-4);
}

TEST_CASE("resampling") {
    TranscriptionGrid g;
    g.segments = 4;
    g.tof = 2.0;
    g.states.resize(5, 4);
    g.ta.resize(5);
    for (int k = 0; k <= 4; ++k) {
        g.states.row(k) << 1.0 + k, 2.0 * k, 0.5, -k;
        g.ta(k) = 0.1 * k;
    }
    const TranscriptionGrid same = resample(g, 4);
    CHECK((same.states - g.states).cwiseAbs().maxCoeff() == 0.0);
    CHECK(same.tof == g.tof);

    // Linear data stays linear.
    const TranscriptionGrid fine = resample(g, 8);
    REQUIRE(fine.states.rows() == 9);
    for (int k = 0; k <= 8; ++k) {
        CHECK(fine.states(k, 0) == doctest::Approx(1.0 + 0.5 * k));
        CHECK(fine.ta(k) == doctest::Approx(0.05 * k));
    }
    CHECK(fine.times()(8) == doctest::Approx(2.0));
}

TEST_CASE("saturation and off fractions") {
    const double tm = 0.0102;
    const OptimalSolution off = with_controls(VectorXd::Zero(10), tm);
    CHECK(saturation_fraction(off) == 1.0);
    CHECK(off_fraction(off) == 1.0);
    CHECK_FALSE(bang_off_bang(off));

    VectorXd bang(10);
    bang << tm, tm, tm, tm, tm, -tm, -tm, -tm, tm, tm;
    const OptimalSolution bb = with_controls(bang, tm);
    CHECK(saturation_fraction(bb) == 1.0);
    CHECK(off_fraction(bb) == 0.0);
    CHECK_FALSE(bang_off_bang(bb));

    VectorXd mixed(10);
    mixed << 0.0, 0.0, 0.5 * tm, 0.5 * tm, 0.5 * tm, 0.5 * tm, 0.995 * tm, tm, -tm, 0.0;
    const OptimalSolution m = with_controls(mixed, tm);
    CHECK(saturation_fraction(m) == doctest::Approx(0.6));
    CHECK(off_fraction(m) == doctest::Approx(0.3));
    CHECK(bang_off_bang(m));
}

TEST_CASE("input checks") {
    const ScenarioConfig cfg = scenario("case1_orbit_raising.ini");
    CollocationOptions o;
    o.segments = kMinSegments - 1;
    CHECK_THROWS_AS(solve_min_time(cfg, o), std::invalid_argument);
    o.segments = kMinSegments;
    o.tol_defect = 0.0;
    CHECK_THROWS_AS(solve_min_time(cfg, o), std::invalid_argument);
    o.tol_defect = 1e-7;
    o.effort_weight = -1.0;
    CHECK_THROWS_AS(solve_min_time(cfg, o), std::invalid_argument);
}

TEST_CASE("already on the target orbit: shortest allowed flight, no thrust") {
    ScenarioConfig cfg = scenario("case1_orbit_raising.ini");
    cfg.bcs.r_f = cfg.bcs.r_i;
    cfg.bcs.thetadot_f = cfg.bcs.thetadot_i;
    CollocationOptions o;
    o.segments = kMinSegments;
    const OptimalSolution s = solve_min_time(cfg, o);
    CHECK(s.converged());
    CHECK(s.grid.tof == doctest::Approx(0.1 * cfg.tof_0).epsilon(1e-6));
    CHECK(s.grid.ta.cwiseAbs().maxCoeff() < 1e-3 * cfg.ta_max);
}

TEST_CASE("orbit raising on coarse grids") {
    const ScenarioConfig cfg = scenario("case1_orbit_raising.ini");
    CollocationOptions o;
    o.segments = 20;
    const OptimalSolution s20 = solve_min_time(cfg, o);
    o.segments = 40;
    const OptimalSolution s40 = solve_min_time(cfg, o);

    for (const auto* s : {&s20, &s40}) {
        CHECK(s->converged());
        CHECK(s->defect_norm <= 1e-6);
        CHECK(s->boundary_error <= 1e-8);
        CHECK(s->grid.ta.cwiseAbs().maxCoeff() <= cfg.ta_max * (1.0 + 1e-12));
        CHECK(s->profile.samples.size() == static_cast<std::size_t>(s->grid.segments + 1));
        CHECK(s->tof_hours == doctest::Approx(cfg.tof_hours(s->grid.tof)));
    }
    // Doubling the grid moves the optimum by less than 1%.
    CHECK(std::abs(s40.tof_hours - s20.tof_hours) / s40.tof_hours < 0.01);

    // A converged grid is a good start for a finer one.
    CollocationOptions warm;
    warm.segments = 40;
    warm.initial_guess = s20.grid;
    const OptimalSolution w = solve_min_time(cfg, warm);
    CHECK(w.converged());
    CHECK(std::abs(w.tof_hours - s40.tof_hours) / s40.tof_hours < 0.01);
}
