#include <doctest.h>

#include <array>
#include <cmath>
#include <random>

#include <boost/numeric/odeint.hpp>

#include "ffsb/dynamics.hpp"
#include "ffsb/scenario.hpp"

using namespace ffsb;

namespace {

using State = std::array<double, 4>;  // r, theta, rdot, thetadot

// Ballistic polar two-body flow, mu = 1.
void kepler_rhs(const State& y, State& dy, double) {
    dy[0] = y[2];
    dy[1] = y[3];
    dy[2] = y[0] * y[3] * y[3] - 1.0 / (y[0] * y[0]);
    dy[3] = -2.0 * y[2] * y[3] / y[0];
}

// Samples along an elliptic arc; accelerations come from a five-point
// difference of the integrated rates, not from the equations of motion.
std::vector<StateSample> ballistic_samples(double e, int count) {
    namespace odeint = boost::numeric::odeint;
    auto stepper = odeint::make_dense_output(1e-14, 1e-14, odeint::runge_kutta_dopri5<State>());
    const double rp = 1.2;
    State y{rp, 0.0, 0.0, std::sqrt((1.0 + e) / rp) / rp};
    const double h = 1e-3;
    std::vector<double> times;
    for (int k = 0; k < count; ++k) {
        const double tc = 0.5 + 0.37 * k;
        for (int j = -2; j <= 2; ++j) times.push_back(tc + j * h);
    }
    std::vector<State> states;
    odeint::integrate_times(stepper, kepler_rhs, y, times.begin(), times.end(), 1e-3,
                            [&](const State& s, double) { states.push_back(s); });
    std::vector<StateSample> out;
    for (int k = 0; k < count; ++k) {
        const State* w = &states[5 * k];
        auto d5 = [&](int idx) {
            return (w[0][idx] - 8 * w[1][idx] + 8 * w[3][idx] - w[4][idx]) / (12 * h);
        };
        const State& c = w[2];
        out.push_back({times[5 * k + 2], c[0], c[1], c[2], c[3], d5(2), d5(3)});
    }
    return out;
}

// Random state with thrust along the flight path: pick thetaddot freely and
// solve the combined equation for rddot.
StateSample random_consistent_state(std::mt19937_64& rng, double mu) {
    std::uniform_real_distribution<double> ur(0.8, 7.0), urd(-0.2, 0.3), uthd(0.05, 1.1), uthdd(-0.01, 0.01);
    StateSample s;
    s.r = ur(rng);
    s.rdot = urd(rng);
    s.thetadot = uthd(rng);
    s.thetaddot = uthdd(rng);
    const double rtd = s.r * s.thetadot;
    s.rddot = (s.r * s.r * s.rdot * s.thetaddot - s.thetadot * (mu - 2 * s.r * s.rdot * s.rdot) + rtd * rtd * rtd) /
              (s.r * s.r * s.thetadot);
    return s;
}

}  // namespace

TEST_CASE("residual trivial cases") {
    CHECK(eom_residual({0, 1.0, 0, 0, 1.0, 0, 0}, 1.0) == 0.0);
    CHECK(eom_residual({0, 1.0, 0, 0, 0.0, 0, 0}, 1.0) == 0.0);
    CHECK(eom_residual({0, 4.0, 0, 0, 0.125, 0, 0}, 1.0) == doctest::Approx(0.0));
}

TEST_CASE("residual vanishes along an integrated Keplerian ellipse") {
    for (double e : {0.0, 0.1, 0.5}) {
        for (const auto& s : ballistic_samples(e, 40)) {
            CHECK(std::abs(eom_residual(s, 1.0)) < 1e-8);
            const auto th = thrust_accel(s);
            CHECK(std::abs(th.ta) < 1e-8);
        }
    }
}

TEST_CASE("steering angle") {
    CHECK(steering_angle({0, 1.0, 0, 0.0, 1.0}, 0) == 0.0);
    CHECK(steering_angle({0, 2.0, 0, 1.0, 0.5}, 0) == doctest::Approx(kPi / 4));
    CHECK(steering_angle({0, 1.0, 0, 0.0, 1.0}, 1) == doctest::Approx(kPi));
    CHECK_THROWS_AS(steering_angle({3.0, 1.0, 0, 0.0, 0.0}, 0), SingularSteeringError);

    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(-2.0, 2.0), ur(0.5, 5.0);
    for (int i = 0; i < 500; ++i) {
        StateSample s{0, ur(rng), 0, u(rng), u(rng)};
        for (int branch : {0, 1}) {
            const double a = steering_angle(s, branch);
            CHECK(a > -kPi);
            CHECK(a <= kPi);
            CHECK(std::tan(a) == doctest::Approx(s.rdot / (s.r * s.thetadot)).epsilon(1e-12));
        }
    }
}

TEST_CASE("thrust acceleration") {
    SUBCASE("coasting circular orbit") {
        const StateSample s{0, 2.0, 0, 0, std::pow(2.0, -1.5), 0, 0};
        CHECK(thrust_accel(s).ta == doctest::Approx(0.0));
    }
    SUBCASE("zero-residual states satisfy the radial equation") {
        std::mt19937_64 rng(43);
        for (int i = 0; i < 1000; ++i) {
            const auto s = random_consistent_state(rng, 1.0);
            REQUIRE(std::abs(eom_residual(s, 1.0)) < 1e-12);
            CHECK(std::abs(radial_residual(s, thrust_accel(s), 1.0)) < 1e-10);
        }
    }
    SUBCASE("radial flight is singular") {
        const StateSample s{12.5, 2.0, 0, 0.3, 0.0, 0, 0.01};
        try {
            thrust_accel(s);
            FAIL("expected SingularSteeringError");
        } catch (const SingularSteeringError& e) {
            CHECK(e.time() == 12.5);
        }
        CHECK(thrust_components(s).singular);
    }
}

TEST_CASE("zero residual survives a change of distance unit") {
    std::mt19937_64 rng(47);
    for (int i = 0; i < 200; ++i) {
        const auto s = random_consistent_state(rng, 1.0);
        for (double k : {0.5, 2.0, 6.6}) {
            const double tk = std::pow(k, 1.5);
            StateSample p = s;
            p.r = s.r / k;
            p.rdot = s.rdot * tk / k;
            p.thetadot = s.thetadot * tk;
            p.rddot = s.rddot * tk * tk / k;
            p.thetaddot = s.thetaddot * tk * tk;
            const double scale = std::pow(p.r, 3) * std::pow(p.thetadot, 3) + p.thetadot;
            CHECK(std::abs(eom_residual(p, 1.0)) < 1e-12 * scale);
        }
    }
}

TEST_CASE("delta-v quadrature") {
    auto profile_with = [](int n, double tof, auto ta_of) {
        TrajectoryProfile p;
        p.tof = tof;
        for (int k = 0; k < n; ++k) {
            const double t = tof * k / (n - 1);
            p.samples.push_back({t});
            p.thrust.push_back({t, ta_of(t), 0.0});
        }
        return p;
    };
    CHECK(delta_v(profile_with(50, 10.0, [](double) { return 0.0; })) == 0.0);
    CHECK(delta_v(profile_with(50, 100.0, [](double t) { return t < 50 ? 0.01 : -0.01; })) ==
          doctest::Approx(1.0));
    CHECK(std::abs(delta_v(profile_with(160, kPi, [](double t) { return -std::sin(t); })) - 2.0) < 1e-4);

    std::mt19937_64 rng(53);
    std::uniform_real_distribution<double> u(-0.02, 0.02), grow(1.0, 1.5);
    for (int i = 0; i < 50; ++i) {
        auto small = profile_with(40, 20.0, [&](double) { return u(rng); });
        auto big = small;
        for (auto& th : big.thrust) th.ta *= grow(rng) * (th.ta < 0 ? -1 : 1);
        CHECK(delta_v(big) >= delta_v(small));
    }
}

TEST_CASE("polar right-hand side reduces to Kepler without thrust") {
    const auto d = polar_rhs(2.0, 0.1, 0.3, 0.0, 0.2, 1.0);
    CHECK(d.rddot == doctest::Approx(2.0 * 0.09 - 0.25));
    CHECK(d.thetaddot == doctest::Approx(-2.0 * 0.1 * 0.3 / 2.0));
}
