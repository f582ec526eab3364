// Reproduction contract: one PASS/FAIL line per acceptance criterion.
// Exit status is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "ffsb/boundary.hpp"
#include "ffsb/collocation.hpp"
#include "ffsb/dynamics.hpp"
#include "ffsb/fourier.hpp"
#include "ffsb/nlp.hpp"
#include "ffsb/propagation.hpp"
#include "ffsb/scenario.hpp"
#include "ffsb/shaping.hpp"

using namespace ffsb;
using Eigen::VectorXd;

namespace {

ScenarioConfig scenario(const char* file) { return load_scenario(std::string(FFSB_SCENARIO_DIR) + "/" + file); }

bool within(double value, double target, double rel) { return std::abs(value - target) <= rel * target; }

struct Outcome {
    bool pass;
    std::string detail;
};

// Shaped solve at the scenario weight plus its omega = 0 reference.
struct PenaltyRun {
    ShapeSolution base, pen;
    double base_h, pen_h, reduction, slowest_s;
};

PenaltyRun penalty_run(const ScenarioConfig& cfg) {
    ScenarioConfig zero = cfg;
    zero.omega = 0.0;
    PenaltyRun r;
    r.base = solve(zero);
    r.pen = solve(cfg);
    r.base_h = cfg.tof_hours(r.base.tof);
    r.pen_h = cfg.tof_hours(r.pen.tof);
    r.reduction = 100.0 * (r.base_h - r.pen_h) / r.base_h;
    r.slowest_s = std::max(r.base.elapsed_s, r.pen.elapsed_s);
    return r;
}

Outcome criterion1() {
    const auto r = penalty_run(scenario("case2_orbit_raising.ini"));
    const bool ok = r.base.nlp.converged() && r.pen.nlp.converged() && within(r.base_h, 33.24, 0.10) &&
                    r.reduction >= 25.0 && r.slowest_s <= 120.0;
    return {ok, fmt::format("Case 2: unpenalized {:.2f} h (33.24 +-10%), penalized {:.2f} h, reduction {:.2f}% "
                            "(>= 25), slowest solve {:.2f} s",
                            r.base_h, r.pen_h, r.reduction, r.slowest_s)};
}

Outcome criterion2() {
    const auto r = penalty_run(scenario("case3_orbit_raising.ini"));
    const bool ok = r.pen.nlp.converged() && r.reduction >= 35.0 && within(r.pen_h, 17.91, 0.15);
    return {ok, fmt::format("Case 3: unpenalized {:.2f} h, penalized {:.2f} h (17.91 +-15%), reduction {:.2f}% (>= 35)",
                            r.base_h, r.pen_h, r.reduction)};
}

Outcome criterion3() {
    const ScenarioConfig cfg = scenario("case4_rendezvous.ini");
    const auto r = penalty_run(cfg);
    double peak = 0.0;
    for (const auto& u : r.pen.profile.thrust) peak = std::max(peak, std::abs(u.ta));
    const bool ok = r.pen.nlp.converged() && r.reduction >= 28.0 && peak <= 0.0102 + 1e-6;
    return {ok, fmt::format("Case 4: unpenalized {:.2f} h, penalized {:.2f} h, reduction {:.2f}% (>= 28), "
                            "max |Ta| {:.7f} (<= 0.0102 + 1e-6)",
                            r.base_h, r.pen_h, r.reduction, peak)};
}

Outcome criterion4() {
    const ScenarioConfig cfg = scenario("dv_rendezvous.ini");
    ScenarioConfig zero = cfg;
    zero.omega = 0.0;
    const ShapeSolution a = solve(zero), b = solve(cfg);
    const bool ok = a.fsq <= 1e-3 && within(a.delta_v, 0.59494, 0.05) && b.delta_v < a.delta_v;
    return {ok, fmt::format("dV rendezvous: omega=0 FtF {:.3e} (<= 1e-3), dV {:.5f} (0.59494 +-5%); "
                            "omega={} dV {:.5f} (< {:.5f})",
                            a.fsq, a.delta_v, cfg.omega, b.delta_v, a.delta_v)};
}

Outcome criterion5() {
    const ScenarioConfig cfg = scenario("case1_orbit_raising.ini");
    const auto start = std::chrono::steady_clock::now();
    const auto w = default_sweep_weights();
    const auto rec = sweep(cfg, w);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::vector<double> fsq;
    int converged = 0;
    for (const auto& r : rec) {
        fsq.push_back(r.fsq);
        converged += r.status == "converged";
    }
    const double rho = spearman(w, fsq);
    const bool ok = rec.size() == 99 && rho >= 0.9 && rec.back().tof_hours <= rec.front().tof_hours && secs <= 1800.0;
    return {ok, fmt::format("Case 1 sweep: {} weights ({} converged), Spearman {:.4f} (>= 0.9), ToF {:.2f} h at 0.01 -> "
                            "{:.2f} h at 0.99, {:.1f} s",
                            rec.size(), converged, rho, rec.front().tof_hours, rec.back().tof_hours, secs)};
}

Outcome criterion6() {
    const OptimalSolution orbit = solve_min_time(scenario("case1_orbit_raising.ini"));
    const OptimalSolution rdv = solve_min_time(scenario("case4_rendezvous.ini"));
    const double sat = saturation_fraction(orbit), off = off_fraction(rdv);
    const bool ok_orbit = orbit.converged() && within(orbit.tof_hours, 17.38, 0.10) && sat >= 0.8;
    const bool ok_rdv = rdv.converged() && within(rdv.tof_hours, 22.08, 0.12) && off >= 0.10;
    return {ok_orbit && ok_rdv,
            fmt::format("min time: orbit raising {:.2f} h (17.38 +-10%), saturation {:.3f} (>= 0.8) [{}]; rendezvous "
                        "{:.2f} h (22.08 +-12%), off-arc {:.3f} of nodes (>= 0.10) [{}]",
                        orbit.tof_hours, sat, ok_orbit ? "ok" : "not met", rdv.tof_hours, off,
                        ok_rdv ? "ok" : "not met")};
}

Outcome criterion7() {
    std::string detail;
    bool ok = true;
    for (const char* f : {"case2_orbit_raising.ini", "case4_rendezvous.ini"}) {
        const ScenarioConfig cfg = scenario(f);
        const ShapeSolution sol = solve(cfg);
        const PropagationReport rep = integrate_open_loop(sol, cfg);
        ok = ok && rep.final_radius_error_rel < 0.02 && rep.final_angle_error_deg < 5.0;
        detail += fmt::format("{}: radius error {:.3f}% angle error {:.2f} deg; ", cfg.name,
                              100.0 * rep.final_radius_error_rel, rep.final_angle_error_deg);
    }
    // Ballistic conservation on an e = 0.3 coast.
    auto coast = [](double, const VectorXd& y, VectorXd& dy) {
        dy.resize(4);
        dy << y(2), y(3), y(0) * y(3) * y(3) - 1.0 / (y(0) * y(0)), -2.0 * y(2) * y(3) / y(0);
    };
    VectorXd y0(4);
    const double e = 0.3, rp = 1.0 - e;
    y0 << rp, 0.0, 0.0, std::sqrt((1.0 + e) / rp) / rp;
    std::vector<double> out;
    for (int k = 1; k <= 100; ++k) out.push_back(0.1 * k);
    const OdeSolution sol = integrate(coast, y0, 0.0, 10.0, out);
    auto energy = [](const VectorXd& y) { return 0.5 * (y(2) * y(2) + std::pow(y(0) * y(3), 2)) - 1.0 / y(0); };
    double de = 0.0, dh = 0.0;
    for (const auto& y : sol.states) {
        de = std::max(de, std::abs(energy(y) / energy(y0) - 1.0));
        dh = std::max(dh, std::abs(y(0) * y(0) * y(3) / (y0(0) * y0(0) * y0(3)) - 1.0));
    }
    ok = ok && de <= 1e-9 && dh <= 1e-9;
    detail += fmt::format("coast energy drift {:.1e}, angular momentum drift {:.1e}", de, dh);
    return {ok, detail};
}

Outcome criterion8() {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(-1.0, 1.0);

    // Endpoint conditions over random maps and free vectors.
    double bc = 0.0;
    for (int draw = 0; draw < 1000; ++draw) {
        const int order = 2 + draw % 6;
        const double tof = 2.0 + 50.0 * (u(rng) + 1.0);
        const bool fixed = draw % 2 == 0;
        const CoefficientMap mr =
            build_radius_map(order, tof, 1.0 + 0.2 * u(rng), 0.1 * u(rng), 6.0 + u(rng), 0.1 * u(rng));
        const CoefficientMap mt = build_angle_map(order, tof, u(rng), 1.0 + 0.1 * u(rng), 0.05 + 0.01 * u(rng),
                                                  fixed ? std::optional<double>(30.0 + u(rng)) : std::nullopt);
        for (const CoefficientMap* m : {&mr, &mt}) {
            VectorXd x(m->n_free());
            for (auto& v : x) v = u(rng);
            const Eigen::Vector4d res = endpoint_residuals(*m, m->full(x));
            const double scale = 1.0 + m->full(x).lpNorm<Eigen::Infinity>();
            bc = std::max(bc, res.lpNorm<Eigen::Infinity>() / scale);
        }
    }

    // Series derivatives against central differences on transfer-length horizons.
    double fd = 0.0;
    for (int draw = 0; draw < 200; ++draw) {
        const int order = 1 + draw % 7;
        const double tof = 50.0 + 75.0 * (u(rng) + 1.0);
        VectorXd c(coefficient_count(order));
        for (auto& v : c) v = u(rng);
        const double t = tof * (0.05 + 0.45 * (u(rng) + 1.0));
        const double h = 1e-3;
        const SeriesSample s = eval_state_at(order, tof, c, t);
        const SeriesSample p = eval_state_at(order, tof, c, t + h), m = eval_state_at(order, tof, c, t - h);
        const double scale = c.lpNorm<1>();
        fd = std::max(fd, std::abs((p.value - m.value) / (2 * h) - s.rate) / scale);
        fd = std::max(fd, std::abs((p.rate - m.rate) / (2 * h) - s.accel) / scale);
    }

    // Combined residual vanishes on ballistic and flight-path-thrust states.
    double eom = 0.0;
    for (int draw = 0; draw < 1000; ++draw) {
        const double r = 1.0 + 5.0 * (u(rng) + 1.0);
        const double rdot = 0.3 * u(rng), thetadot = std::sqrt(1.0 / (r * r * r)) * (1.0 + 0.3 * u(rng));
        const double ta = draw % 2 ? 0.0 : 0.0102 * u(rng);
        const PolarDerivative d = polar_rhs(r, rdot, thetadot, ta, std::atan2(rdot, r * thetadot), 1.0);
        const StateSample s{0.0, r, 0.0, rdot, thetadot, d.rddot, d.thetaddot};
        const double scale = 1.0 + std::pow(r * thetadot, 3);
        eom = std::max(eom, std::abs(eom_residual(s, 1.0)) / scale);
    }

    // Merit decreases within every outer iteration of a constrained solve.
    NlpProblem p;
    p.dim = 2;
    p.objective = [](const VectorXd& x) { return 100.0 * std::pow(x(1) - x(0) * x(0), 2) + std::pow(1.0 - x(0), 2); };
    p.inequalities = [](const VectorXd& x) { return VectorXd::Constant(1, x.squaredNorm() - 1.0); };
    p.lower = VectorXd::Constant(2, -5.0);
    p.upper = VectorXd::Constant(2, 5.0);
    p.x0 = (VectorXd(2) << -1.2, 1.0).finished();
    const NlpResult circle = minimize(p);
    bool monotone = circle.converged();
    for (std::size_t k = 1; k < circle.history.size(); ++k)
        if (circle.history[k].outer == circle.history[k - 1].outer &&
            circle.history[k].merit > circle.history[k - 1].merit + 1e-12 * std::abs(circle.history[k - 1].merit))
            monotone = false;
    const bool circle_ok = std::abs(circle.x_star(0) - 0.7864) < 1e-3 && std::abs(circle.x_star(1) - 0.6177) < 1e-3;

    // Unconstrained Rosenbrock and a constrained quadratic.
    p.inequalities = nullptr;
    const NlpResult rosen = minimize(p);
    const bool rosen_ok = rosen.converged() && (rosen.x_star - VectorXd::Ones(2)).lpNorm<Eigen::Infinity>() < 1e-4;
    NlpProblem q;
    q.dim = 1;
    q.objective = [](const VectorXd& x) { return std::pow(x(0) - 2.0, 2); };
    q.inequalities = [](const VectorXd& x) { return VectorXd::Constant(1, x(0) - 1.0); };
    q.lower = VectorXd::Constant(1, -10.0);
    q.upper = VectorXd::Constant(1, 10.0);
    q.x0 = VectorXd::Zero(1);
    const NlpResult quad = minimize(q);
    const bool quad_ok = quad.converged() && std::abs(quad.x_star(0) - 1.0) < 1e-5;

    const bool ok = bc <= 1e-10 && fd <= 1e-6 && eom <= 1e-8 && monotone && circle_ok && rosen_ok && quad_ok;
    return {ok, fmt::format("BC residual {:.1e} (1000 draws, <= 1e-10), derivative vs FD {:.1e} (<= 1e-6), EoM "
                            "identity {:.1e} (<= 1e-8), merit monotone {}, circle-Rosenbrock {}, Rosenbrock {}, "
                            "quadratic {}",
                            bc, fd, eom, monotone ? "yes" : "no", circle_ok ? "ok" : "off", rosen_ok ? "ok" : "off",
                            quad_ok ? "ok" : "off")};
}

}  // namespace

int main() {
    const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
        {1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4},
        {5, criterion5}, {6, criterion6}, {7, criterion7}, {8, criterion8},
    };
    int failed = 0;
    for (const auto& [id, run] : criteria) {
        Outcome o{false, ""};
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("%s criterion %d: %s\n", o.pass ? "PASS" : "FAIL", id, o.detail.c_str());
        std::fflush(stdout);
    }
    return failed;
}
