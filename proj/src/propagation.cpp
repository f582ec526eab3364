#include "ffsb/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ffsb/fourier.hpp"

namespace ffsb {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// b - b_hat
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

constexpr double kSafety = 0.9;
constexpr double kMinFactor = 0.2;
constexpr double kMaxFactor = 10.0;
constexpr double kAlpha = 0.7 / 5.0;  // PI gains for a 5th-order pair
constexpr double kBeta = 0.4 / 5.0;

double error_norm(const Eigen::VectorXd& err, const Eigen::VectorXd& y0, const Eigen::VectorXd& y1,
                  const OdeTolerance& tol) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < err.size(); ++i) {
        const double sc = tol.abs + tol.rel * std::max(std::abs(y0(i)), std::abs(y1(i)));
        sum += (err(i) / sc) * (err(i) / sc);
    }
    return std::sqrt(sum / static_cast<double>(err.size()));
}

double initial_step(const OdeRhs& rhs, double t0, const Eigen::VectorXd& y0, const Eigen::VectorXd& f0,
                    double span, const OdeTolerance& tol) {
    Eigen::VectorXd sc(y0.size());
    for (Eigen::Index i = 0; i < y0.size(); ++i) sc(i) = tol.abs + tol.rel * std::abs(y0(i));
    const double d0 = (y0.array() / sc.array()).matrix().norm() / std::sqrt(double(y0.size()));
    const double d1 = (f0.array() / sc.array()).matrix().norm() / std::sqrt(double(y0.size()));
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, span);
    Eigen::VectorXd f1(y0.size());
    rhs(t0 + h0, y0 + h0 * f0, f1);
    const double d2 = ((f1 - f0).array() / sc.array()).matrix().norm() / std::sqrt(double(y0.size())) / h0;
    const double h1 = std::max(d1, d2) <= 1e-15 ? std::max(1e-6, h0 * 1e-3)
                                                 : std::pow(0.01 / std::max(d1, d2), 1.0 / 5.0);
    return std::min({100.0 * h0, h1, span});
}

// Cubic Hermite interpolation on [t0, t1].
double hermite(double t, double t0, double t1, double y0, double y1, double d0, double d1) {
    const double h = t1 - t0;
    if (h == 0.0) return y0;
    const double s = (t - t0) / h;
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * h * d0 + (-2 * s3 + 3 * s2) * y1 + (s3 - s2) * h * d1;
}

}  // namespace

OdeSolution integrate(const OdeRhs& rhs, const Eigen::VectorXd& y0, double t0, double t1,
                      const std::vector<double>& output_times, const OdeTolerance& tol, const OdeGuard& guard) {
    if (!(t1 > t0)) throw std::invalid_argument("integrate: t1 must exceed t0");
    if (!(tol.rel > 0.0) || !(tol.abs > 0.0)) throw std::invalid_argument("integrate: tolerances must be positive");
    for (std::size_t i = 0; i < output_times.size(); ++i) {
        if (output_times[i] < t0 || output_times[i] > t1)
            throw std::invalid_argument("integrate: output time outside [t0, t1]");
        if (i > 0 && output_times[i] < output_times[i - 1])
            throw std::invalid_argument("integrate: output times must be ascending");
    }
    std::vector<double> targets(output_times.begin(), output_times.end());
    if (targets.empty() || targets.back() != t1) targets.push_back(t1);

    OdeSolution out;
    const Eigen::Index n = y0.size();
    Eigen::VectorXd y = y0, k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n), err(n);
    double t = t0;
    std::size_t next = 0;
    while (next < targets.size() && targets[next] == t0) {
        out.times.push_back(t0);
        out.states.push_back(y);
        ++next;
    }
    rhs(t, y, k1);
    double h = initial_step(rhs, t0, y, k1, t1 - t0, tol);
    double err_prev = 1e-4;
    const double h_min = 16.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(t0), std::abs(t1));

    while (next < targets.size()) {
        const double target = targets[next];
        bool lands = false;
        double step = h;
        if (t + step >= target - 1e-12 * std::abs(target)) {
            step = target - t;
            lands = true;
        }
        if (step < h_min) throw PropagationError("integrate: step size underflow", t);

        ytmp = y + step * a21 * k1;
        rhs(t + c2 * step, ytmp, k2);
        ytmp = y + step * (a31 * k1 + a32 * k2);
        rhs(t + c3 * step, ytmp, k3);
        ytmp = y + step * (a41 * k1 + a42 * k2 + a43 * k3);
        rhs(t + c4 * step, ytmp, k4);
        ytmp = y + step * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        rhs(t + c5 * step, ytmp, k5);
        ytmp = y + step * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        rhs(t + step, ytmp, k6);
        ynew = y + step * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        rhs(t + step, ynew, k7);
        err = step * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        const double en = error_norm(err, y, ynew, tol);

        if (!std::isfinite(en)) {
            ++out.rejected;
            h = step * kMinFactor;
            continue;
        }
        if (en > 1.0) {
            ++out.rejected;
            h = step * std::max(kMinFactor, kSafety * std::pow(en, -1.0 / 5.0));
            continue;
        }

        ++out.steps;
        t = lands ? target : t + step;
        y = ynew;
        k1 = k7;  // first-same-as-last
        if (guard && !guard(t, y)) throw PropagationError("integrate: guard rejected the state", t);

        const double factor = en == 0.0 ? kMaxFactor
                                        : std::clamp(kSafety * std::pow(en, -kAlpha) * std::pow(err_prev, kBeta),
                                                     kMinFactor, kMaxFactor);
        err_prev = std::max(en, 1e-4);
        // A step clipped to land on an output keeps the unclipped proposal.
        h = lands ? std::max(h, step * factor) : step * factor;
        if (lands) {
            while (next < targets.size() && targets[next] == t) {
                out.times.push_back(t);
                out.states.push_back(y);
                ++next;
            }
        }
    }
    return out;
}

ProfileDeviation compare_profiles(const TrajectoryProfile& shaped, const std::vector<DenseState>& integrated) {
    ProfileDeviation d;
    if (shaped.samples.empty()) return d;
    if (integrated.empty()) throw std::invalid_argument("compare_profiles: empty integrated trajectory");
    const double t_lo = integrated.front().t, t_hi = integrated.back().t;
    const double slack = 1e-9 * std::max(1.0, std::abs(t_hi));
    if (shaped.samples.front().t < t_lo - slack || shaped.samples.back().t > t_hi + slack)
        throw std::invalid_argument("compare_profiles: shaped span exceeds the integrated span");

    std::size_t j = 0;
    double sum_r = 0.0, sum_th = 0.0;
    for (const auto& s : shaped.samples) {
        while (j + 2 < integrated.size() && integrated[j + 1].t < s.t) ++j;
        const DenseState& a = integrated[j];
        const DenseState& b = integrated[std::min(j + 1, integrated.size() - 1)];
        double r, th;
        if (s.t <= a.t || &a == &b) {
            r = a.r;
            th = a.theta;
        } else if (s.t >= b.t) {
            r = b.r;
            th = b.theta;
        } else {
            r = hermite(s.t, a.t, b.t, a.r, b.r, a.rdot, b.rdot);
            th = hermite(s.t, a.t, b.t, a.theta, b.theta, a.thetadot, b.thetadot);
        }
        const double dr = std::abs(r - s.r), dth = std::abs(th - s.theta);
        d.max_radial = std::max(d.max_radial, dr);
        d.max_angular = std::max(d.max_angular, dth);
        sum_r += dr;
        sum_th += dth;
        d.final_radial = r - s.r;
        d.final_angular = th - s.theta;
    }
    d.mean_radial = sum_r / static_cast<double>(shaped.samples.size());
    d.mean_angular = sum_th / static_cast<double>(shaped.samples.size());
    return d;
}

PropagationReport integrate_open_loop(const ShapeSolution& sol, const ScenarioConfig& cfg, const OdeTolerance& tol) {
    if (sol.profile.samples.empty() || !(sol.tof > 0.0))
        throw std::invalid_argument("integrate_open_loop: solution has no profile");
    const double T = sol.tof;
    const double mu = cfg.mu();
    const int nr = cfg.n_r, nt = cfg.n_theta;
    if (sol.coeffs_r.size() != coefficient_count(nr) || sol.coeffs_theta.size() != coefficient_count(nt))
        throw std::invalid_argument("integrate_open_loop: coefficient sizes do not match the scenario");

    auto control = [&](double t) {
        const double tc = std::clamp(t, 0.0, T);
        const SeriesSample r = eval_state_at(nr, T, sol.coeffs_r, tc);
        const SeriesSample th = eval_state_at(nt, T, sol.coeffs_theta, tc);
        return thrust_components({tc, r.value, th.value, r.rate, th.rate, r.accel, th.accel});
    };
    const OdeRhs rhs = [&](double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
        const ThrustComponents c = control(t);
        const PolarDerivative d = polar_rhs(y(0), y(2), y(3), c.ta, c.alpha, mu);
        dy.resize(4);
        dy << d.rdot, d.thetadot, d.rddot, d.thetaddot;
    };
    const OdeGuard guard = [](double, const Eigen::VectorXd& y) { return y(0) > 0.0 && y.allFinite(); };

    const StateSample& s0 = sol.profile.samples.front();
    Eigen::VectorXd y0(4);
    y0 << s0.r, s0.theta, s0.rdot, s0.thetadot;
    std::vector<double> grid;
    grid.reserve(sol.profile.samples.size());
    for (const auto& s : sol.profile.samples) grid.push_back(std::min(s.t, T));

    OdeSolution ode;
    try {
        ode = integrate(rhs, y0, 0.0, T, grid, tol, guard);
    } catch (const PropagationError& e) {
        if (std::string(e.what()).find("guard") != std::string::npos)
            throw PropagationError("integrate_open_loop: radius reached zero", e.time());
        throw;
    }

    PropagationReport rep;
    rep.steps_taken = ode.steps;
    rep.rejected_steps = ode.rejected;
    rep.trajectory.reserve(ode.times.size());
    for (std::size_t i = 0; i < ode.times.size(); ++i) {
        const auto& y = ode.states[i];
        rep.trajectory.push_back({ode.times[i], y(0), y(1), y(2), y(3)});
    }
    rep.deviation = compare_profiles(sol.profile, rep.trajectory);
    rep.max_path_deviation = rep.deviation.max_radial;

    const StateSample& sf = sol.profile.samples.back();
    const DenseState& yf = rep.trajectory.back();
    rep.final_state_error << yf.r - sf.r, yf.theta - sf.theta, yf.rdot - sf.rdot, yf.thetadot - sf.thetadot;
    rep.final_radius_error_rel = std::abs(rep.final_state_error(0)) / std::abs(sf.r);
    rep.final_angle_error_deg = std::abs(rep.final_state_error(1)) * 180.0 / kPi;
    return rep;
}

bool is_feasible(const PropagationReport& report, const FeasibilityLimits& limits) {
    return report.final_radius_error_rel < limits.radius_rel && report.final_angle_error_deg < limits.angle_deg;
}

}  // namespace ffsb
