#include "ffsb/collocation.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace ffsb {

namespace {

// Final-angle guess for free-angle transfers, also the angle box upper bound.
constexpr double kOrbitRaisingThetaGuess = 12.0 * kPi;
constexpr double kThetadotUpperOrbitRaising = 1.0;
constexpr double kThetadotUpperRendezvous = 1.2;
constexpr double kRdotUpper = 1.0;
// Scaled decision variables keep every coordinate O(1) for the quasi-Newton solver.
constexpr std::array<double, 4> kStateScale{1.0, 10.0, 0.1, 1.0};
constexpr int kLocalVars = 11;  // x_k, x_{k+1}, u_k, u_{k+1}, tof

using State = std::array<double, 4>;

State rhs(const State& x, double ta, double mu) {
    const double alpha = std::atan2(x[2], x[0] * x[3]);
    const PolarDerivative d = polar_rhs(x[0], x[2], x[3], ta, alpha, mu);
    return {d.rdot, d.thetadot, d.rddot, d.thetaddot};
}

State rk4_step(const State& x, double ta, double h, double mu) {
    auto axpy = [](const State& a, double c, const State& d) {
        State r;
        for (int i = 0; i < 4; ++i) r[i] = a[i] + c * d[i];
        return r;
    };
    const State k1 = rhs(x, ta, mu);
    const State k2 = rhs(axpy(x, h / 2.0, k1), ta, mu);
    const State k3 = rhs(axpy(x, h / 2.0, k2), ta, mu);
    const State k4 = rhs(axpy(x, h, k3), ta, mu);
    State r;
    for (int i = 0; i < 4; ++i) r[i] = x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return r;
}

State segment_defect(const State& xa, const State& xb, double ua, double ub, double h, double mu) {
    const State fa = rhs(xa, ua, mu), fb = rhs(xb, ub, mu);
    State xm;
    for (int i = 0; i < 4; ++i) xm[i] = 0.5 * (xa[i] + xb[i]) + h / 8.0 * (fa[i] - fb[i]);
    const State fm = rhs(xm, 0.5 * (ua + ub), mu);
    State d;
    for (int i = 0; i < 4; ++i) d[i] = xb[i] - xa[i] - h / 6.0 * (fa[i] + 4.0 * fm[i] + fb[i]);
    return d;
}

class Transcription {
public:
    Transcription(const ScenarioConfig& cfg, const CollocationOptions& opt)
        : cfg_(cfg), n_(opt.segments), tol_(opt.tol_defect), mu_(cfg.mu()) {
        rendezvous_ = cfg.final_angle_mode != FinalAngleMode::free;
        theta_f0_ = rendezvous_ ? *cfg.bcs.theta_f : kOrbitRaisingThetaGuess;
        target_rate_ = std::sqrt(mu_ / std::pow(cfg.bcs.r_f, 3));
    }

    int nodes() const { return n_ + 1; }
    int u_index(int k) const { return 4 * nodes() + k; }
    int tof_index() const { return 5 * nodes(); }
    int dim() const { return 5 * nodes() + 1; }
    int n_defect_rows() const { return 4 * n_; }
    int n_rows() const { return 2 * n_defect_rows() + (rendezvous_ ? 2 : 0); }

    double scale(int i) const {
        if (i < 4 * nodes()) return kStateScale[i % 4];
        if (i < tof_index()) return cfg_.ta_max;
        return cfg_.tof_0;
    }

    State rk4_step(const State& x, double ta, double h) const { return ffsb::rk4_step(x, ta, h, mu_); }

    State node(const Eigen::VectorXd& z, int k) const {
        return {z(4 * k) * kStateScale[0], z(4 * k + 1) * kStateScale[1], z(4 * k + 2) * kStateScale[2],
                z(4 * k + 3) * kStateScale[3]};
    }
    double control(const Eigen::VectorXd& z, int k) const { return z(u_index(k)) * cfg_.ta_max; }
    double tof(const Eigen::VectorXd& z) const { return z(tof_index()) * cfg_.tof_0; }

    double theta_target(double tof) const {
        return rendezvous_ ? theta_f0_ + target_rate_ * (tof - cfg_.tof_0) : theta_f0_;
    }
    bool rendezvous() const { return rendezvous_; }

    std::array<int, kLocalVars> local_indices(int k) const {
        return {4 * k, 4 * k + 1, 4 * k + 2, 4 * k + 3, 4 * k + 4, 4 * k + 5, 4 * k + 6, 4 * k + 7,
                u_index(k), u_index(k + 1), tof_index()};
    }

    State defect(const Eigen::VectorXd& z, int k) const {
        return segment_defect(node(z, k), node(z, k + 1), control(z, k), control(z, k + 1), tof(z) / n_, mu_);
    }

    double coupling(const Eigen::VectorXd& z) const { return node(z, n_)[1] - theta_target(tof(z)); }

    Eigen::VectorXd constraints(const Eigen::VectorXd& z) const {
        Eigen::VectorXd g(n_rows());
        const int m = n_defect_rows();
        for (int k = 0; k < n_; ++k) {
            const State d = defect(z, k);
            for (int i = 0; i < 4; ++i) {
                g(4 * k + i) = d[i] - tol_;
                g(m + 4 * k + i) = -d[i] - tol_;
            }
        }
        if (rendezvous_) {
            const double c = coupling(z);
            g(2 * m) = c - tol_;
            g(2 * m + 1) = -c - tol_;
        }
        return g;
    }

    // Central differences per segment over its eleven local variables.
    Eigen::SparseMatrix<double> jacobian(const Eigen::VectorXd& z) const {
        const int m = n_defect_rows();
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(2 * m * kLocalVars + 4);
        Eigen::VectorXd zp = z;
        for (int k = 0; k < n_; ++k) {
            for (int idx : local_indices(k)) {
                const double h = 6e-6 * std::max(1.0, std::abs(z(idx)));
                zp(idx) = z(idx) + h;
                const State dp = defect(zp, k);
                zp(idx) = z(idx) - h;
                const State dm = defect(zp, k);
                zp(idx) = z(idx);
                for (int i = 0; i < 4; ++i) {
                    const double v = (dp[i] - dm[i]) / (2.0 * h);
                    if (v == 0.0) continue;
                    trip.emplace_back(4 * k + i, idx, v);
                    trip.emplace_back(m + 4 * k + i, idx, -v);
                }
            }
        }
        if (rendezvous_) {
            const int ti = 4 * n_ + 1;
            trip.emplace_back(2 * m, ti, kStateScale[1]);
            trip.emplace_back(2 * m + 1, ti, -kStateScale[1]);
            if (target_rate_ != 0.0) {
                trip.emplace_back(2 * m, tof_index(), -target_rate_ * cfg_.tof_0);
                trip.emplace_back(2 * m + 1, tof_index(), target_rate_ * cfg_.tof_0);
            }
        }
        Eigen::SparseMatrix<double> J(n_rows(), dim());
        J.setFromTriplets(trip.begin(), trip.end());
        return J;
    }

    void bounds(Eigen::VectorXd& lo, Eigen::VectorXd& hi) const {
        const auto& b = cfg_.bcs;
        const double thetadot_hi = rendezvous_ ? kThetadotUpperRendezvous : kThetadotUpperOrbitRaising;
        const double theta_hi = rendezvous_ ? theta_target(kTofUpper * cfg_.tof_0) : theta_f0_;
        lo.resize(dim());
        hi.resize(dim());
        const double r_lo = std::min(b.r_i, b.r_f), r_hi = std::max(b.r_i, b.r_f);
        for (int k = 0; k < nodes(); ++k) {
            const State l{r_lo, 0.0, 0.0, 0.0}, u{r_hi, theta_hi, kRdotUpper, thetadot_hi};
            for (int i = 0; i < 4; ++i) {
                lo(4 * k + i) = l[i] / kStateScale[i];
                hi(4 * k + i) = u[i] / kStateScale[i];
            }
            lo(u_index(k)) = -1.0;
            hi(u_index(k)) = 1.0;
        }
        auto fix = [&](int idx, double value) { lo(idx) = hi(idx) = value / kStateScale[idx % 4]; };
        fix(0, b.r_i);
        fix(1, b.theta_i);
        fix(2, b.rdot_i);
        fix(3, b.thetadot_i);
        fix(4 * n_, b.r_f);
        fix(4 * n_ + 2, b.rdot_f);
        fix(4 * n_ + 3, b.thetadot_f);
        lo(tof_index()) = kTofLower;
        hi(tof_index()) = kTofUpper;
    }

    // Straight-line interpolation of the boundary conditions, zero control.
    Eigen::VectorXd linear_guess() const {
        const auto& b = cfg_.bcs;
        const State xi{b.r_i, b.theta_i, b.rdot_i, b.thetadot_i};
        const State xf{b.r_f, theta_target(cfg_.tof_0), b.rdot_f, b.thetadot_f};
        Eigen::VectorXd z = Eigen::VectorXd::Zero(dim());
        for (int k = 0; k < nodes(); ++k) {
            const double s = static_cast<double>(k) / n_;
            for (int i = 0; i < 4; ++i) z(4 * k + i) = ((1.0 - s) * xi[i] + s * xf[i]) / kStateScale[i];
        }
        z(tof_index()) = 1.0;
        return z;
    }

    /**
     * Coast on the initial orbit, then full tangential thrust until the final
     * radius is reached. For rendezvous the coast length lines the arrival
     * angle up with the target; otherwise there is no coast. Every node lies
     * on a propagated arc, so only the terminal conditions start violated.
     */
    Eigen::VectorXd propagated_guess() const {
        const auto& b = cfg_.bcs;
        const State x0{b.r_i, b.theta_i, b.rdot_i, b.thetadot_i};
        const double push = b.r_f >= b.r_i ? cfg_.ta_max : -cfg_.ta_max;
        const double t_cap = kTofUpper * cfg_.tof_0;
        auto reached = [&](const State& x) { return push > 0.0 ? x[0] >= b.r_f : x[0] <= b.r_f; };

        // Thrust-only arc: time and angle swept until the final radius.
        const double h = cfg_.tof_0 / 4000.0;
        State x = x0;
        double t_thrust = 0.0;
        while (!reached(x) && t_thrust < t_cap) {
            x = rk4_step(x, push, h);
            t_thrust += h;
        }
        const double swept = x[1] - x0[1];

        double coast = 0.0;
        if (rendezvous_) {
            const double gap = theta_target(t_thrust) - x0[1] - swept;
            const double closing = x0[3] - target_rate_;
            if (closing > 0.0) coast = std::max(0.0, gap / closing);
        }
        const double tof = std::clamp(coast + t_thrust, kTofLower * cfg_.tof_0, t_cap);

        Eigen::VectorXd z(dim());
        constexpr int kSubsteps = 40;
        const double dt = tof / n_ / kSubsteps;
        x = x0;
        double t = 0.0;
        for (int k = 0; k < nodes(); ++k) {
            const double u = t < coast ? 0.0 : push;
            for (int i = 0; i < 4; ++i) z(4 * k + i) = x[i] / kStateScale[i];
            z(u_index(k)) = u / cfg_.ta_max;
            if (k == n_) break;
            for (int j = 0; j < kSubsteps; ++j, t += dt) x = rk4_step(x, t < coast ? 0.0 : push, dt);
        }
        z(tof_index()) = tof / cfg_.tof_0;
        return z;
    }

    Eigen::VectorXd from_grid(const TranscriptionGrid& g) const {
        const TranscriptionGrid r = resample(g, n_);
        Eigen::VectorXd z(dim());
        for (int k = 0; k < nodes(); ++k) {
            for (int i = 0; i < 4; ++i) z(4 * k + i) = r.states(k, i) / kStateScale[i];
            z(u_index(k)) = r.ta(k) / cfg_.ta_max;
        }
        z(tof_index()) = r.tof / cfg_.tof_0;
        return z;
    }

    TranscriptionGrid grid(const Eigen::VectorXd& z) const {
        TranscriptionGrid g;
        g.segments = n_;
        g.states.resize(nodes(), 4);
        g.ta.resize(nodes());
        for (int k = 0; k < nodes(); ++k) {
            const State x = node(z, k);
            for (int i = 0; i < 4; ++i) g.states(k, i) = x[i];
            g.ta(k) = control(z, k);
        }
        g.tof = tof(z);
        return g;
    }

    static constexpr double kTofLower = 0.1;
    static constexpr double kTofUpper = 2.0;

private:
    ScenarioConfig cfg_;
    int n_;
    double tol_;
    double mu_;
    bool rendezvous_ = false;
    double theta_f0_ = 0.0;
    double target_rate_ = 0.0;
};

}  // namespace

NlpOptions CollocationOptions::default_nlp_options() {
    NlpOptions o;
    // The defect pairs make the penalty subproblems stiff; a loose objective
    // test stops the inner loop well short of the switching structure.
    o.tol_obj = 1e-15;
    o.max_inner = 20000;
    o.max_outer = 60;
    o.record_history = false;
    return o;
}

Eigen::VectorXd TranscriptionGrid::times() const {
    return Eigen::VectorXd::LinSpaced(segments + 1, 0.0, tof);
}

TranscriptionGrid resample(const TranscriptionGrid& grid, int segments) {
    if (grid.segments < 1 || grid.states.rows() != grid.segments + 1 || grid.ta.size() != grid.segments + 1)
        throw std::invalid_argument("resample: inconsistent grid");
    if (segments < 1) throw std::invalid_argument("resample: segments must be positive");
    TranscriptionGrid out;
    out.segments = segments;
    out.tof = grid.tof;
    out.states.resize(segments + 1, 4);
    out.ta.resize(segments + 1);
    for (int k = 0; k <= segments; ++k) {
        const double pos = static_cast<double>(k) * grid.segments / segments;
        const int j = std::min(static_cast<int>(pos), grid.segments - 1);
        const double w = pos - j;
        out.states.row(k) = (1.0 - w) * grid.states.row(j) + w * grid.states.row(j + 1);
        out.ta(k) = (1.0 - w) * grid.ta(j) + w * grid.ta(j + 1);
    }
    return out;
}

Eigen::MatrixXd hermite_simpson_defects(const TranscriptionGrid& grid, double mu) {
    if (grid.segments < 1 || grid.states.rows() != grid.segments + 1 || grid.ta.size() != grid.segments + 1)
        throw std::invalid_argument("hermite_simpson_defects: inconsistent grid");
    Eigen::MatrixXd d(grid.segments, 4);
    const double h = grid.tof / grid.segments;
    for (int k = 0; k < grid.segments; ++k) {
        const State xa{grid.states(k, 0), grid.states(k, 1), grid.states(k, 2), grid.states(k, 3)};
        const State xb{grid.states(k + 1, 0), grid.states(k + 1, 1), grid.states(k + 1, 2), grid.states(k + 1, 3)};
        const State dk = segment_defect(xa, xb, grid.ta(k), grid.ta(k + 1), h, mu);
        for (int i = 0; i < 4; ++i) d(k, i) = dk[i];
    }
    return d;
}

OptimalSolution solve_min_time(const ScenarioConfig& cfg, const CollocationOptions& options) {
    if (options.segments < kMinSegments)
        throw std::invalid_argument("solve_min_time: segments must be >= " + std::to_string(kMinSegments));
    if (!(options.effort_weight >= 0.0)) throw std::invalid_argument("solve_min_time: effort_weight must be >= 0");
    if (!(options.tol_defect > 0.0)) throw std::invalid_argument("solve_min_time: tol_defect must be positive");
    cfg.validate();
    if (cfg.final_angle_mode != FinalAngleMode::free && !cfg.bcs.theta_f)
        throw std::invalid_argument("solve_min_time: rendezvous needs theta_f");

    const auto start = std::chrono::steady_clock::now();
    const Transcription tr(cfg, options);
    NlpProblem p;
    p.dim = tr.dim();
    tr.bounds(p.lower, p.upper);
    Eigen::VectorXd guess;
    if (options.initial_guess) {
        guess = tr.from_grid(*options.initial_guess);
    } else if (options.coarse_start && options.segments > kMinSegments) {
        CollocationOptions coarse = options;
        coarse.segments = kMinSegments;
        coarse.coarse_start = false;
        guess = tr.from_grid(solve_min_time(cfg, coarse).grid);
    } else {
        guess = options.guess == CollocationGuess::linear ? tr.linear_guess() : tr.propagated_guess();
    }
    p.x0 = guess.cwiseMax(p.lower).cwiseMin(p.upper);
    const int ti = tr.tof_index();
    // Minimum time plus a small control-effort term. Time alone leaves the
    // control nearly free on coast arcs; the effort term drives it to zero there.
    const int u0 = tr.u_index(0), nu = tr.nodes();
    const double w = options.effort_weight;
    p.objective = [ti, u0, nu, w](const Eigen::VectorXd& z) {
        return z(ti) + w * z.segment(u0, nu).squaredNorm() / nu;
    };
    p.objective_gradient = [ti, u0, nu, w, n = tr.dim()](const Eigen::VectorXd& z) {
        Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
        g(ti) = 1.0;
        g.segment(u0, nu) = (2.0 * w / nu) * z.segment(u0, nu);
        return g;
    };
    p.inequalities = [&tr](const Eigen::VectorXd& z) { return tr.constraints(z); };
    p.inequality_jacobian = [&tr](const Eigen::VectorXd& z) { return tr.jacobian(z); };

    OptimalSolution sol;
    sol.nlp = minimize(p, options.nlp);
    const Eigen::VectorXd& z = sol.nlp.x_star;
    sol.grid = tr.grid(z);
    sol.tof_hours = cfg.tof_hours(sol.grid.tof);
    sol.ta_max = cfg.ta_max;
    sol.theta_f_target = tr.rendezvous() ? tr.theta_target(sol.grid.tof) : sol.grid.states(tr.nodes() - 1, 1);
    sol.defect_norm = hermite_simpson_defects(sol.grid, cfg.mu()).cwiseAbs().maxCoeff();

    const auto& b = cfg.bcs;
    const auto& X = sol.grid.states;
    const int last = tr.nodes() - 1;
    sol.boundary_error = std::max({std::abs(X(0, 0) - b.r_i), std::abs(X(0, 1) - b.theta_i),
                                   std::abs(X(0, 2) - b.rdot_i), std::abs(X(0, 3) - b.thetadot_i),
                                   std::abs(X(last, 0) - b.r_f), std::abs(X(last, 2) - b.rdot_f),
                                   std::abs(X(last, 3) - b.thetadot_f)});
    if (tr.rendezvous())
        sol.boundary_error = std::max(sol.boundary_error, std::abs(X(last, 1) - sol.theta_f_target));

    const Eigen::VectorXd t = sol.grid.times();
    sol.profile.tof = sol.grid.tof;
    for (int k = 0; k <= last; ++k) {
        const State x{X(k, 0), X(k, 1), X(k, 2), X(k, 3)};
        const double ta = sol.grid.ta(k);
        const State f = rhs(x, ta, cfg.mu());
        sol.profile.samples.push_back({t(k), x[0], x[1], x[2], x[3], f[2], f[3]});
        sol.profile.thrust.push_back({t(k), ta, std::atan2(x[2], x[0] * x[3])});
    }
    sol.elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return sol;
}

double saturation_fraction(const OptimalSolution& sol) {
    const auto& ta = sol.grid.ta;
    if (ta.size() == 0) return 0.0;
    int count = 0;
    for (Eigen::Index k = 0; k < ta.size(); ++k) {
        const double a = std::abs(ta(k));
        if (a >= 0.99 * sol.ta_max || a <= 0.01 * sol.ta_max) ++count;
    }
    return static_cast<double>(count) / static_cast<double>(ta.size());
}

double off_fraction(const OptimalSolution& sol) {
    const auto& ta = sol.grid.ta;
    if (ta.size() == 0) return 0.0;
    int count = 0;
    for (Eigen::Index k = 0; k < ta.size(); ++k)
        if (std::abs(ta(k)) <= 0.01 * sol.ta_max) ++count;
    return static_cast<double>(count) / static_cast<double>(ta.size());
}

bool bang_off_bang(const OptimalSolution& sol) {
    const auto& ta = sol.grid.ta;
    const bool saturated = ta.size() > 0 && ta.cwiseAbs().maxCoeff() >= 0.99 * sol.ta_max;
    return saturated && off_fraction(sol) >= 0.1;
}

}  // namespace ffsb
