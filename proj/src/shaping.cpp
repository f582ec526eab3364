#include "ffsb/shaping.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace ffsb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kFitPoints = 400;

DecisionLayout make_layout(const ScenarioConfig& cfg) {
    DecisionLayout l;
    l.n_free_r = coefficient_count(cfg.n_r) - 4;
    l.n_free_theta = coefficient_count(cfg.n_theta) - (cfg.final_angle_mode == FinalAngleMode::free ? 3 : 4);
    l.has_tof = !cfg.tof_fixed;
    return l;
}

std::optional<double> initial_theta_f(const ScenarioConfig& cfg) {
    if (cfg.final_angle_mode == FinalAngleMode::free) return std::nullopt;
    return cfg.bcs.theta_f;
}

double validated(const ScenarioConfig& cfg) {
    cfg.validate();
    return cfg.tof_0;
}

}  // namespace

double rendezvous_theta_f(double tof, const ScenarioConfig& cfg) {
    if (cfg.final_angle_mode != FinalAngleMode::rendezvous_sync)
        throw std::invalid_argument("rendezvous_theta_f: scenario is not in rendezvous_sync mode");
    if (!(cfg.bcs.r_f > 0.0)) throw std::invalid_argument("rendezvous_theta_f: r_f must be positive");
    if (!cfg.bcs.theta_f) throw std::invalid_argument("rendezvous_theta_f: theta_f missing");
    const double n = std::sqrt(cfg.mu() / (cfg.bcs.r_f * cfg.bcs.r_f * cfg.bcs.r_f));
    return *cfg.bcs.theta_f + n * (tof - cfg.tof_0);
}

ShapeModel::ShapeModel(const ScenarioConfig& cfg)
    : cfg_(cfg),
      layout_(make_layout(cfg)),
      basis_r_(cfg.n_r, validated(cfg), cfg.dp),
      basis_theta_(cfg.n_theta, cfg.tof_0, cfg.dp),
      map_r_(build_radius_map(cfg.n_r, cfg.tof_0, cfg.bcs.r_i, cfg.bcs.rdot_i, cfg.bcs.r_f, cfg.bcs.rdot_f)),
      map_theta_(build_angle_map(cfg.n_theta, cfg.tof_0, cfg.bcs.theta_i, cfg.bcs.thetadot_i,
                                 cfg.bcs.thetadot_f, initial_theta_f(cfg))) {}

double ShapeModel::tof_of(const Eigen::VectorXd& x) const {
    return layout_.has_tof ? x(layout_.tof_index()) * cfg_.tof_0 : cfg_.tof_0;
}

std::optional<double> ShapeModel::theta_f_of(double tof) const {
    switch (cfg_.final_angle_mode) {
    case FinalAngleMode::free: return std::nullopt;
    case FinalAngleMode::fixed: return cfg_.bcs.theta_f;
    case FinalAngleMode::rendezvous_sync: return rendezvous_theta_f(tof, cfg_);
    }
    return std::nullopt;
}

std::pair<CoefficientMap, CoefficientMap> ShapeModel::maps_for(double tof) const {
    if (tof == cfg_.tof_0) return {map_r_, map_theta_};
    return {refresh_map(map_r_, tof), refresh_map(map_theta_, tof, theta_f_of(tof))};
}

ShapeEvaluation ShapeModel::evaluate(const Eigen::VectorXd& x) const {
    if (x.size() != layout_.dim())
        throw std::invalid_argument("shaping: decision vector has " + std::to_string(x.size()) +
                                    " entries, layout expects " + std::to_string(layout_.dim()));
    ShapeEvaluation e;
    e.tof = tof_of(x);
    if (!(e.tof > 0.0) || !std::isfinite(e.tof)) throw std::invalid_argument("shaping: non-positive ToF");
    e.theta_f = theta_f_of(e.tof);
    const auto [mr, mt] = maps_for(e.tof);
    e.coeffs_r = mr.full(x.head(layout_.n_free_r));
    e.coeffs_theta = mt.full(x.segment(layout_.theta_begin(), layout_.n_free_theta));

    const FourierBasis br = basis_r_.with_tof(e.tof);
    const FourierBasis bt = basis_theta_.with_tof(e.tof);
    const SeriesTrace r = eval_state(br, e.coeffs_r);
    const SeriesTrace th = eval_state(bt, e.coeffs_theta);
    const Eigen::VectorXd t = br.grid();
    const int dp = cfg_.dp;
    const double mu = cfg_.mu();

    e.profile.tof = e.tof;
    e.profile.samples.resize(dp);
    e.profile.thrust.resize(dp);
    e.residual.resize(dp);
    e.cos_alpha.resize(dp);
    for (int k = 0; k < dp; ++k) {
        const StateSample s{t(k), r.value(k), th.value(k), r.rate(k), th.rate(k), r.accel(k), th.accel(k)};
        e.profile.samples[k] = s;
        e.residual(k) = eom_residual(s, mu);
        const ThrustComponents c = thrust_components(s);
        e.profile.thrust[k] = {s.t, c.ta, c.alpha};
        e.cos_alpha(k) = c.cos_alpha;
        if (c.singular) ++e.singular_points;
    }
    e.fsq = e.residual.squaredNorm();
    return e;
}

Eigen::VectorXd ShapeModel::residual_vector(const Eigen::VectorXd& x) const { return evaluate(x).residual; }

double ShapeModel::objective(const Eigen::VectorXd& x) const { return objective(evaluate(x)); }

double ShapeModel::objective(const ShapeEvaluation& e) const {
    const double w = cfg_.omega;
    switch (cfg_.objective_mode) {
    case ObjectiveMode::none: return e.fsq;
    case ObjectiveMode::tof:
        if (!layout_.has_tof) throw std::invalid_argument("shaping: tof objective needs a ToF slot");
        return (1.0 - w) * e.fsq + w * (e.tof / cfg_.tof_0);
    case ObjectiveMode::delta_v:
        if (layout_.has_tof) throw std::invalid_argument("shaping: delta_v objective needs a fixed ToF");
        return (1.0 - w) * e.fsq + w * delta_v(e.profile);
    }
    return e.fsq;
}

Eigen::VectorXd ShapeModel::thrust_constraints(const Eigen::VectorXd& x) const {
    return thrust_constraints(evaluate(x));
}

Eigen::VectorXd ShapeModel::thrust_constraints(const ShapeEvaluation& e) const {
    const int dp = static_cast<int>(e.profile.thrust.size());
    Eigen::VectorXd g(2 * dp);
    for (int k = 0; k < dp; ++k) {
        const double c = std::abs(e.cos_alpha(k));
        if (c < kSingularCosAlpha) {
            const double pen = c > 0.0 ? std::min(1e6 / c, kSingularPenaltyCap) : kSingularPenaltyCap;
            g(k) = g(dp + k) = pen;
            continue;
        }
        const double ta = e.profile.thrust[k].ta;
        g(k) = ta - cfg_.ta_max;
        g(dp + k) = -ta - cfg_.ta_max;
    }
    return g;
}

Eigen::VectorXd ShapeModel::lower_bounds() const {
    Eigen::VectorXd lo = Eigen::VectorXd::Constant(layout_.dim(), -kInf);
    if (layout_.has_tof) lo(layout_.tof_index()) = kTofLowerRatio;
    return lo;
}

Eigen::VectorXd ShapeModel::upper_bounds() const {
    Eigen::VectorXd hi = Eigen::VectorXd::Constant(layout_.dim(), kInf);
    if (layout_.has_tof) hi(layout_.tof_index()) = kTofUpperRatio;
    return hi;
}

Eigen::VectorXd ShapeModel::clamp(const Eigen::VectorXd& x) const {
    if (x.size() != layout_.dim()) throw std::invalid_argument("shaping: warm start has the wrong dimension");
    return x.cwiseMax(lower_bounds()).cwiseMin(upper_bounds());
}

Eigen::VectorXd ShapeModel::initial_guess() const {
    const double T = cfg_.tof_0;
    const auto& b = cfg_.bcs;
    const Eigen::VectorXd tau = Eigen::VectorXd::LinSpaced(kFitPoints, 0.0, 1.0);
    Eigen::VectorXd r_ref(kFitPoints), th_ref(kFitPoints);
    for (int k = 0; k < kFitPoints; ++k) {
        const double s = tau(k);
        r_ref(k) = b.r_i + (b.r_f - b.r_i) * s * s * (3.0 - 2.0 * s);
    }
    th_ref(0) = b.theta_i;
    for (int k = 1; k < kFitPoints; ++k) {
        const double w0 = circular_rate(r_ref(k - 1), cfg_.mu()), w1 = circular_rate(r_ref(k), cfg_.mu());
        th_ref(k) = th_ref(k - 1) + 0.5 * (w0 + w1) * (tau(k) - tau(k - 1)) * T;
    }
    if (const auto thf = theta_f_of(T)) {
        const double span = th_ref(kFitPoints - 1) - b.theta_i;
        th_ref = (th_ref.array() - b.theta_i) * ((*thf - b.theta_i) / span) + b.theta_i;
    }

    auto fit = [](const FourierBasis& basis, const CoefficientMap& map, const Eigen::VectorXd& ref) {
        const Eigen::MatrixXd A = basis.value_rows() * map.gain;
        const Eigen::VectorXd rhs = ref - basis.value_rows() * map.offset;
        return Eigen::VectorXd(A.colPivHouseholderQr().solve(rhs));
    };
    Eigen::VectorXd x(layout_.dim());
    x.head(layout_.n_free_r) = fit(FourierBasis(cfg_.n_r, T, kFitPoints), map_r_, r_ref);
    x.segment(layout_.theta_begin(), layout_.n_free_theta) =
        fit(FourierBasis(cfg_.n_theta, T, kFitPoints), map_theta_, th_ref);
    if (layout_.has_tof) x(layout_.tof_index()) = 1.0;
    return x;
}

Eigen::VectorXd residual_vector(const Eigen::VectorXd& x, const ScenarioConfig& cfg) {
    return ShapeModel(cfg).residual_vector(x);
}

double objective(const Eigen::VectorXd& x, const ScenarioConfig& cfg) { return ShapeModel(cfg).objective(x); }

Eigen::VectorXd thrust_constraints(const Eigen::VectorXd& x, const ScenarioConfig& cfg) {
    return ShapeModel(cfg).thrust_constraints(x);
}

NlpOptions ShapeOptions::default_nlp_options() {
    NlpOptions o;
    o.record_history = true;
    return o;
}

ShapeSolution assemble_solution(const ShapeModel& model, const Eigen::VectorXd& x) {
    ShapeEvaluation e = model.evaluate(x);
    ShapeSolution s;
    s.free = x;
    s.coeffs_r = std::move(e.coeffs_r);
    s.coeffs_theta = std::move(e.coeffs_theta);
    s.tof = e.tof;
    s.theta_f = e.theta_f;
    s.fsq = e.fsq;
    s.singular_points = e.singular_points;
    s.objective = model.objective(e);
    s.profile = std::move(e.profile);
    s.delta_v = delta_v(s.profile);
    for (const auto& th : s.profile.thrust) s.max_abs_ta = std::max(s.max_abs_ta, std::abs(th.ta));
    return s;
}

ShapeSolution solve(const ScenarioConfig& cfg, const ShapeOptions& options) {
    const auto start = std::chrono::steady_clock::now();
    const ShapeModel model(cfg);
    NlpProblem p;
    p.dim = model.layout().dim();
    p.lower = model.lower_bounds();
    p.upper = model.upper_bounds();
    p.x0 = options.warm_start ? model.clamp(*options.warm_start) : model.initial_guess();
    p.objective = [&model](const Eigen::VectorXd& x) { return model.objective(x); };
    p.inequalities = [&model](const Eigen::VectorXd& x) { return model.thrust_constraints(x); };
    p.combined = [&model](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
        const ShapeEvaluation e = model.evaluate(x);
        g = model.thrust_constraints(e);
        return model.objective(e);
    };

    NlpResult result = minimize(p, options.nlp);
    ShapeSolution sol = assemble_solution(model, result.x_star);
    sol.nlp = std::move(result);
    sol.elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return sol;
}

std::vector<double> default_sweep_weights() {
    std::vector<double> w;
    for (int k = 1; k <= 99; ++k) w.push_back(k / 100.0);
    return w;
}

std::vector<SweepRecord> sweep(const ScenarioConfig& cfg, const std::vector<double>& omegas,
                               const SweepOptions& options) {
    for (std::size_t i = 0; i < omegas.size(); ++i) {
        if (!(omegas[i] >= 0.0 && omegas[i] <= 1.0))
            throw std::invalid_argument("sweep: weights must lie in [0, 1]");
        if (i > 0 && !(omegas[i] > omegas[i - 1]))
            throw std::invalid_argument("sweep: weights must be strictly increasing");
    }

    std::vector<SweepRecord> out(omegas.size());
    auto run_one = [&](std::size_t i, const std::optional<Eigen::VectorXd>& warm) -> std::optional<Eigen::VectorXd> {
        SweepRecord& rec = out[i];
        rec.omega = omegas[i];
        try {
            ScenarioConfig c = cfg;
            c.omega = omegas[i];
            ShapeOptions so;
            so.nlp = options.nlp;
            so.nlp.record_history = false;
            so.warm_start = warm;
            const ShapeSolution s = solve(c, so);
            rec.fsq = s.fsq;
            rec.tof_hours = c.tof_hours(s.tof);
            rec.delta_v = s.delta_v;
            rec.status = to_string(s.nlp.status);
            return s.free;
        } catch (const std::exception& e) {
            rec.fsq = rec.tof_hours = rec.delta_v = std::numeric_limits<double>::quiet_NaN();
            rec.status = std::string("error: ") + e.what();
            return std::nullopt;
        }
    };

    if (!options.parallel) {
        std::optional<Eigen::VectorXd> warm;
        for (std::size_t i = 0; i < omegas.size(); ++i) {
            auto x = run_one(i, warm);
            if (x) warm = std::move(x);
        }
        return out;
    }

    unsigned n = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
    n = std::min<unsigned>(n, static_cast<unsigned>(std::max<std::size_t>(1, omegas.size())));
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < n; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < omegas.size(); i = next++) run_one(i, std::nullopt);
        });
    for (auto& t : pool) t.join();
    return out;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("spearman: size mismatch");
    if (a.size() < 2) throw std::invalid_argument("spearman: need at least two samples");
    auto ranks = [](const std::vector<double>& v) {
        std::vector<std::size_t> idx(v.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
        Eigen::VectorXd r(v.size());
        for (std::size_t i = 0; i < idx.size();) {
            std::size_t j = i;
            while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
            const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
            for (std::size_t k = i; k <= j; ++k) r(idx[k]) = avg;
            i = j + 1;
        }
        return r;
    };
    const Eigen::VectorXd ra = ranks(a), rb = ranks(b);
    const Eigen::VectorXd da = ra.array() - ra.mean(), db = rb.array() - rb.mean();
    const double den = std::sqrt(da.squaredNorm() * db.squaredNorm());
    if (den == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return da.dot(db) / den;
}

}  // namespace ffsb
