#include "ffsb/nlp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

namespace ffsb {

const char* to_string(NlpStatus s) {
    switch (s) {
    case NlpStatus::converged: return "converged";
    case NlpStatus::max_iter: return "max_iter";
    case NlpStatus::line_search_failure: return "line_search_failure";
    }
    return "?";
}

namespace {

inline double fd_step(double xi) { return std::max(1e-7, 1e-7 * std::abs(xi)); }

double max_violation_of(const Eigen::VectorXd& g) {
    return g.size() == 0 ? 0.0 : std::max(0.0, g.maxCoeff());
}

struct Point {
    Eigen::VectorXd x;
    Eigen::VectorXd g;  // inequality values
    double f = 0.0;
    double merit = 0.0;
    Eigen::VectorXd grad;
    Eigen::SparseMatrix<double> jac;  // only filled on the analytic-Jacobian path
};

// Rockafellar's augmented Lagrangian for inequalities:
//   f + 1/(2 rho) * sum( max(0, lambda + rho g)^2 - lambda^2 )
class Merit {
public:
    Merit(const NlpProblem& p, int m) : p_(p), lambda_(Eigen::VectorXd::Zero(m)) {}

    double rho = 10.0;
    Eigen::VectorXd& lambda() { return lambda_; }
    const Eigen::VectorXd& lambda() const { return lambda_; }

    double raw(const Eigen::VectorXd& x, Eigen::VectorXd& g) const {
        if (p_.combined) return p_.combined(x, g);
        const double f = p_.objective(x);
        if (p_.inequalities) g = p_.inequalities(x);
        else g.resize(0);
        return f;
    }

    double combine(double f, const Eigen::VectorXd& g) const {
        double pen = 0.0;
        for (Eigen::Index i = 0; i < g.size(); ++i) {
            const double s = std::max(0.0, lambda_(i) + rho * g(i));
            pen += s * s - lambda_(i) * lambda_(i);
        }
        return f + pen / (2.0 * rho);
    }

    void evaluate(Point& pt) const {
        pt.f = raw(pt.x, pt.g);
        pt.merit = combine(pt.f, pt.g);
    }

    double merit_at(const Eigen::VectorXd& x) const {
        Eigen::VectorXd g;
        const double f = raw(x, g);
        return combine(f, g);
    }

    // Gradient at an already evaluated point.
    bool gradient(Point& pt) const {
        const Eigen::Index n = pt.x.size();
        const bool analytic_jac = static_cast<bool>(p_.inequality_jacobian) || pt.g.size() == 0;
        if (analytic_jac && (p_.objective_gradient || p_.inequality_jacobian)) {
            Eigen::VectorXd grad = p_.objective_gradient ? p_.objective_gradient(pt.x)
                                                         : objective_fd(pt.x);
            if (pt.g.size() > 0) {
                Eigen::VectorXd mult(pt.g.size());
                for (Eigen::Index i = 0; i < pt.g.size(); ++i)
                    mult(i) = std::max(0.0, lambda_(i) + rho * pt.g(i));
                pt.jac = p_.inequality_jacobian(pt.x);
                grad.noalias() += pt.jac.transpose() * mult;
            }
            pt.grad = std::move(grad);
        } else {
            pt.grad.resize(n);
            Eigen::VectorXd xp = pt.x;
            for (Eigen::Index i = 0; i < n; ++i) {
                const double h = fd_step(pt.x(i));
                xp(i) = pt.x(i) + h;
                const double fp = merit_at(xp);
                xp(i) = pt.x(i) - h;
                const double fm = merit_at(xp);
                xp(i) = pt.x(i);
                pt.grad(i) = (fp - fm) / (2.0 * h);
            }
        }
        return pt.grad.allFinite();
    }

private:
    Eigen::VectorXd objective_fd(const Eigen::VectorXd& x) const {
        return ffsb::gradient([this](const Eigen::VectorXd& z) {
            Eigen::VectorXd g;
            return raw(z, g);
        }, x);
    }

    const NlpProblem& p_;
    Eigen::VectorXd lambda_;
};

Eigen::VectorXd project(const Eigen::VectorXd& x, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
    return x.cwiseMax(lo).cwiseMin(hi);
}

enum class InnerOutcome { converged, stalled, max_iter };

struct InnerState {
    Eigen::MatrixXd H;    // inverse Hessian approximation
    bool fresh = true;    // H was just reset and has not been updated
    bool scalar = true;   // H is a multiple of the identity
};

/**
 * Restart the inverse Hessian. Without a Jacobian this is a scaled identity.
 * With one, the penalty's Gauss-Newton curvature rho * J_A^T J_A over the
 * rows currently in the penalty is added to the scaled identity and inverted,
 * so BFGS only has to learn the remaining (Lagrangian) curvature.
 */
void reset_hessian(InnerState& st, const Point& pt, const Merit& merit, bool seed) {
    const Eigen::Index n = pt.x.size();
    const double gnorm = std::max(pt.grad.lpNorm<Eigen::Infinity>(), 1e-300);
    const double scale = std::min(0.1 * (1.0 + pt.x.lpNorm<Eigen::Infinity>()) / gnorm, 1e6);
    st.fresh = true;
    if (seed && pt.jac.rows() == pt.g.size() && pt.jac.nonZeros() > 0) {
        Eigen::SparseMatrix<double> ja = pt.jac;
        for (int k = 0; k < ja.outerSize(); ++k)
            for (Eigen::SparseMatrix<double>::InnerIterator it(ja, k); it; ++it)
                if (merit.lambda()(it.row()) + merit.rho * pt.g(it.row()) <= 0.0) it.valueRef() = 0.0;
        Eigen::MatrixXd B = Eigen::MatrixXd(ja.transpose() * ja) * merit.rho;
        B.diagonal().array() += 1.0 / scale;
        Eigen::LLT<Eigen::MatrixXd> llt(B);
        if (llt.info() == Eigen::Success) {
            st.H = llt.solve(Eigen::MatrixXd::Identity(n, n));
            st.scalar = false;
            return;
        }
    }
    st.H = Eigen::MatrixXd::Identity(n, n) * scale;
    st.scalar = true;
}

InnerOutcome inner_solve(const NlpProblem& p, const NlpOptions& o, const Merit& merit, Point& pt,
                         InnerState& st, int outer, int& counter, NlpResult& out) {
    const Eigen::Index n = pt.x.size();
    const Eigen::VectorXd& lo = p.lower;
    const Eigen::VectorXd& hi = p.upper;
    merit.evaluate(pt);
    if (!std::isfinite(pt.merit) || !merit.gradient(pt)) return InnerOutcome::stalled;
    const bool seed = o.jacobian_seeding && static_cast<bool>(p.inequality_jacobian);
    if (st.fresh || st.H.rows() != n) reset_hessian(st, pt, merit, seed);

    std::vector<char> active(n);
    for (int it = 0; it < o.max_inner; ++it) {
        const Eigen::VectorXd pg = pt.x - project(pt.x - pt.grad, lo, hi);
        const double pg_norm = pg.lpNorm<Eigen::Infinity>();
        if (pg_norm <= o.tol_grad) return InnerOutcome::converged;

        // Variables pinned at a bound with the gradient pushing outward.
        const double eps = std::min(1e-8, pg_norm);
        for (Eigen::Index i = 0; i < n; ++i) {
            const bool at_lo = pt.x(i) <= lo(i) + eps * (1.0 + std::abs(lo(i))) && pt.grad(i) > 0.0;
            const bool at_hi = pt.x(i) >= hi(i) - eps * (1.0 + std::abs(hi(i))) && pt.grad(i) < 0.0;
            active[i] = (lo(i) == hi(i)) || at_lo || at_hi;
        }

        bool accepted = false;
        Point next;
        for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
            Eigen::VectorXd gm = pt.grad;
            for (Eigen::Index i = 0; i < n; ++i)
                if (active[i]) gm(i) = 0.0;
            Eigen::VectorXd d = -(st.H * gm);
            for (Eigen::Index i = 0; i < n; ++i)
                if (active[i]) d(i) = 0.0;
            if (!(gm.dot(d) < 0.0)) {
                reset_hessian(st, pt, merit, seed);
                d = -(st.H * gm);
            }
            double alpha = 1.0;
            for (int ls = 0; ls < 60; ++ls, alpha *= 0.5) {
                next.x = project(pt.x + alpha * d, lo, hi);
                const Eigen::VectorXd s = next.x - pt.x;
                const double slope = pt.grad.dot(s);
                if (s.lpNorm<Eigen::Infinity>() <= 1e-16 * (1.0 + pt.x.lpNorm<Eigen::Infinity>())) break;
                if (!(slope < 0.0)) continue;
                merit.evaluate(next);
                if (std::isfinite(next.merit) && next.merit <= pt.merit + 1e-4 * slope) {
                    accepted = true;
                    break;
                }
            }
            if (!accepted) {
                if (st.fresh) break;
                reset_hessian(st, pt, merit, seed);
            }
        }
        if (!accepted) return InnerOutcome::stalled;
        if (!merit.gradient(next)) return InnerOutcome::stalled;

        const Eigen::VectorXd s = next.x - pt.x;
        const Eigen::VectorXd y = next.grad - pt.grad;
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            if (st.fresh && st.scalar) st.H = Eigen::MatrixXd::Identity(n, n) * (sy / y.squaredNorm());
            st.fresh = false;
            const Eigen::VectorXd Hy = st.H * y;
            const double yHy = y.dot(Hy);
            const Eigen::VectorXd u = ((sy + yHy) / (sy * sy)) * s - Hy / sy;
            st.H.noalias() += u * s.transpose();
            st.H.noalias() -= (s / sy) * Hy.transpose();
        }

        const double df = pt.merit - next.merit;
        const double step = s.lpNorm<Eigen::Infinity>();
        pt = std::move(next);
        ++counter;
        if (o.record_history)
            out.history.push_back({counter, outer, pt.merit, pt.f, max_violation_of(pt.g), step});

        const double scale = 1.0 + std::abs(pt.merit);
        if (df <= o.tol_obj * scale && step <= 1e-6 * (1.0 + pt.x.lpNorm<Eigen::Infinity>()))
            return InnerOutcome::converged;
    }
    return InnerOutcome::max_iter;
}

}  // namespace

Eigen::VectorXd gradient(const ScalarFunction& f, const Eigen::VectorXd& x) {
    Eigen::VectorXd g(x.size());
    Eigen::VectorXd xp = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double h = fd_step(x(i));
        xp(i) = x(i) + h;
        const double fp = f(xp);
        xp(i) = x(i) - h;
        const double fm = f(xp);
        xp(i) = x(i);
        if (!std::isfinite(fp) || !std::isfinite(fm))
            throw std::domain_error("gradient: non-finite evaluation at component " + std::to_string(i));
        g(i) = (fp - fm) / (2.0 * h);
    }
    return g;
}

NlpResult minimize(const NlpProblem& p, const NlpOptions& o) {
    if (p.dim <= 0) throw std::invalid_argument("minimize: dim must be positive");
    if (p.x0.size() != p.dim || p.lower.size() != p.dim || p.upper.size() != p.dim)
        throw std::invalid_argument("minimize: x0/bounds dimension mismatch");
    if (!p.objective && !p.combined) throw std::invalid_argument("minimize: no objective");
    for (int i = 0; i < p.dim; ++i) {
        if (p.lower(i) > p.upper(i)) throw std::invalid_argument("minimize: lower > upper");
        if (p.x0(i) < p.lower(i) || p.x0(i) > p.upper(i))
            throw std::invalid_argument("minimize: x0 outside bounds at index " + std::to_string(i));
    }

    Point pt;
    pt.x = p.x0;
    Eigen::VectorXd g0;
    Merit probe(p, 0);
    probe.raw(pt.x, g0);
    const int m = static_cast<int>(g0.size());

    Merit merit(p, m);
    merit.rho = o.initial_penalty;
    NlpResult out;
    InnerState st;
    int counter = 0;
    double prev_violation = std::numeric_limits<double>::infinity();
    bool stalled_last = false;

    for (int outer = 0; outer < o.max_outer; ++outer) {
        const InnerOutcome inner = inner_solve(p, o, merit, pt, st, outer, counter, out);
        stalled_last = inner == InnerOutcome::stalled;
        out.outer_iterations = outer + 1;
        const double v = max_violation_of(pt.g);
        auto& lambda = merit.lambda();
        for (int i = 0; i < m; ++i)
            lambda(i) = std::clamp(lambda(i) + merit.rho * pt.g(i), 0.0, o.multiplier_cap);
        if (v <= o.tol_con && inner != InnerOutcome::max_iter) {
            out.status = NlpStatus::converged;
            break;
        }
        if (v > 0.25 * prev_violation && merit.rho < o.max_penalty) {
            const double grown = std::min(merit.rho * o.penalty_growth, o.max_penalty);
            // Keep the curvature learned so far; the penalty term dominates it, so
            // shrink the inverse in proportion.
            st.H *= merit.rho / grown;
            merit.rho = grown;
        }
        prev_violation = v;
        out.status = stalled_last ? NlpStatus::line_search_failure : NlpStatus::max_iter;
    }

    out.x_star = pt.x;
    Eigen::VectorXd g;
    out.f_star = merit.raw(pt.x, g);
    out.max_violation = max_violation_of(g);
    if (out.status == NlpStatus::converged && out.max_violation > o.tol_con)
        out.status = NlpStatus::max_iter;
    out.iterations = counter;
    out.multipliers = merit.lambda();
    out.penalty = merit.rho;
    return out;
}

void write_iteration_log(std::ostream& os, const NlpResult& result) {
    os << "iter,f,max_violation,step_norm\n";
    const auto prec = os.precision(17);
    for (const auto& r : result.history)
        os << r.iteration << ',' << r.f << ',' << r.max_violation << ',' << r.step_norm << '\n';
    os.precision(prec);
}

}  // namespace ffsb
