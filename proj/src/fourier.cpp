#include "ffsb/fourier.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "ffsb/scenario.hpp"

namespace ffsb {

namespace {

using RowRef = Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>>;

// Weights of every coefficient at normalized time tau, with derivatives taken
// with respect to tau (multiply by 1/T, 1/T^2 for time derivatives).
void fill_normalized_row(int order, double tau, RowRef v, RowRef d1, RowRef d2) {
    v(0) = 0.5;
    d1(0) = 0.0;
    d2(0) = 0.0;
    for (int n = 1; n <= order; ++n) {
        const double w = n * kPi;
        const double c = std::cos(w * tau);
        const double s = std::sin(w * tau);
        v(cos_index(n)) = c;
        v(sin_index(n)) = s;
        d1(cos_index(n)) = -w * s;
        d1(sin_index(n)) = w * c;
        d2(cos_index(n)) = -w * w * c;
        d2(sin_index(n)) = -w * w * s;
    }
}

void check_coeffs(int order, const Eigen::VectorXd& coeffs) {
    if (coeffs.size() != coefficient_count(order))
        throw std::invalid_argument("fourier: expected " + std::to_string(coefficient_count(order)) +
                                    " coefficients, got " + std::to_string(coeffs.size()));
}

}  // namespace

FourierBasis::FourierBasis(int order, double tof, int dp) : order_(order), tof_(tof) {
    if (order < 1) throw std::invalid_argument("build_basis: order must be >= 1");
    if (dp < 2) throw std::invalid_argument("build_basis: dp must be >= 2");
    if (!(tof > 0.0) || !std::isfinite(tof))
        throw std::invalid_argument("build_basis: tof must be positive and finite");

    auto t = std::make_shared<Tables>();
    const int cols = coefficient_count(order);
    t->tau = Eigen::VectorXd::LinSpaced(dp, 0.0, 1.0);
    t->value.resize(dp, cols);
    t->d1.resize(dp, cols);
    t->d2.resize(dp, cols);
    for (int k = 0; k < dp; ++k)
        fill_normalized_row(order, t->tau(k), t->value.row(k), t->d1.row(k), t->d2.row(k));
    tables_ = std::move(t);
}

FourierBasis::FourierBasis(std::shared_ptr<const Tables> tables, int order, double tof)
    : tables_(std::move(tables)), order_(order), tof_(tof) {}

FourierBasis FourierBasis::with_tof(double tof) const {
    if (!(tof > 0.0) || !std::isfinite(tof))
        throw std::invalid_argument("FourierBasis::with_tof: tof must be positive and finite");
    return FourierBasis(tables_, order_, tof);
}

Eigen::VectorXd FourierBasis::grid() const { return tables_->tau * tof_; }

Eigen::MatrixXd FourierBasis::d1_rows() const { return tables_->d1 / tof_; }

Eigen::MatrixXd FourierBasis::d2_rows() const { return tables_->d2 / (tof_ * tof_); }

SeriesTrace eval_state(const FourierBasis& basis, const Eigen::VectorXd& coeffs) {
    check_coeffs(basis.order(), coeffs);
    const double T = basis.tof();
    SeriesTrace out;
    out.value.noalias() = basis.value_rows() * coeffs;
    out.rate.noalias() = basis.d1_normalized() * coeffs;
    out.rate /= T;
    out.accel.noalias() = basis.d2_normalized() * coeffs;
    out.accel /= T * T;
    return out;
}

BasisRow basis_row(int order, double tof, double t) {
    if (order < 1) throw std::invalid_argument("basis_row: order must be >= 1");
    if (!(tof > 0.0)) throw std::invalid_argument("basis_row: tof must be positive");
    const int cols = coefficient_count(order);
    BasisRow row{Eigen::RowVectorXd(cols), Eigen::RowVectorXd(cols), Eigen::RowVectorXd(cols)};
    fill_normalized_row(order, t / tof, row.value, row.rate, row.accel);
    row.rate /= tof;
    row.accel /= tof * tof;
    return row;
}

SeriesSample eval_state_at(int order, double tof, const Eigen::VectorXd& coeffs, double t) {
    check_coeffs(order, coeffs);
    if (!(t >= 0.0 && t <= tof))
        throw std::out_of_range("eval_state_at: t=" + std::to_string(t) + " outside [0, " +
                                std::to_string(tof) + "]");
    const double tau = t / tof;
    double v = 0.5 * coeffs(0), d1 = 0.0, d2 = 0.0;
    for (int n = 1; n <= order; ++n) {
        const double w = n * kPi;
        const double c = std::cos(w * tau);
        const double s = std::sin(w * tau);
        const double a = coeffs(cos_index(n));
        const double b = coeffs(sin_index(n));
        v += a * c + b * s;
        d1 += w * (b * c - a * s);
        d2 -= w * w * (a * c + b * s);
    }
    return {v, d1 / tof, d2 / (tof * tof)};
}

}  // namespace ffsb
