// Finite Fourier series basis over a half-period horizon [0, T].
//
// Coefficient layout, shared by every module:
//   (a0, a1, b1, a2, b2, ..., an, bn)
// so harmonic n has its cosine weight at index 2n-1 and its sine weight at 2n.
// The series is  x(t) = a0/2 + sum_n [a_n cos(n pi t / T) + b_n sin(n pi t / T)].
#pragma once

#include <memory>

#include <Eigen/Dense>

namespace ffsb {

inline int coefficient_count(int order) { return 2 * order + 1; }
inline int cos_index(int harmonic) { return 2 * harmonic - 1; }
inline int sin_index(int harmonic) { return 2 * harmonic; }

/// Position, velocity and acceleration of one series at one time.
struct SeriesSample {
    double value = 0.0;
    double rate = 0.0;
    double accel = 0.0;
};

/// Position, velocity and acceleration of one series over a grid.
struct SeriesTrace {
    Eigen::VectorXd value;
    Eigen::VectorXd rate;
    Eigen::VectorXd accel;
};

/**
 * Sampled basis tables for one series order on a uniform grid that includes
 * both endpoints.
 *
 * The trigonometric tables only depend on the normalized time t/T, so they are
 * built once and shared between copies; changing the horizon with with_tof()
 * only rescales the derivative tables by 1/T and 1/T^2.
 */
class FourierBasis {
public:
    FourierBasis(int order, double tof, int dp);

    int order() const { return order_; }
    int size() const { return tables_->value.cols(); }
    int points() const { return tables_->value.rows(); }
    double tof() const { return tof_; }

    /// Same tables, new horizon.
    FourierBasis with_tof(double tof) const;

    Eigen::VectorXd grid() const;
    const Eigen::MatrixXd& value_rows() const { return tables_->value; }
    Eigen::MatrixXd d1_rows() const;
    Eigen::MatrixXd d2_rows() const;

    /// Rows of the normalized derivative tables (d/dtau with tau = t/T).
    const Eigen::MatrixXd& d1_normalized() const { return tables_->d1; }
    const Eigen::MatrixXd& d2_normalized() const { return tables_->d2; }

private:
    struct Tables {
        Eigen::VectorXd tau;
        Eigen::MatrixXd value;
        Eigen::MatrixXd d1;
        Eigen::MatrixXd d2;
    };

    FourierBasis(std::shared_ptr<const Tables> tables, int order, double tof);

    std::shared_ptr<const Tables> tables_;
    int order_ = 0;
    double tof_ = 0.0;
};

inline FourierBasis build_basis(int order, double tof, int dp) { return {order, tof, dp}; }

/// Evaluate the series on the basis grid. Throws std::invalid_argument on a
/// dimension mismatch.
SeriesTrace eval_state(const FourierBasis& basis, const Eigen::VectorXd& coeffs);

/// Pointwise evaluation, 0 <= t <= tof. Throws std::out_of_range otherwise.
SeriesSample eval_state_at(int order, double tof, const Eigen::VectorXd& coeffs, double t);

/// Row of weights (value, d/dt, d2/dt2) of every coefficient at time t.
/// Used by the boundary-condition elimination.
struct BasisRow {
    Eigen::RowVectorXd value;
    Eigen::RowVectorXd rate;
    Eigen::RowVectorXd accel;
};
BasisRow basis_row(int order, double tof, double t);

}  // namespace ffsb
