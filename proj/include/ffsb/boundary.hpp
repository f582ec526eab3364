// Boundary-condition elimination: full coefficients = gain * free + offset.
#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace ffsb {

class BoundaryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Which series the map belongs to; decides the eliminated coefficients.
enum class SeriesKind { radius, angle };

/// Endpoint data imposed on a series. Rates are time derivatives.
struct EndpointConditions {
    double value_i = 0.0;
    double rate_i = 0.0;
    std::optional<double> value_f;  // absent: final value left free
    double rate_f = 0.0;
};

/**
 * Affine map from the free Fourier coefficients to the full coefficient vector.
 *
 * Eliminated coefficients are the lowest harmonics: the endpoint values fix
 * (a1, a2) and the endpoint rates fix (b1, b2), because cosines only show up in
 * the values at t in {0, T} and sines only in the rates. A free final value
 * drops a2 from the eliminated set. a0 always stays free.
 */
struct CoefficientMap {
    SeriesKind kind = SeriesKind::radius;
    int order = 0;
    double tof = 0.0;
    EndpointConditions conditions;
    std::vector<int> eliminated;
    std::vector<int> free_indices;
    Eigen::MatrixXd gain;    // (2*order+1) x n_free
    Eigen::VectorXd offset;  // 2*order+1

    int n_free() const { return static_cast<int>(free_indices.size()); }
    int n_full() const { return static_cast<int>(offset.size()); }

    Eigen::VectorXd full(const Eigen::VectorXd& free) const;
};

CoefficientMap build_radius_map(int order, double tof, double r_i, double rdot_i, double r_f,
                                double rdot_f);

CoefficientMap build_angle_map(int order, double tof, double theta_i, double thetadot_i,
                               double thetadot_f, std::optional<double> theta_f);

/// Rebuild for a new horizon (and, for angle maps in fixed mode, a new final
/// angle). The eliminated index set never changes.
CoefficientMap refresh_map(const CoefficientMap& map, double tof,
                           std::optional<double> theta_f = std::nullopt);

/// Endpoint residuals (value_i, rate_i, value_f, rate_f) of a full vector
/// against the map's conditions; value_f residual is 0 when it is free.
Eigen::Vector4d endpoint_residuals(const CoefficientMap& map, const Eigen::VectorXd& full);

}  // namespace ffsb
