#include "ffsb/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ffsb/fourier.hpp"

namespace ffsb {

namespace {

CoefficientMap build_map(SeriesKind kind, int order, double tof, const EndpointConditions& c) {
    if (order < 2) throw BoundaryError("boundary map: order must be >= 2, got " + std::to_string(order));
    if (!(tof > 0.0) || !std::isfinite(tof)) throw BoundaryError("boundary map: tof must be positive");

    const int n = coefficient_count(order);
    const BasisRow at0 = basis_row(order, tof, 0.0);
    const BasisRow atT = basis_row(order, tof, tof);

    // Constraint rows and right-hand sides.
    std::vector<Eigen::RowVectorXd> rows;
    std::vector<double> rhs;
    rows.push_back(at0.value);
    rhs.push_back(c.value_i);
    rows.push_back(at0.rate);
    rhs.push_back(c.rate_i);
    if (c.value_f) {
        rows.push_back(atT.value);
        rhs.push_back(*c.value_f);
    }
    rows.push_back(atT.rate);
    rhs.push_back(c.rate_f);

    CoefficientMap map;
    map.kind = kind;
    map.order = order;
    map.tof = tof;
    map.conditions = c;
    map.eliminated = c.value_f ? std::vector<int>{cos_index(1), sin_index(1), cos_index(2), sin_index(2)}
                               : std::vector<int>{cos_index(1), sin_index(1), sin_index(2)};
    for (int i = 0; i < n; ++i)
        if (std::find(map.eliminated.begin(), map.eliminated.end(), i) == map.eliminated.end())
            map.free_indices.push_back(i);

    const int m = static_cast<int>(rows.size());
    const int nf = map.n_free();
    Eigen::MatrixXd elim(m, m), free_cols(m, nf);
    Eigen::VectorXd b(m);
    for (int r = 0; r < m; ++r) {
        for (int j = 0; j < m; ++j) elim(r, j) = rows[r](map.eliminated[j]);
        for (int j = 0; j < nf; ++j) free_cols(r, j) = rows[r](map.free_indices[j]);
        b(r) = rhs[r];
    }

    // The eliminated block decouples into [[1,1],[-1,1]]-type pairs scaled by
    // harmonic frequencies; it is never singular for tof > 0.
    Eigen::FullPivLU<Eigen::MatrixXd> lu(elim);
    if (!lu.isInvertible()) throw BoundaryError("boundary map: singular elimination system");

    const Eigen::MatrixXd g_elim = -lu.solve(free_cols);
    const Eigen::VectorXd o_elim = lu.solve(b);

    map.gain = Eigen::MatrixXd::Zero(n, nf);
    map.offset = Eigen::VectorXd::Zero(n);
    for (int j = 0; j < nf; ++j) map.gain(map.free_indices[j], j) = 1.0;
    for (int r = 0; r < m; ++r) {
        map.gain.row(map.eliminated[r]) = g_elim.row(r);
        map.offset(map.eliminated[r]) = o_elim(r);
    }
    return map;
}

}  // namespace

Eigen::VectorXd CoefficientMap::full(const Eigen::VectorXd& free) const {
    if (free.size() != n_free())
        throw BoundaryError("CoefficientMap::full: expected " + std::to_string(n_free()) +
                            " free coefficients, got " + std::to_string(free.size()));
    Eigen::VectorXd out = offset;
    out.noalias() += gain * free;
    return out;
}

CoefficientMap build_radius_map(int order, double tof, double r_i, double rdot_i, double r_f,
                                double rdot_f) {
    return build_map(SeriesKind::radius, order, tof, {r_i, rdot_i, r_f, rdot_f});
}

CoefficientMap build_angle_map(int order, double tof, double theta_i, double thetadot_i,
                               double thetadot_f, std::optional<double> theta_f) {
    return build_map(SeriesKind::angle, order, tof, {theta_i, thetadot_i, theta_f, thetadot_f});
}

CoefficientMap refresh_map(const CoefficientMap& map, double tof, std::optional<double> theta_f) {
    EndpointConditions c = map.conditions;
    if (theta_f) {
        if (map.kind != SeriesKind::angle)
            throw BoundaryError("refresh_map: final angle supplied for a radius map");
        if (!c.value_f)
            throw BoundaryError("refresh_map: final value supplied for a map with a free final value");
        c.value_f = theta_f;
    }
    return build_map(map.kind, map.order, tof, c);
}

Eigen::Vector4d endpoint_residuals(const CoefficientMap& map, const Eigen::VectorXd& full) {
    const BasisRow at0 = basis_row(map.order, map.tof, 0.0);
    const BasisRow atT = basis_row(map.order, map.tof, map.tof);
    const auto& c = map.conditions;
    Eigen::Vector4d res;
    res(0) = at0.value.dot(full) - c.value_i;
    res(1) = at0.rate.dot(full) - c.rate_i;
    res(2) = c.value_f ? atT.value.dot(full) - *c.value_f : 0.0;
    res(3) = atT.rate.dot(full) - c.rate_f;
    return res;
}

}  // namespace ffsb
