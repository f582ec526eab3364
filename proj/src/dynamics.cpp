#include "ffsb/dynamics.hpp"

#include <cmath>
#include <string>

#include "ffsb/scenario.hpp"

namespace ffsb {

double steering_angle(const StateSample& s, int branch) {
    const double h = s.r * s.thetadot;
    if (s.rdot == 0.0 && h == 0.0)
        throw SingularSteeringError("steering_angle: zero velocity at t=" + std::to_string(s.t), s.t);
    double alpha = std::atan2(s.rdot, h) + kPi * branch;
    // Wrap into (-pi, pi].
    while (alpha > kPi) alpha -= 2.0 * kPi;
    while (alpha <= -kPi) alpha += 2.0 * kPi;
    return alpha;
}

ThrustComponents thrust_components(const StateSample& s) {
    ThrustComponents out;
    const double h = s.r * s.thetadot;
    const double v = std::hypot(s.rdot, h);
    if (v == 0.0) {
        out.singular = true;
        out.cos_alpha = 0.0;
        return out;
    }
    out.alpha = std::atan2(s.rdot, h);
    out.cos_alpha = h / v;
    if (std::abs(out.cos_alpha) < kSingularCosAlpha) {
        out.singular = true;
        return out;
    }
    out.ta = (2.0 * s.rdot * s.thetadot + s.r * s.thetaddot) / out.cos_alpha;
    return out;
}

ThrustSample thrust_accel(const StateSample& s) {
    const ThrustComponents c = thrust_components(s);
    if (c.singular)
        throw SingularSteeringError(
            "thrust_accel: near-radial flight (|cos alpha| < 1e-9) at t=" + std::to_string(s.t), s.t);
    return {s.t, c.ta, c.alpha};
}

double radial_residual(const StateSample& s, const ThrustSample& thrust, double mu) {
    return s.rddot - s.r * s.thetadot * s.thetadot + mu / (s.r * s.r) -
           thrust.ta * std::sin(thrust.alpha);
}

double delta_v(const TrajectoryProfile& profile) {
    const auto& th = profile.thrust;
    double sum = 0.0;
    for (std::size_t k = 1; k < th.size(); ++k)
        sum += 0.5 * (std::abs(th[k].ta) + std::abs(th[k - 1].ta)) * (th[k].t - th[k - 1].t);
    return sum;
}

PolarDerivative polar_rhs(double r, double rdot, double thetadot, double ta, double alpha, double mu) {
    return {rdot, thetadot, r * thetadot * thetadot - mu / (r * r) + ta * std::sin(alpha),
            (ta * std::cos(alpha) - 2.0 * rdot * thetadot) / r};
}

}  // namespace ffsb
