// Planar two-body dynamics in polar coordinates with a thrust acceleration
// directed along (or against) the flight path.
#pragma once

#include <stdexcept>
#include <vector>

namespace ffsb {

struct StateSample {
    double t = 0.0;
    double r = 0.0;
    double theta = 0.0;
    double rdot = 0.0;
    double thetadot = 0.0;
    double rddot = 0.0;
    double thetaddot = 0.0;
};

/// Signed thrust acceleration and steering angle. A negative ta fires against
/// the branch-0 direction, which stands in for the pi-shifted branch.
struct ThrustSample {
    double t = 0.0;
    double ta = 0.0;
    double alpha = 0.0;
};

struct TrajectoryProfile {
    std::vector<StateSample> samples;
    std::vector<ThrustSample> thrust;
    double tof = 0.0;
};

class SingularSteeringError : public std::runtime_error {
public:
    SingularSteeringError(const std::string& what, double t) : std::runtime_error(what), t_(t) {}
    double time() const { return t_; }

private:
    double t_;
};

/// Below this |cos(alpha)| the thrust magnitude is undefined (radial flight).
inline constexpr double kSingularCosAlpha = 1e-9;

/// Combined equation-of-motion residual; zero on any dynamically consistent
/// state with flight-path-aligned thrust (including ballistic arcs).
inline double eom_residual(const StateSample& s, double mu) {
    const double rtd = s.r * s.thetadot;
    return s.r * s.r * (s.thetadot * s.rddot - s.rdot * s.thetaddot) +
           s.thetadot * (mu - 2.0 * s.r * s.rdot * s.rdot) - rtd * rtd * rtd;
}

/// Flight path angle atan2(rdot, r*thetadot) plus pi*branch, wrapped to (-pi, pi].
double steering_angle(const StateSample& s, int branch = 0);

/// Non-throwing thrust evaluation used inside optimizer loops.
struct ThrustComponents {
    double ta = 0.0;
    double alpha = 0.0;
    double cos_alpha = 1.0;
    bool singular = false;
};
ThrustComponents thrust_components(const StateSample& s);

/// Thrust acceleration from the tangential equation with the branch-0 angle.
/// Throws SingularSteeringError when |cos(alpha)| < kSingularCosAlpha.
ThrustSample thrust_accel(const StateSample& s);

/// Radial equation residual  rddot - r thetadot^2 + mu/r^2 - ta sin(alpha).
double radial_residual(const StateSample& s, const ThrustSample& thrust, double mu);

/// Trapezoidal integral of |ta| over the profile's time grid.
double delta_v(const TrajectoryProfile& profile);

/// Right-hand side of the polar equations of motion for state
/// (r, theta, rdot, thetadot) under thrust (ta, alpha).
struct PolarDerivative {
    double rdot, thetadot, rddot, thetaddot;
};
PolarDerivative polar_rhs(double r, double rdot, double thetadot, double ta, double alpha, double mu);

}  // namespace ffsb
