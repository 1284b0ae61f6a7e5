#include "helmdd/pml.hpp"

namespace helmdd {

PmlProfile PmlProfile::smooth_capped(double a, double kappa, double kappa_lin) {
    if (!(kappa_lin > 0.0) || !(kappa_lin < kappa)) throw Error("smooth_capped: need 0 < kappa_lin < kappa");
    return {Kind::SmoothCapped, a, kappa, kappa_lin};
}

// Quintic smoothstep S(t) = 10t^3 - 15t^4 + 6t^5 on [0,1], clamped to 1 beyond.
double PmlProfile::f(double x) const {
    if (x <= 0.0) return 0.0;
    if (kind == Kind::Cubic) return strength / 3.0 * x * x * x;
    const double t = x / kappa_lin;
    const double scale = strength * kappa_lin * kappa_lin * kappa_lin;
    if (t >= 1.0) return scale * (0.5 + (t - 1.0));
    const double t4 = t * t * t * t;
    return scale * (2.5 * t4 - 3.0 * t4 * t + t4 * t * t);
}

double PmlProfile::df(double x) const {
    if (x <= 0.0) return 0.0;
    if (kind == Kind::Cubic) return strength * x * x;
    const double t = x / kappa_lin;
    const double scale = strength * kappa_lin * kappa_lin;
    if (t >= 1.0) return scale;
    const double t3 = t * t * t;
    return scale * (10.0 * t3 - 15.0 * t3 * t + 6.0 * t3 * t * t);
}

double PmlProfile::d2f(double x) const {
    if (x <= 0.0) return 0.0;
    if (kind == Kind::Cubic) return 2.0 * strength * x;
    const double t = x / kappa_lin;
    if (t >= 1.0) return 0.0;
    const double t2 = t * t;
    return strength * kappa_lin * (30.0 * t2 - 60.0 * t2 * t + 30.0 * t2 * t2);
}

double AxisScaling::g(double x) const {
    if (x >= hi) return profile.f(x - hi);
    if (x <= lo) return -profile.f(lo - x);
    return 0.0;
}

double AxisScaling::dg(double x) const {
    if (x >= hi) return profile.df(x - hi);
    if (x <= lo) return profile.df(lo - x);
    return 0.0;
}

double AxisScaling::d2g(double x) const {
    if (x >= hi) return profile.d2f(x - hi);
    if (x <= lo) return -profile.d2f(lo - x);
    return 0.0;
}

cplx gamma(const AxisScaling& ax, double x) { return {1.0, ax.dg(x)}; }

cplx gamma_prime(const AxisScaling& ax, double x) { return {0.0, ax.d2g(x)}; }

CoefficientField make_field(const Rect& omega_int, const PmlProfile& profile, double k,
                            std::function<double(Point)> wavespeed) {
    omega_int.validate();
    return {{omega_int.x_lo, omega_int.x_hi, profile}, {omega_int.y_lo, omega_int.y_hi, profile}, k,
            std::move(wavespeed)};
}

DBeta eval_D_beta(const CoefficientField& cf, Point x) {
    const cplx g1 = gamma(cf.axis_x, x.x);
    const cplx g2 = gamma(cf.axis_y, x.y);
    const cplx i1 = 1.0 / g1;
    const cplx i2 = 1.0 / g2;
    const cplx i1sq = i1 * i1;
    const cplx i2sq = i2 * i2;
    return {i1sq, i2sq, gamma_prime(cf.axis_x, x.x) * i1sq * i1, gamma_prime(cf.axis_y, x.y) * i2sq * i2};
}

CoefficientField local_field(const CoefficientField& global, const Rect& sub_box) {
    sub_box.validate();
    CoefficientField out = global;
    out.axis_x.lo = sub_box.x_lo;
    out.axis_x.hi = sub_box.x_hi;
    out.axis_y.lo = sub_box.y_lo;
    out.axis_y.hi = sub_box.y_hi;
    return out;
}

}  // namespace helmdd
