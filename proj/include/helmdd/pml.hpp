#pragma once

#include <complex>
#include <functional>

#include "helmdd/grid.hpp"

namespace helmdd {

using cplx = std::complex<double>;

/// One-dimensional PML scaling function f_s on [0, inf).
///
/// Cubic:        f_s(x) = (a/3) x^3.
/// SmoothCapped: f_s'(x) = a kappa_lin^2 S(x / kappa_lin) with S the quintic smoothstep,
///               so f_s'' vanishes identically for x >= kappa_lin and f_s' matches the cubic
///               profile's slope there.
struct PmlProfile {
    enum class Kind { Cubic, SmoothCapped };
    Kind kind = Kind::Cubic;
    double strength = 0.0;  // a
    double width = 0.0;     // kappa
    double kappa_lin = 0.0; // SmoothCapped only

    static PmlProfile cubic(double a, double kappa) { return {Kind::Cubic, a, kappa, 0.0}; }
    static PmlProfile smooth_capped(double a, double kappa, double kappa_lin);

    double f(double x) const;
    double df(double x) const;
    double d2f(double x) const;
};

/// Stretching along one axis: unstretched on [lo, hi], f_s applied outward on both sides.
struct AxisScaling {
    double lo = 0.0;
    double hi = 1.0;
    PmlProfile profile;

    double g(double x) const;
    double dg(double x) const;
    double d2g(double x) const;
};

/// gamma(x) = 1 + i g'(x).
cplx gamma(const AxisScaling& ax, double x);
/// gamma'(x) = i g''(x).
cplx gamma_prime(const AxisScaling& ax, double x);

struct DBeta {
    cplx d11;
    cplx d22;
    cplx beta1;
    cplx beta2;
};

/// Coefficients of the scaled Helmholtz operator: two axis stretchings, wavespeed, wavenumber.
struct CoefficientField {
    AxisScaling axis_x;
    AxisScaling axis_y;
    double k = 1.0;
    /// Empty means c == 1.
    std::function<double(Point)> wavespeed;

    double c(Point x) const { return wavespeed ? wavespeed(x) : 1.0; }
    /// The box on which both stretchings vanish.
    Rect unstretched_box() const { return {axis_x.lo, axis_x.hi, axis_y.lo, axis_y.hi}; }
};

CoefficientField make_field(const Rect& omega_int, const PmlProfile& profile, double k,
                            std::function<double(Point)> wavespeed = {});

/// D = diag(gamma1^-2, gamma2^-2), beta = (gamma1' gamma1^-3, gamma2' gamma2^-3).
DBeta eval_D_beta(const CoefficientField& cf, Point x);

/// Same profile, c and k, with the unstretched box replaced by a subdomain's interior box.
CoefficientField local_field(const CoefficientField& global, const Rect& sub_box);

}  // namespace helmdd
