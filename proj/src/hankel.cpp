#include "helmdd/hankel.hpp"

#include <cmath>

namespace helmdd {

// libstdc++ evaluates these by series for small arguments and by the Hankel asymptotic
// expansion for large ones.
std::complex<double> hankel1_0(double z) {
    if (!(z > 0.0)) throw Error("hankel1_0: argument must be positive");
    return {std::cyl_bessel_j(0.0, z), std::cyl_neumann(0.0, z)};
}

std::complex<double> hankel1_1(double z) {
    if (!(z > 0.0)) throw Error("hankel1_1: argument must be positive");
    return {std::cyl_bessel_j(1.0, z), std::cyl_neumann(1.0, z)};
}

std::complex<double> hankel_reference(double k, Point x0, Point x) {
    const double r = std::hypot(x.x - x0.x, x.y - x0.y);
    if (r < 1e-12) throw Error("hankel_reference: evaluation at the source point");
    return k * k * std::complex<double>(0.0, 0.25) * hankel1_0(k * r);
}

}  // namespace helmdd
