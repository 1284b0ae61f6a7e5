#pragma once

#include <complex>

#include "helmdd/grid.hpp"

namespace helmdd {

/// H^(1)_0(z) = J_0(z) + i Y_0(z) for real z > 0.
std::complex<double> hankel1_0(double z);
/// H^(1)_1(z), used for derivatives (d/dz H_0 = -H_1).
std::complex<double> hankel1_1(double z);

/// Outgoing solution of -k^-2 Lap u - u = delta_{x0} in the plane: k^2 (i/4) H^(1)_0(k |x - x0|).
/// Throws for |x - x0| below 1e-12 (the singularity).
std::complex<double> hankel_reference(double k, Point x0, Point x);

}  // namespace helmdd
