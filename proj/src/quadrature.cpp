#include "helmdd/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "helmdd/grid.hpp"

namespace helmdd {

GaussRule gauss_legendre(int n) {
    if (n < 1 || n > 32) throw Error("gauss_legendre: unsupported number of points");
    GaussRule rule;
    rule.points.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        // Newton on P_n from the Chebyshev-like initial guess.
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0;
            double p1 = x;
            for (int m = 2; m <= n; ++m) {
                const double p2 = ((2.0 * m - 1.0) * x * p1 - (m - 1.0) * p0) / m;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        // Recompute the derivative at the converged root.
        double p0 = 1.0;
        double p1 = x;
        for (int m = 2; m <= n; ++m) {
            const double p2 = ((2.0 * m - 1.0) * x * p1 - (m - 1.0) * p0) / m;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        // Map [-1,1] -> [0,1], ascending order.
        rule.points[n - 1 - i] = 0.5 * (x + 1.0);
        rule.weights[n - 1 - i] = 0.5 * w;
    }
    return rule;
}

LagrangeBasis1D::LagrangeBasis1D(int p) : p_(p) {
    if (p < 1 || p > 2) throw Error("LagrangeBasis1D: order must be 1 or 2");
}

double LagrangeBasis1D::value(int a, double t) const {
    double v = 1.0;
    for (int b = 0; b <= p_; ++b)
        if (b != a) v *= (t - node(b)) / (node(a) - node(b));
    return v;
}

double LagrangeBasis1D::derivative(int a, double t) const {
    double sum = 0.0;
    for (int c = 0; c <= p_; ++c) {
        if (c == a) continue;
        double term = 1.0 / (node(a) - node(c));
        for (int b = 0; b <= p_; ++b)
            if (b != a && b != c) term *= (t - node(b)) / (node(a) - node(b));
        sum += term;
    }
    return sum;
}

}  // namespace helmdd
