#pragma once

#include <vector>

namespace helmdd {

/// Gauss-Legendre rule on [0, 1]; exact for polynomials of degree 2n-1.
struct GaussRule {
    std::vector<double> points;
    std::vector<double> weights;
};

GaussRule gauss_legendre(int n);

/// Equispaced 1D Lagrange basis of order p on [0, 1].
class LagrangeBasis1D {
public:
    explicit LagrangeBasis1D(int p);

    int order() const { return p_; }
    int size() const { return p_ + 1; }
    double node(int a) const { return static_cast<double>(a) / p_; }
    double value(int a, double t) const;
    double derivative(int a, double t) const;

private:
    int p_;
};

}  // namespace helmdd
