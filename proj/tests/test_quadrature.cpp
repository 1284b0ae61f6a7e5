#include <doctest.h>

#include <cmath>

#include "helmdd/grid.hpp"
#include "helmdd/quadrature.hpp"

using namespace helmdd;

TEST_CASE("Gauss-Legendre exactness on [0,1]") {
    for (int n = 1; n <= 12; ++n) {
        const GaussRule r = gauss_legendre(n);
        REQUIRE(r.points.size() == static_cast<std::size_t>(n));
        for (int d = 0; d <= 2 * n - 1; ++d) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += r.weights[i] * std::pow(r.points[i], d);
            CHECK(s == doctest::Approx(1.0 / (d + 1)).epsilon(1e-14));
        }
        // Not exact one degree higher: for x^(2n) the defect is (n!)^4 / ((2n+1) ((2n)!)^2) on [0,1].
        if (n <= 4) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += r.weights[i] * std::pow(r.points[i], 2 * n);
            const double e = std::pow(std::tgamma(n + 1.0), 4) / ((2 * n + 1) * std::pow(std::tgamma(2 * n + 1.0), 2));
            CHECK(1.0 / (2 * n + 1) - s == doctest::Approx(e).epsilon(1e-6));
        }
        for (int i = 0; i < n; ++i) {
            CHECK(r.points[i] > 0.0);
            CHECK(r.points[i] < 1.0);
            CHECK(r.weights[i] > 0.0);
            if (i > 0) CHECK(r.points[i] > r.points[i - 1]);
            CHECK(r.points[i] == doctest::Approx(1.0 - r.points[n - 1 - i]).epsilon(1e-14));
        }
    }
    CHECK_THROWS_AS(gauss_legendre(0), Error);
    CHECK_THROWS_AS(gauss_legendre(33), Error);
}

TEST_CASE("three-point rule against tabulated values") {
    const GaussRule r = gauss_legendre(3);
    CHECK(r.points[0] == doctest::Approx(0.5 - 0.5 * std::sqrt(0.6)).epsilon(1e-15));
    CHECK(r.points[1] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(r.weights[0] == doctest::Approx(5.0 / 18.0).epsilon(1e-15));
    CHECK(r.weights[1] == doctest::Approx(8.0 / 18.0).epsilon(1e-15));
}

TEST_CASE("Lagrange basis: nodal property, partition of unity, derivatives") {
    for (int p : {1, 2}) {
        const LagrangeBasis1D b(p);
        CHECK(b.size() == p + 1);
        for (int a = 0; a <= p; ++a)
            for (int c = 0; c <= p; ++c) CHECK(b.value(a, b.node(c)) == doctest::Approx(a == c ? 1.0 : 0.0));
        for (double t : {0.0, 0.13, 0.5, 0.77, 1.0}) {
            double sum = 0.0, dsum = 0.0;
            for (int a = 0; a <= p; ++a) {
                sum += b.value(a, t);
                dsum += b.derivative(a, t);
                const double eps = 1e-6;
                CHECK(b.derivative(a, t) ==
                      doctest::Approx((b.value(a, t + eps) - b.value(a, t - eps)) / (2 * eps)).epsilon(1e-8));
            }
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-15));
            CHECK(dsum == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));
        }
    }
    // Quadratic: phi_1(t) = 4 t (1 - t).
    const LagrangeBasis1D q(2);
    CHECK(q.value(1, 0.25) == doctest::Approx(0.75));
    CHECK(q.derivative(1, 0.25) == doctest::Approx(2.0));
    CHECK_THROWS_AS(LagrangeBasis1D(3), Error);
}
