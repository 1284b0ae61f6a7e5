#include <doctest.h>

#include <cmath>
#include <map>
#include <numbers>

#include "helmdd/assembly.hpp"
#include "helmdd/decomp.hpp"
#include "support.hpp"

using namespace helmdd;

namespace {

CoefficientField no_pml(const Rect& r, double k) { return make_field(r, PmlProfile::cubic(0.0, 1.0), k); }

}  // namespace

TEST_CASE("p = 1 matrix matches hand assembly on a 3 x 3 square mesh") {
    const double k = 4.0;
    const Grid g = Grid::uniform({0, 1, 0, 1}, 3, 3, 1);
    const CsrMatrix a = assemble_matrix(g, {g.all_elements(), no_pml(g.domain(), k), 0});
    REQUIRE(a.rows == 4);
    // Bilinear square element: stiffness 2/3, -1/6 (edge), -1/3 (diagonal); mass h^2 (4, 2, 1)/36.
    const double h = 1.0 / 3.0, k2 = 1.0 / (k * k);
    const double kd = 2.0 / 3.0, ke = -1.0 / 6.0, kdiag = -1.0 / 3.0;
    const double md = 4.0 / 36.0 * h * h, me = 2.0 / 36.0 * h * h, mdiag = 1.0 / 36.0 * h * h;
    const double diag = 4 * (k2 * kd - md);
    const double edge = 2 * (k2 * ke - me);
    const double corner = k2 * kdiag - mdiag;
    // Free dofs: 0 = (1,1), 1 = (2,1), 2 = (1,2), 3 = (2,2).
    const double expect[4][4] = {{diag, edge, edge, corner},
                                 {edge, diag, corner, edge},
                                 {edge, corner, diag, edge},
                                 {corner, edge, edge, diag}};
    const auto d = testing::to_dense(a);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            CHECK(d(i, j).real() == doctest::Approx(expect[i][j]).epsilon(1e-14));
            CHECK(d(i, j).imag() == 0.0);
        }
}

TEST_CASE("quadrature exactness for polynomial coefficients") {
    const double k = 3.0;
    const Grid g = Grid::uniform({0, 1, 0, 2}, 3, 4, 2);
    CoefficientField cf = no_pml(g.domain(), k);
    // c^-2 = 1 + x + 2y is linear, so the integrands are polynomials of degree <= 5 per axis.
    cf.wavespeed = [](Point x) { return 1.0 / std::sqrt(1.0 + x.x + 2.0 * x.y); };
    const CsrMatrix def = assemble_matrix(g, {g.all_elements(), cf, 0});
    const CsrMatrix ref = assemble_matrix(g, {g.all_elements(), cf, 10});
    REQUIRE(def.nnz() == ref.nnz());
    const double scale = ref.max_abs();
    for (int i = 0; i < def.nnz(); ++i) CHECK(std::abs(def.values[i] - ref.values[i]) <= 1e-13 * scale);
}

TEST_CASE("zero PML strength and real c give a real matrix") {
    const Grid g = build_grid({0, 1, 0, 1}, 0.2, 5.0, MeshRule::target(0.1), 2);
    const CoefficientField cf = make_field(g.interior(), PmlProfile::cubic(0.0, 0.2), 5.0);
    const CsrMatrix a = assemble_matrix(g, {g.all_elements(), cf, 0});
    for (const cplx& v : a.values) CHECK(v.imag() == 0.0);
}

TEST_CASE("PML matrix: determinism, serial agreement and transpose defect") {
    const Grid g = build_grid({0, 1, 0, 1}, 0.3, 10.0, MeshRule::target(0.1), 2);
    const CoefficientField cf = make_field(g.interior(), PmlProfile::cubic(300.0, 0.3), 10.0);
    const CsrMatrix a = assemble_matrix(g, {g.all_elements(), cf, 0});
    const CsrMatrix b = assemble_matrix(g, {g.all_elements(), cf, 0});
    const CsrMatrix s = assemble_matrix(g, {g.all_elements(), cf, 0}, Execution::Serial);
    CHECK(a.values == b.values);
    CHECK(a.values == s.values);
    CHECK(a.col_idx == s.col_idx);
    a.validate();
    // The first-order beta term breaks complex symmetry inside the layer; record the defect.
    double defect = 0.0;
    for (int r = 0; r < a.rows; ++r)
        for (int p = a.row_ptr[r]; p < a.row_ptr[r + 1]; ++p) {
            const cplx* t = a.find(a.col_idx[p], r);
            REQUIRE(t != nullptr);
            defect = std::max(defect, std::abs(a.values[p] - *t));
        }
    MESSAGE("transpose defect / max|A| = " << defect / a.max_abs());
    CHECK(defect > 1e-13 * a.max_abs());
    // Without a layer the operator is symmetric.
    const CoefficientField flat = make_field(g.interior(), PmlProfile::cubic(0.0, 0.3), 10.0);
    const CsrMatrix c = assemble_matrix(g, {g.all_elements(), flat, 0});
    double sym = 0.0;
    for (int r = 0; r < c.rows; ++r)
        for (int p = c.row_ptr[r]; p < c.row_ptr[r + 1]; ++p)
            sym = std::max(sym, std::abs(c.values[p] - *c.find(c.col_idx[p], r)));
    CHECK(sym <= 1e-13 * c.max_abs());
}

TEST_CASE("load vector examples") {
    const Grid g = Grid::uniform({0, 1, 0, 1}, 4, 4, 1);
    const CVector zero = assemble_load(g, {[](Point) { return cplx{}; }, g.domain(), 0});
    for (const cplx& v : zero) CHECK(v == cplx{});

    // Indicator of element (1,1) = [0.25,0.5]^2: each of its four nodes gets h^2/4.
    const Rect cell{0.25, 0.5, 0.25, 0.5};
    const SourceFunction ind = [cell](Point x) { return cell.contains_closed(x) ? cplx(1.0) : cplx(); };
    const CVector b = assemble_load(g, {ind, g.domain(), 6});
    std::map<int, double> expect;
    for (int iy : {1, 2})
        for (int ix : {1, 2}) expect[g.free_index(ix, iy)] = 0.25 * 0.25 / 4.0;
    for (int i = 0; i < g.num_free(); ++i) {
        const double e = expect.count(i) ? expect[i] : 0.0;
        CHECK(b[i].real() == doctest::Approx(e).epsilon(1e-14));
        CHECK(b[i].imag() == 0.0);
    }

    // Source masked outside the support box.
    const CVector m = assemble_load(g, {[](Point) { return cplx(1.0); }, {0.0, 0.5, 0.0, 1.0}, 0});
    for (int iy = 1; iy < g.nodes_y() - 1; ++iy)
        for (int ix = 1; ix < g.nodes_x() - 1; ++ix) {
            const double x = g.node_x(ix);
            if (x > 0.5 + 1e-12) CHECK(m[g.free_index(ix, iy)] == cplx{});
            else CHECK(m[g.free_index(ix, iy)].real() > 0.0);
        }
}

TEST_CASE("single-subdomain local matrix equals the global matrix") {
    const Grid g = build_grid({0, 1, 0, 1}, 0.25, 8.0, MeshRule::target(0.125), 2);
    const CoefficientField cf = make_field(g.interior(), PmlProfile::cubic(240.0, 0.25), 8.0);
    const SubdomainLayout lay = build_layout(g, 1, 1, OverlapRule::layers(1), 0.25);
    const LocalMatrix lm = assemble_local(g, lay, 0, cf);
    const CsrMatrix a = assemble_matrix(g, {g.all_elements(), cf, 0});
    CHECK(lm.matrix.values == a.values);
    CHECK(lm.matrix.col_idx == a.col_idx);
    for (int i = 0; i < a.rows; ++i) CHECK(lm.to_global[i] == i);
}

TEST_CASE("local matrices agree with A on the agreement region") {
    const Grid g = build_grid({0, 1, 0, 1}, 0.25, 8.0, MeshRule::target(1.0 / 16), 2);
    const CoefficientField cf = make_field(g.interior(), PmlProfile::cubic(240.0, 0.25), 8.0);
    const CsrMatrix a = assemble_matrix(g, {g.all_elements(), cf, 0});
    for (auto [n1, n2] : {std::pair{2, 1}, std::pair{3, 1}, std::pair{1, 2}, std::pair{2, 2}}) {
        const SubdomainLayout lay = build_layout(g, n1, n2, OverlapRule::layers(2), 0.25);
        for (int j = 0; j < lay.size(); ++j) {
            const Subdomain& sd = lay.subdomains[j];
            const LocalMatrix lm = assemble_local(g, lay, j, cf);
            const int p = g.order();
            CHECK(lm.matrix.rows == (sd.extended.nx() * p - 1) * (sd.extended.ny() * p - 1));
            CHECK(lm.to_global == sd.dofs);
            const CoefficientField loc = local_field(cf, sd.interior_box);
            // A row agrees when every element touching the dof has identical stretchings.
            auto agrees = [&](Point x) {
                return gamma(loc.axis_x, x.x) == gamma(cf.axis_x, x.x) && gamma(loc.axis_y, x.y) == gamma(cf.axis_y, x.y) &&
                       gamma_prime(loc.axis_x, x.x) == gamma_prime(cf.axis_x, x.x) &&
                       gamma_prime(loc.axis_y, x.y) == gamma_prime(cf.axis_y, x.y);
            };
            int compared = 0;
            for (int r = 0; r < lm.matrix.rows; ++r) {
                const Point x = g.node(g.free_to_node(lm.to_global[r]));
                bool ok = true;
                for (double dx : {-g.hx(), 0.0, g.hx()})
                    for (double dy : {-g.hy(), 0.0, g.hy()}) {
                        const Point y{std::clamp(x.x + dx, g.domain().x_lo, g.domain().x_hi),
                                      std::clamp(x.y + dy, g.domain().y_lo, g.domain().y_hi)};
                        ok = ok && agrees(y);
                    }
                if (!ok) continue;
                for (int q = lm.matrix.row_ptr[r]; q < lm.matrix.row_ptr[r + 1]; ++q) {
                    const cplx* gv = a.find(lm.to_global[r], lm.to_global[lm.matrix.col_idx[q]]);
                    REQUIRE(gv != nullptr);
                    CHECK(std::abs(lm.matrix.values[q] - *gv) <= 1e-14 * a.max_abs());
                }
                ++compared;
            }
            CHECK(compared > 0);
        }
    }
}

TEST_CASE("hk_norm") {
    const Grid g = Grid::uniform({0, 1, 0, 1}, 8, 8, 2);
    CVector one(g.num_nodes(), cplx(1.0));
    CHECK(hk_norm(g, one, 0, 3.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(hk_norm(g, one, 1, 3.0) == doctest::Approx(1.0).epsilon(1e-14));
    const double pi = std::numbers::pi;
    const CVector v = interpolate(g, [pi](Point x) { return cplx(std::sin(pi * x.x)); });
    const double k = 2.0;
    const double expect = std::sqrt(0.5 + pi * pi / 2.0 / (k * k));
    CHECK(hk_norm(g, v, 1, k) == doctest::Approx(expect).epsilon(1e-3));
    CHECK(hk_norm(g, v, 0, k) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-3));
    CHECK(std::abs(hk_norm(g, v, 1, 1e6) - hk_norm(g, v, 0, 1e6)) < 1e-10);
    CHECK_THROWS_AS(hk_norm(g, v, 2, k), Error);
}

TEST_CASE("manufactured solution converges at the expected order") {
    for (int p : {1, 2}) {
        double prev = 0.0;
        for (int n : {4, 8, 16}) {
            const double e = testing::manufactured_l2_error(n, p, 5.0);
            if (prev > 0.0) {
                const double order = std::log2(prev / e);
                MESSAGE("p=" << p << " n=" << n << " order " << order);
                CHECK(order >= p + 0.7);
            }
            prev = e;
        }
    }
}
