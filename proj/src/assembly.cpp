#include "helmdd/assembly.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "helmdd/decomp.hpp"
#include "helmdd/quadrature.hpp"

namespace helmdd {

namespace {

constexpr int kMaxLocal = 9;  // (p+1)^2 for p <= 2

/// Reference-element tables for one polynomial order and quadrature rule.
struct Tables {
    int n = 0;  // basis functions per axis
    int q = 0;  // points per axis
    GaussRule rule;
    std::vector<double> b;   // b[a * q + i] = L_a(t_i)
    std::vector<double> db;  // derivative

    Tables(int p, int quad) {
        const LagrangeBasis1D basis(p);
        n = p + 1;
        q = quad > 0 ? quad : p + 2;
        if (q < p + 1) throw Error("quadrature order must be at least p + 1");
        rule = gauss_legendre(q);
        b.resize(n * q);
        db.resize(n * q);
        for (int a = 0; a < n; ++a)
            for (int i = 0; i < q; ++i) {
                b[a * q + i] = basis.value(a, rule.points[i]);
                db[a * q + i] = basis.derivative(a, rule.points[i]);
            }
    }
};

/// Runs body(ey) over element rows. Rows two apart share no nodes, so each colour is race-free.
/// The serial path visits rows in the same colour order so both give identical sums.
template <class Body>
void for_each_row(int ey0, int ey1, Execution exec, Body&& body) {
    for (int colour = 0; colour < 2; ++colour) {
        const int first = ey0 + colour;
        if (exec == Execution::Serial) {
            for (int ey = first; ey < ey1; ey += 2) body(ey);
            continue;
        }
#pragma omp parallel for schedule(dynamic)
        for (int ey = first; ey < ey1; ey += 2) body(ey);
    }
}

/// Coupled-node range along one axis for block-local node i in a block with m element spans.
std::pair<int, int> coupled_range(int i, int m, int p) {
    int lo, hi;
    if (i % p == 0) {
        lo = i - p;
        hi = i + p;
    } else {
        lo = i - i % p;
        hi = lo + p;
    }
    return {std::max(lo, 1), std::min(hi, m - 1)};
}

CsrMatrix block_pattern(const ElementBlock& blk, int p) {
    const int mx = blk.nx() * p;
    const int my = blk.ny() * p;
    const int fx = mx - 1;
    const int fy = my - 1;
    CsrMatrix a;
    a.rows = a.cols = std::max(0, fx) * std::max(0, fy);
    a.row_ptr.assign(a.rows + 1, 0);
    for (int j = 1; j <= fy; ++j) {
        const auto [ylo, yhi] = coupled_range(j, my, p);
        for (int i = 1; i <= fx; ++i) {
            const auto [xlo, xhi] = coupled_range(i, mx, p);
            a.row_ptr[(j - 1) * fx + i] = (yhi - ylo + 1) * (xhi - xlo + 1);
        }
    }
    for (int r = 0; r < a.rows; ++r) a.row_ptr[r + 1] += a.row_ptr[r];
    a.col_idx.resize(a.row_ptr.back());
    a.values.assign(a.row_ptr.back(), cplx{});
    for (int j = 1; j <= fy; ++j) {
        const auto [ylo, yhi] = coupled_range(j, my, p);
        for (int i = 1; i <= fx; ++i) {
            const auto [xlo, xhi] = coupled_range(i, mx, p);
            int pos = a.row_ptr[(j - 1) * fx + (i - 1)];
            for (int jj = ylo; jj <= yhi; ++jj)
                for (int ii = xlo; ii <= xhi; ++ii) a.col_idx[pos++] = (jj - 1) * fx + (ii - 1);
        }
    }
    return a;
}

}  // namespace

CsrMatrix assemble_matrix(const Grid& grid, const SesquilinearSpec& spec, Execution exec) {
    const ElementBlock& blk = spec.elements;
    if (blk.nx() < 1 || blk.ny() < 1 || blk.ex0 < 0 || blk.ey0 < 0 || blk.ex1 > grid.nx() || blk.ey1 > grid.ny())
        throw Error("assemble_matrix: element block outside the grid");
    const int p = grid.order();
    const Tables t(p, spec.quad_order);
    const int n = t.n;
    const int q = t.q;
    const int nloc = n * n;
    const double hx = grid.hx();
    const double hy = grid.hy();
    if (!(hx > 0.0) || !(hy > 0.0)) throw Error("assemble_matrix: degenerate element geometry");
    const CoefficientField& cf = spec.field;
    const double k2inv = 1.0 / (cf.k * cf.k);
    const bool variable_c = static_cast<bool>(cf.wavespeed);

    CsrMatrix a = block_pattern(blk, p);
    const int mx = blk.nx() * p;
    const int my = blk.ny() * p;
    const int fx = mx - 1;

    auto row_body = [&](int ey) {
        std::array<cplx, kMaxLocal * kMaxLocal> ke;
        std::array<double, kMaxLocal> phi, gx, gy;
        std::vector<cplx> d11(q), b1(q), d22(q), b2(q);
        std::vector<double> xs(q), ys(q), c2(q * q, 1.0);
        const double y0 = grid.node_y(ey * p);
        for (int iy = 0; iy < q; ++iy) {
            ys[iy] = y0 + hy * t.rule.points[iy];
            const cplx g = gamma(cf.axis_y, ys[iy]);
            const cplx gi = 1.0 / g;
            d22[iy] = gi * gi;
            b2[iy] = gamma_prime(cf.axis_y, ys[iy]) * gi * gi * gi;
        }
        for (int ex = blk.ex0; ex < blk.ex1; ++ex) {
            const double x0 = grid.node_x(ex * p);
            for (int ix = 0; ix < q; ++ix) {
                xs[ix] = x0 + hx * t.rule.points[ix];
                const cplx g = gamma(cf.axis_x, xs[ix]);
                const cplx gi = 1.0 / g;
                d11[ix] = gi * gi;
                b1[ix] = gamma_prime(cf.axis_x, xs[ix]) * gi * gi * gi;
            }
            if (variable_c)
                for (int iy = 0; iy < q; ++iy)
                    for (int ix = 0; ix < q; ++ix) {
                        const double c = cf.c({xs[ix], ys[iy]});
                        c2[iy * q + ix] = 1.0 / (c * c);
                    }
            ke.fill(cplx{});
            for (int iy = 0; iy < q; ++iy) {
                for (int ix = 0; ix < q; ++ix) {
                    const double w = t.rule.weights[ix] * t.rule.weights[iy] * hx * hy;
                    for (int bi = 0; bi < n; ++bi)
                        for (int ai = 0; ai < n; ++ai) {
                            const int l = bi * n + ai;
                            phi[l] = t.b[ai * q + ix] * t.b[bi * q + iy];
                            gx[l] = t.db[ai * q + ix] / hx * t.b[bi * q + iy];
                            gy[l] = t.b[ai * q + ix] * t.db[bi * q + iy] / hy;
                        }
                    const cplx wd11 = w * k2inv * d11[ix];
                    const cplx wd22 = w * k2inv * d22[iy];
                    const cplx wb1 = w * k2inv * b1[ix];
                    const cplx wb2 = w * k2inv * b2[iy];
                    const double wm = w * c2[iy * q + ix];
                    for (int i = 0; i < nloc; ++i)
                        for (int j = 0; j < nloc; ++j)
                            ke[i * nloc + j] += wd11 * (gx[j] * gx[i]) + wd22 * (gy[j] * gy[i]) -
                                                (wb1 * gx[j] + wb2 * gy[j]) * phi[i] - wm * (phi[j] * phi[i]);
                }
            }
            // Scatter into the block-local rows; boundary nodes of the block are eliminated.
            for (int i = 0; i < nloc; ++i) {
                const int li = (ex - blk.ex0) * p + i % n;
                const int lj = (ey - blk.ey0) * p + i / n;
                if (li < 1 || li >= mx || lj < 1 || lj >= my) continue;
                const int row = (lj - 1) * fx + (li - 1);
                for (int j = 0; j < nloc; ++j) {
                    const int ci = (ex - blk.ex0) * p + j % n;
                    const int cj = (ey - blk.ey0) * p + j / n;
                    if (ci < 1 || ci >= mx || cj < 1 || cj >= my) continue;
                    *a.find(row, (cj - 1) * fx + (ci - 1)) += ke[i * nloc + j];
                }
            }
        }
    };
    for_each_row(blk.ey0, blk.ey1, exec, row_body);
    return a;
}

CVector assemble_load(const Grid& grid, const LoadSpec& spec) {
    const int p = grid.order();
    const Tables t(p, spec.quad_order);
    const int n = t.n;
    const int q = t.q;
    const double hx = grid.hx();
    const double hy = grid.hy();
    CVector load(grid.num_free(), cplx{});
    if (!spec.source) return load;
    auto row_body = [&](int ey) {
        const double y0 = grid.node_y(ey * p);
        std::array<cplx, kMaxLocal> fe;
        for (int ex = 0; ex < grid.nx(); ++ex) {
            const double x0 = grid.node_x(ex * p);
            const Rect cell{x0, x0 + hx, y0, y0 + hy};
            // Elements entirely outside the support contribute nothing.
            if (cell.x_lo >= spec.support.x_hi || cell.x_hi <= spec.support.x_lo || cell.y_lo >= spec.support.y_hi ||
                cell.y_hi <= spec.support.y_lo)
                continue;
            fe.fill(cplx{});
            for (int iy = 0; iy < q; ++iy)
                for (int ix = 0; ix < q; ++ix) {
                    const Point xq{x0 + hx * t.rule.points[ix], y0 + hy * t.rule.points[iy]};
                    if (!spec.support.contains_closed(xq)) continue;
                    const cplx fw = spec.source(xq) * (t.rule.weights[ix] * t.rule.weights[iy] * hx * hy);
                    for (int l = 0; l < n * n; ++l) fe[l] += fw * (t.b[(l % n) * q + ix] * t.b[(l / n) * q + iy]);
                }
            for (int l = 0; l < n * n; ++l) {
                const int f = grid.free_index(ex * p + l % n, ey * p + l / n);
                if (f >= 0) load[f] += fe[l];
            }
        }
    };
    for_each_row(0, grid.ny(), Execution::Parallel, row_body);
    return load;
}

LocalMatrix assemble_local(const Grid& grid, const SubdomainLayout& layout, int j, const CoefficientField& global_field,
                           int quad_order, Execution exec) {
    if (j < 0 || j >= layout.size()) throw Error("assemble_local: subdomain index out of range");
    const Subdomain& sd = layout.subdomains[j];
    SesquilinearSpec spec{sd.extended, local_field(global_field, sd.interior_box), quad_order};
    return {assemble_matrix(grid, spec, exec), block_free_dofs(grid, sd.extended)};
}

namespace {

/// Evaluates value and gradient of a nodal FE function at every quadrature point and hands
/// them to visit(weight, point, value, dx, dy). Serial and in element order.
template <class Visit>
void integrate_nodal(const Grid& grid, std::span<const cplx> nodal, int quad_order, Visit&& visit) {
    if (static_cast<int>(nodal.size()) != grid.num_nodes()) throw Error("nodal vector size mismatch");
    const int p = grid.order();
    const Tables t(p, quad_order);
    const int n = t.n;
    const int q = t.q;
    const double hx = grid.hx();
    const double hy = grid.hy();
    std::array<cplx, kMaxLocal> ue;
    for (int ey = 0; ey < grid.ny(); ++ey) {
        const double y0 = grid.node_y(ey * p);
        for (int ex = 0; ex < grid.nx(); ++ex) {
            const double x0 = grid.node_x(ex * p);
            for (int l = 0; l < n * n; ++l) ue[l] = nodal[grid.node_index(ex * p + l % n, ey * p + l / n)];
            for (int iy = 0; iy < q; ++iy)
                for (int ix = 0; ix < q; ++ix) {
                    cplx v{}, dx{}, dy{};
                    for (int l = 0; l < n * n; ++l) {
                        const int ai = l % n;
                        const int bi = l / n;
                        v += ue[l] * (t.b[ai * q + ix] * t.b[bi * q + iy]);
                        dx += ue[l] * (t.db[ai * q + ix] / hx * t.b[bi * q + iy]);
                        dy += ue[l] * (t.b[ai * q + ix] * t.db[bi * q + iy] / hy);
                    }
                    const double w = t.rule.weights[ix] * t.rule.weights[iy] * hx * hy;
                    visit(w, Point{x0 + hx * t.rule.points[ix], y0 + hy * t.rule.points[iy]}, v, dx, dy);
                }
        }
    }
}

}  // namespace

double hk_norm(const Grid& grid, std::span<const cplx> nodal, int s, double k, int quad_order) {
    if (s < 0 || s > 1) throw Error("hk_norm: only s in {0, 1} is supported");
    const double k2inv = 1.0 / (k * k);
    double sum = 0.0;
    integrate_nodal(grid, nodal, quad_order, [&](double w, Point, cplx v, cplx dx, cplx dy) {
        sum += w * std::norm(v);
        if (s >= 1) sum += w * k2inv * (std::norm(dx) + std::norm(dy));
    });
    return std::sqrt(sum);
}

double l2_error(const Grid& grid, std::span<const cplx> nodal, const SourceFunction& exact, int quad_order) {
    double sum = 0.0;
    const int q = quad_order > 0 ? quad_order : grid.order() + 3;
    integrate_nodal(grid, nodal, q, [&](double w, Point x, cplx v, cplx, cplx) { sum += w * std::norm(v - exact(x)); });
    return std::sqrt(sum);
}

CVector interpolate(const Grid& grid, const SourceFunction& u) {
    CVector out(grid.num_nodes());
    for (int i = 0; i < grid.num_nodes(); ++i) out[i] = u(grid.node(i));
    return out;
}

}  // namespace helmdd
