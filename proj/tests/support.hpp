#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

#include "helmdd/harness.hpp"

namespace testing {

using helmdd::cplx;
using helmdd::CVector;

/// Row-major dense complex matrix.
struct Dense {
    int n = 0;
    int m = 0;
    std::vector<cplx> a;

    Dense(int rows, int cols) : n(rows), m(cols), a(static_cast<std::size_t>(rows) * cols) {}
    cplx& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * m + j]; }
    cplx operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * m + j]; }
};

inline Dense to_dense(const helmdd::CsrMatrix& s) {
    Dense d(s.rows, s.cols);
    for (int r = 0; r < s.rows; ++r)
        for (int p = s.row_ptr[r]; p < s.row_ptr[r + 1]; ++p) d(r, s.col_idx[p]) += s.values[p];
    return d;
}

inline CVector dense_matvec(const Dense& d, const CVector& x) {
    CVector y(d.n);
    for (int i = 0; i < d.n; ++i)
        for (int j = 0; j < d.m; ++j) y[i] += d(i, j) * x[j];
    return y;
}

/// Gaussian elimination with partial pivoting, written independently of the sparse path.
inline CVector dense_lu_solve(Dense d, CVector b) {
    const int n = d.n;
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    for (int c = 0; c < n; ++c) {
        int piv = c;
        for (int r = c + 1; r < n; ++r)
            if (std::abs(d(r, c)) > std::abs(d(piv, c))) piv = r;
        if (std::abs(d(piv, c)) == 0.0) throw helmdd::Error("dense_lu_solve: singular");
        if (piv != c) {
            for (int j = 0; j < n; ++j) std::swap(d(c, j), d(piv, j));
            std::swap(b[c], b[piv]);
        }
        for (int r = c + 1; r < n; ++r) {
            const cplx l = d(r, c) / d(c, c);
            if (l == cplx{}) continue;
            for (int j = c; j < n; ++j) d(r, j) -= l * d(c, j);
            b[r] -= l * b[c];
        }
    }
    CVector x(n);
    for (int i = n - 1; i >= 0; --i) {
        cplx s = b[i];
        for (int j = i + 1; j < n; ++j) s -= d(i, j) * x[j];
        x[i] = s / d(i, i);
    }
    return x;
}

inline double rel_diff(const CVector& a, const CVector& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += std::norm(a[i] - b[i]);
        den += std::norm(b[i]);
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

inline CVector random_vector(int n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    CVector v(n);
    for (auto& z : v) z = {d(rng), d(rng)};
    return v;
}

/// Config for quick tests: coarse fixed mesh unless the caller overrides keys.
inline helmdd::ExperimentConfig small_config(double k, double h, int p = 2) {
    helmdd::Config c;
    c.set("experiment.k", std::to_string(k));
    c.set("mesh.h", std::to_string(h));
    c.set("mesh.p", std::to_string(p));
    return helmdd::ExperimentConfig::from(c);
}

}  // namespace testing

namespace testing {

/// L2 error of the FE solution of -k^-2 Lap u - u = f on the unit square for u = sin(pi x) sin(pi y),
/// no PML, on an n x n mesh.
inline double manufactured_l2_error(int n, int p, double k) {
    using namespace helmdd;
    const Grid g = Grid::uniform({0, 1, 0, 1}, n, n, p);
    const CoefficientField cf = make_field(g.interior(), PmlProfile::cubic(0.0, 1.0), k);
    const double pi = std::numbers::pi;
    const auto exact = [pi](Point x) { return cplx(std::sin(pi * x.x) * std::sin(pi * x.y), 0.0); };
    const double factor = 2.0 * pi * pi / (k * k) - 1.0;
    const SourceFunction f = [&](Point x) { return factor * exact(x); };
    const CsrMatrix a = assemble_matrix(g, {g.all_elements(), cf, 0});
    const CVector b = assemble_load(g, {f, g.domain(), 0});
    const CVector u = factorize(a).solve(b);
    return l2_error(g, g.expand_free(u), exact);
}

}  // namespace testing

namespace testing {

/// Problem, global system, layout and factorized subdomains for one (k, layout, overlap) cell.
struct Cell {
    helmdd::ExperimentConfig cfg;
    helmdd::Problem prob;
    std::shared_ptr<const helmdd::GlobalSystem> sys;
    helmdd::SubdomainLayout layout;
    helmdd::PartitionOfUnity pou;
    helmdd::SchwarzContext ctx;
};

inline Cell make_cell(const helmdd::ExperimentConfig& cfg, double k, int n1, int n2, const std::string& overlap,
                      std::shared_ptr<const helmdd::GlobalSystem> sys = nullptr) {
    using namespace helmdd;
    Problem prob = build_problem(cfg, k);
    if (!sys) sys = build_system(cfg, prob);
    SubdomainLayout layout = build_layout(prob.grid, n1, n2, parse_overlap(overlap), prob.kappa);
    PartitionOfUnity pou = build_pou(prob.grid, layout);
    SchwarzContext ctx = build_context(prob.grid, layout, pou, prob.field, sys, cfg.quad_order);
    ctx.tol = cfg.tol;
    ctx.max_iters = cfg.max_iters;
    return {cfg, std::move(prob), std::move(sys), std::move(layout), std::move(pou), std::move(ctx)};
}

/// Explicit sparse R_j (rows: local dofs) and R~_j^T (rows: global dofs).
inline std::pair<helmdd::CsrMatrix, helmdd::CsrMatrix> explicit_transfer(const helmdd::TransferOps& t, int j) {
    const auto& idx = t.dofs[j];
    const int nj = static_cast<int>(idx.size());
    std::vector<int> r_rows(nj), r_cols(idx.begin(), idx.end());
    std::vector<cplx> r_vals(nj, cplx(1.0)), e_vals(nj);
    for (int q = 0; q < nj; ++q) {
        r_rows[q] = q;
        e_vals[q] = t.weights[j][q];
    }
    helmdd::CsrMatrix r = helmdd::CsrMatrix::from_triplets(nj, t.global_size, r_rows, r_cols, r_vals);
    helmdd::CsrMatrix e = helmdd::CsrMatrix::from_triplets(t.global_size, nj, r_cols, r_rows, e_vals);
    return {std::move(r), std::move(e)};
}

/// sum_j R~_j^T A_j^{-1} R_j v through explicit operator matrices.
inline CVector explicit_preconditioner(const helmdd::SchwarzContext& ctx, const CVector& v) {
    CVector out(v.size());
    for (int j = 0; j < ctx.num_subdomains(); ++j) {
        const auto [r, e] = explicit_transfer(ctx.transfer, j);
        const CVector c = ctx.local[j].solve(helmdd::matvec_serial(r, v));
        const CVector g = helmdd::matvec_serial(e, c);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += g[i];
    }
    return out;
}

}  // namespace testing
