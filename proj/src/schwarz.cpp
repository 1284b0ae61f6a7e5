#include "helmdd/schwarz.hpp"

#include <algorithm>
#include <chrono>
#include <exception>
#include <numeric>
#include <sstream>
#include <utility>

namespace helmdd {

std::string to_string(Method m) { return m == Method::RAS ? "RAS" : "RMS"; }

Method parse_method(const std::string& s) {
    if (s == "RAS" || s == "ras") return Method::RAS;
    if (s == "RMS" || s == "rms") return Method::RMS;
    throw Error("unknown method '" + s + "' (expected RAS or RMS)");
}

GlobalSystem make_global_system(CsrMatrix a, CVector f) {
    GlobalSystem sys{std::move(a), std::move(f), {}};
    {
        const Factorization lu(sys.a);
        sys.u_ref = lu.solve(sys.f);
    }
    const double res = residual_norm(sys.a, sys.u_ref, sys.f);
    const double fn = norm2(sys.f);
    if (res > 1e-10 * fn) {
        std::ostringstream os;
        os << "reference solve inaccurate: relative residual " << res / fn;
        throw Error(os.str());
    }
    return sys;
}

CVector SchwarzContext::local_solve(int j, std::span<const cplx> r) const {
    try {
        return local[j].solve(r);
    } catch (const Error& e) {
        std::ostringstream os;
        os << "subdomain " << j << ": " << e.what();
        throw Error(os.str());
    }
}

SchwarzContext build_context(const Grid& grid, const SubdomainLayout& layout, const PartitionOfUnity& pou,
                             const CoefficientField& global_field, std::shared_ptr<const GlobalSystem> system,
                             int quad_order) {
    SchwarzContext ctx;
    ctx.system = std::move(system);
    ctx.transfer = build_transfer(grid, layout, pou);
    if (ctx.transfer.global_size != ctx.system->a.rows) throw Error("build_context: grid and system disagree");
    const int n = layout.size();
    ctx.local.resize(n);
    std::vector<std::string> errors(n);
#pragma omp parallel for schedule(dynamic)
    for (int j = 0; j < n; ++j) {
        try {
            const LocalMatrix lm = assemble_local(grid, layout, j, global_field, quad_order, Execution::Serial);
            ctx.local[j] = Factorization(lm.matrix);
        } catch (const std::exception& e) {
            errors[j] = e.what();
        }
    }
    for (int j = 0; j < n; ++j)
        if (!errors[j].empty()) throw Error("subdomain " + std::to_string(j) + ": " + errors[j]);
    return ctx;
}

namespace {

CVector residual(const SchwarzContext& ctx, std::span<const cplx> u) {
    CVector r = matvec(ctx.a(), u);
    const CVector& f = ctx.f();
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = f[i] - r[i];
    return r;
}

/// R_j (f - A u) computed on the rows of subdomain j only.
CVector restricted_residual(const SchwarzContext& ctx, int j, std::span<const cplx> u) {
    const CsrMatrix& a = ctx.a();
    const CVector& f = ctx.f();
    const std::vector<int>& idx = ctx.transfer.dofs[j];
    CVector r(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        const int row = idx[i];
        cplx s = f[row];
        for (int p = a.row_ptr[row]; p < a.row_ptr[row + 1]; ++p) s -= a.values[p] * u[a.col_idx[p]];
        r[i] = s;
    }
    return r;
}

}  // namespace

CVector ras_step(const SchwarzContext& ctx, std::span<const cplx> u, std::span<const int> order) {
    const int n = ctx.num_subdomains();
    const CVector r = residual(ctx, u);
    std::vector<CVector> corr(n);
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
    for (int j = 0; j < n; ++j) {
        try {
            corr[j] = ctx.local_solve(j, ctx.transfer.restrict_to(j, r));
        } catch (...) {
#pragma omp critical
            failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    // Fixed accumulation order keeps the result independent of the thread count.
    CVector out(u.begin(), u.end());
    if (order.empty()) {
        for (int j = 0; j < n; ++j) ctx.transfer.add_weighted(j, corr[j], out);
    } else {
        if (static_cast<int>(order.size()) != n) throw Error("ras_step: order must list every subdomain");
        for (int j : order) ctx.transfer.add_weighted(j, corr[j], out);
    }
    return out;
}

CVector ras_step_serial(const SchwarzContext& ctx, std::span<const cplx> u) {
    const CsrMatrix& a = ctx.a();
    const CVector au = matvec_serial(a, u);
    CVector r(au.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = ctx.f()[i] - au[i];
    CVector out(u.begin(), u.end());
    for (int j = 0; j < ctx.num_subdomains(); ++j) {
        const CVector c = ctx.local_solve(j, ctx.transfer.restrict_to(j, r));
        ctx.transfer.add_weighted(j, c, out);
    }
    return out;
}

void SweepOrder::validate(int n) const {
    if (sequences.empty()) throw Error("sweep order: no sequences");
    for (const auto& seq : sequences) {
        std::vector<int> sorted = seq;
        std::sort(sorted.begin(), sorted.end());
        std::vector<int> expect(n);
        std::iota(expect.begin(), expect.end(), 0);
        if (sorted != expect) throw Error("sweep order: sequence is not a permutation of the subdomains");
    }
}

SweepOrder default_sweep_order(const SubdomainLayout& layout) {
    const int n = layout.size();
    SweepOrder order;
    if (layout.is_strip()) {
        std::vector<int> up(n);
        std::iota(up.begin(), up.end(), 0);
        std::vector<int> down(up.rbegin(), up.rend());
        order.sequences = {up, down};
        return order;
    }
    std::vector<int> xy_up, xy_down;
    for (int ix = 0; ix < layout.n1; ++ix)
        for (int iy = 0; iy < layout.n2; ++iy) xy_up.push_back(layout.index(ix, iy));
    for (int ix = 0; ix < layout.n1; ++ix)
        for (int iy = layout.n2 - 1; iy >= 0; --iy) xy_down.push_back(layout.index(ix, iy));
    order.sequences = {xy_up, {xy_up.rbegin(), xy_up.rend()}, xy_down, {xy_down.rbegin(), xy_down.rend()}};
    return order;
}

bool is_exhaustive(const SubdomainLayout& layout, const SweepOrder& order) {
    const int n = layout.size();
    auto downstream = [&](int a, int b, int dx, int dy) {
        const Subdomain& sa = layout.subdomains[a];
        const Subdomain& sb = layout.subdomains[b];
        const int ddx = sb.ix - sa.ix;
        const int ddy = sb.iy - sa.iy;
        if (a == b) return false;
        const bool okx = dx == 0 ? ddx == 0 : ddx * dx >= 0;
        const bool oky = dy == 0 ? ddy == 0 : ddy * dy >= 0;
        return okx && oky;
    };
    for (int dx = -1; dx <= 1; ++dx)
        for (int dy = -1; dy <= 1; ++dy) {
            if (dx == 0 && dy == 0) continue;
            bool covered = false;
            for (const auto& seq : order.sequences) {
                std::vector<int> pos(n);
                for (int i = 0; i < n; ++i) pos[seq[i]] = i;
                bool monotone = true;
                for (int a = 0; a < n && monotone; ++a)
                    for (int b = 0; b < n && monotone; ++b)
                        if (downstream(a, b, dx, dy) && pos[b] < pos[a]) monotone = false;
                if (monotone) {
                    covered = true;
                    break;
                }
            }
            if (!covered) return false;
        }
    return true;
}

RmsState RmsState::start(const SchwarzContext& ctx, std::span<const cplx> u0) {
    RmsState s;
    s.u.assign(u0.begin(), u0.end());
    s.local.reserve(ctx.num_subdomains());
    for (int j = 0; j < ctx.num_subdomains(); ++j) s.local.push_back(ctx.transfer.restrict_to(j, u0));
    return s;
}

void rms_double_sweep(const SchwarzContext& ctx, RmsState& state, const SweepOrder& order) {
    order.validate(ctx.num_subdomains());
    if (static_cast<int>(state.local.size()) != ctx.num_subdomains())
        throw Error("rms_double_sweep: state holds the wrong number of local solutions");
    for (const auto& seq : order.sequences)
        for (int j : seq) {
            const CVector c = ctx.local_solve(j, restricted_residual(ctx, j, state.u));
            const CVector uj = ctx.transfer.restrict_to(j, state.u);
            CVector& old = state.local[j];
            CVector delta(c.size());
            for (std::size_t i = 0; i < c.size(); ++i) {
                const cplx fresh = uj[i] + c[i];
                delta[i] = fresh - old[i];
                old[i] = fresh;
            }
            ctx.transfer.add_weighted(j, delta, state.u);
        }
}

CVector rms_double_sweep(const SchwarzContext& ctx, std::span<const cplx> u, const SweepOrder& order) {
    RmsState s = RmsState::start(ctx, u);
    rms_double_sweep(ctx, s, order);
    return std::move(s.u);
}

IterationTrace run_iteration(const SchwarzContext& ctx, Method method, const SweepOrder& order,
                             std::span<const cplx> u0, const RunOptions& options) {
    using clock = std::chrono::steady_clock;
    const CVector& u_ref = ctx.system->u_ref;
    const int n = static_cast<int>(u_ref.size());
    if (static_cast<int>(u0.size()) != n) throw Error("run_iteration: initial guess has the wrong size");

    IterationTrace trace;
    trace.method = method;
    trace.sweeps_per_iteration = method == Method::RMS ? static_cast<int>(order.sequences.size()) : 1;

    auto diff = [&](const CVector& u) {
        CVector e(n);
        for (int i = 0; i < n; ++i) e[i] = u_ref[i] - u[i];
        return e;
    };
    auto hk_error = [&](const CVector& e) {
        if (options.grid == nullptr) return -1.0;
        const CVector nodal = options.grid->expand_free(e);
        return hk_norm(*options.grid, nodal, 1, options.k);
    };

    CVector u(u0.begin(), u0.end());
    const double r0 = norm2(residual(ctx, u));
    const CVector e0 = diff(u);
    const double err0 = norm2(e0);
    const double hk0 = hk_error(e0);
    const double eres0 = norm2(matvec(ctx.a(), e0));
    trace.records.push_back({1.0, 1.0, eres0, hk0 < 0.0 ? -1.0 : 1.0, 0.0});
    if (r0 <= ctx.tol * norm2(ctx.f())) {
        trace.outcome = Outcome::Converged;
        trace.iterations = 0;
        if (options.min_iterations <= 0) return trace;
    }
    auto safe_ratio = [](double num, double den) { return den > 0.0 ? num / den : 0.0; };

    RmsState rms = method == Method::RMS ? RmsState::start(ctx, u) : RmsState{};
    const int limit = std::max(ctx.max_iters, options.min_iterations);
    for (int it = 1; it <= limit; ++it) {
        const auto t0 = clock::now();
        if (method == Method::RAS) {
            u = ras_step(ctx, u);
        } else {
            rms_double_sweep(ctx, rms, order);
            u = rms.u;
        }
        const double secs = std::chrono::duration<double>(clock::now() - t0).count();
        const CVector e = diff(u);
        IterationRecord rec;
        rec.rel_residual = safe_ratio(norm2(residual(ctx, u)), r0);
        rec.rel_error = safe_ratio(norm2(e), err0);
        rec.error_residual = norm2(matvec(ctx.a(), e));
        rec.rel_error_hk = hk0 < 0.0 ? -1.0 : safe_ratio(hk_error(e), hk0);
        rec.seconds = secs;
        trace.records.push_back(rec);
        if (trace.iterations < 0 && rec.rel_residual <= ctx.tol) {
            trace.iterations = it;
            trace.outcome = Outcome::Converged;
        }
        if (trace.iterations >= 0 && it >= options.min_iterations) break;
        if (trace.iterations < 0 && it >= ctx.max_iters && it >= options.min_iterations) break;
    }
    return trace;
}

double rate_after(const IterationTrace& trace, int n) {
    if (n < 0 || n >= static_cast<int>(trace.records.size())) {
        std::ostringstream os;
        os << "rate_after: trace holds " << trace.records.size() << " entries, iteration " << n << " requested";
        throw Error(os.str());
    }
    const double base = trace.records.front().error_residual;
    return base > 0.0 ? trace.records[n].error_residual / base : 0.0;
}

}  // namespace helmdd
