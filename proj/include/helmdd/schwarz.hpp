#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "helmdd/assembly.hpp"
#include "helmdd/decomp.hpp"
#include "helmdd/linalg.hpp"

namespace helmdd {

enum class Method { RAS, RMS };

std::string to_string(Method m);
Method parse_method(const std::string& s);

/// Global matrix, load and a direct-solve reference solution.
struct GlobalSystem {
    CsrMatrix a;
    CVector f;
    CVector u_ref;
};

/// Factors A once and solves for the reference; throws if ||f - A u|| > 1e-10 ||f||.
GlobalSystem make_global_system(CsrMatrix a, CVector f);

/// Everything an iteration needs: the global system, transfer operators and factorized
/// subdomain matrices. Read-only during iteration.
struct SchwarzContext {
    std::shared_ptr<const GlobalSystem> system;
    TransferOps transfer;
    std::vector<Factorization> local;
    double tol = 1e-6;
    int max_iters = 200;

    int num_subdomains() const { return static_cast<int>(local.size()); }
    const CsrMatrix& a() const { return system->a; }
    const CVector& f() const { return system->f; }
    /// A_j^{-1} r_j, failures rethrown with the subdomain id.
    CVector local_solve(int j, std::span<const cplx> r) const;
};

/// Assembles and factorizes every subdomain matrix (in parallel over subdomains).
SchwarzContext build_context(const Grid& grid, const SubdomainLayout& layout, const PartitionOfUnity& pou,
                             const CoefficientField& global_field, std::shared_ptr<const GlobalSystem> system,
                             int quad_order = 0);

/// One restricted additive step u + sum_j R~_j^T A_j^{-1} R_j (f - A u). Local solves run
/// concurrently; contributions are accumulated in `order` (default 0..N-1).
CVector ras_step(const SchwarzContext& ctx, std::span<const cplx> u, std::span<const int> order = {});
/// Single-threaded reference for ras_step.
CVector ras_step_serial(const SchwarzContext& ctx, std::span<const cplx> u);

/// Ordered subdomain sequences making up one multiplicative iteration.
struct SweepOrder {
    std::vector<std::vector<int>> sequences;

    /// Throws unless every sequence is a permutation of 0..n-1.
    void validate(int n) const;
};

/// Strips: ascending then descending. Checkerboards: x-major/y-ascending, its reverse,
/// x-major/y-descending, its reverse.
SweepOrder default_sweep_order(const SubdomainLayout& layout);

/// True if for every direction (dx, dy) in {-1,0,1}^2 \ {0} some sequence visits each
/// subdomain before everything downstream of it along that direction.
bool is_exhaustive(const SubdomainLayout& layout, const SweepOrder& order);

/// Multiplicative iterate: the latest local solution on every subdomain, and the composite
/// u = sum_l R~_l^T local[l] that they define.
struct RmsState {
    CVector u;
    std::vector<CVector> local;

    /// Starts every local solution from R_j u0, so the composite is u0 itself.
    static RmsState start(const SchwarzContext& ctx, std::span<const cplx> u0);
};

/// One pass through all sequences. Visiting j solves A_j c = R_j (f - A u), replaces local[j]
/// by R_j u + c and updates u by chi_j (new - old local[j]). Older local solutions on the other
/// subdomains are kept, so this is not the same map as u <- u + R~_j^T c.
void rms_double_sweep(const SchwarzContext& ctx, RmsState& state, const SweepOrder& order);
/// The same pass started from RmsState::start(ctx, u); returns the composite.
CVector rms_double_sweep(const SchwarzContext& ctx, std::span<const cplx> u, const SweepOrder& order);

struct IterationRecord {
    double rel_residual = 0.0;    // ||f - A u^n|| / ||f - A u^0||
    double rel_error = 0.0;       // ||u* - u^n|| / ||u* - u^0||  (l2)
    double error_residual = 0.0;  // ||A (u* - u^n)||
    double rel_error_hk = -1.0;   // H^1_k relative error when requested, else -1
    double seconds = 0.0;         // wall time of this iteration
};

enum class Outcome { Converged, MaxIterations };

struct IterationTrace {
    Method method = Method::RAS;
    Outcome outcome = Outcome::MaxIterations;
    /// First n with rel_residual <= tol, or -1.
    int iterations = -1;
    int sweeps_per_iteration = 1;
    std::vector<IterationRecord> records;  // records[0] is the initial guess
};

struct RunOptions {
    /// Keep iterating past convergence until at least this many iterations are recorded.
    int min_iterations = 0;
    /// When set, also track the relative H^1_k error.
    const Grid* grid = nullptr;
    double k = 1.0;
};

IterationTrace run_iteration(const SchwarzContext& ctx, Method method, const SweepOrder& order,
                             std::span<const cplx> u0, const RunOptions& options = {});

/// ||A(u* - u^n)|| / ||A(u* - u^0)||.
double rate_after(const IterationTrace& trace, int n);

}  // namespace helmdd
