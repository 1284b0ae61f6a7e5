#pragma once

#include <complex>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "helmdd/grid.hpp"

namespace helmdd {

using cplx = std::complex<double>;
using CVector = std::vector<cplx>;

/// Compressed sparse row matrix with complex entries; column indices sorted per row.
struct CsrMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<int> row_ptr{0};
    std::vector<int> col_idx;
    std::vector<cplx> values;

    int nnz() const { return static_cast<int>(col_idx.size()); }
    /// Throws if offsets are not monotone or indices are out of range or unsorted.
    void validate() const;
    /// Pointer to the stored entry (r, c) or nullptr when not in the pattern.
    const cplx* find(int r, int c) const;
    cplx* find(int r, int c);
    double max_abs() const;

    static CsrMatrix identity(int n);
    /// Builds from (row, col, value) triplets; duplicates are summed in input order.
    static CsrMatrix from_triplets(int rows, int cols, std::vector<int> ri, std::vector<int> ci, std::vector<cplx> v);
};

/// y = A x, rows distributed over OpenMP threads.
CVector matvec(const CsrMatrix& a, std::span<const cplx> x);
/// Single-threaded reference for matvec.
CVector matvec_serial(const CsrMatrix& a, std::span<const cplx> x);

/// ||b - A x||_2
double residual_norm(const CsrMatrix& a, std::span<const cplx> x, std::span<const cplx> b);
double norm2(std::span<const cplx> v);

/// Sparse LU of a square complex matrix (UMFPACK multifrontal, AMD-family ordering,
/// threshold partial pivoting). Move-only; concurrent solve() calls are safe.
class Factorization {
public:
    Factorization() = default;
    explicit Factorization(const CsrMatrix& a);
    ~Factorization();
    Factorization(Factorization&&) noexcept;
    Factorization& operator=(Factorization&&) noexcept;
    Factorization(const Factorization&) = delete;
    Factorization& operator=(const Factorization&) = delete;

    int size() const { return n_; }
    bool empty() const { return numeric_ == nullptr; }
    /// Number of stored entries in L and U.
    long long factor_nnz() const { return factor_nnz_; }
    CVector solve(std::span<const cplx> b) const;

private:
    void release();

    int n_ = 0;
    long long factor_nnz_ = 0;
    // Pattern and values must outlive the numeric object for solves with iterative refinement off;
    // UMFPACK solve needs the original matrix arrays.
    std::vector<int> ap_;
    std::vector<int> ai_;
    std::vector<cplx> ax_;
    void* numeric_ = nullptr;
};

Factorization factorize(const CsrMatrix& a);
inline CVector solve(const Factorization& f, std::span<const cplx> b) { return f.solve(b); }

/// Coordinate-list text exchange: header "rows cols nnz", then "row col re im" per line (0-based).
void write_coo(std::ostream& os, const CsrMatrix& a);
void write_coo(std::ostream& os, std::span<const cplx> v);
CsrMatrix read_coo(std::istream& is);

}  // namespace helmdd
