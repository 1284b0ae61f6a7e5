#include "helmdd/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include <umfpack.h>

namespace helmdd {

void CsrMatrix::validate() const {
    if (rows < 0 || cols < 0 || static_cast<int>(row_ptr.size()) != rows + 1 || row_ptr.front() != 0)
        throw Error("csr: bad row offsets");
    if (col_idx.size() != values.size() || row_ptr.back() != nnz()) throw Error("csr: size mismatch");
    for (int r = 0; r < rows; ++r) {
        if (row_ptr[r + 1] < row_ptr[r]) throw Error("csr: offsets not monotone");
        for (int p = row_ptr[r]; p < row_ptr[r + 1]; ++p) {
            if (col_idx[p] < 0 || col_idx[p] >= cols) throw Error("csr: column index out of range");
            if (p > row_ptr[r] && col_idx[p] <= col_idx[p - 1]) throw Error("csr: columns not strictly increasing");
        }
    }
}

const cplx* CsrMatrix::find(int r, int c) const {
    const auto first = col_idx.begin() + row_ptr[r];
    const auto last = col_idx.begin() + row_ptr[r + 1];
    const auto it = std::lower_bound(first, last, c);
    if (it == last || *it != c) return nullptr;
    return values.data() + (it - col_idx.begin());
}

cplx* CsrMatrix::find(int r, int c) {
    return const_cast<cplx*>(static_cast<const CsrMatrix&>(*this).find(r, c));
}

double CsrMatrix::max_abs() const {
    double m = 0.0;
    for (const cplx& v : values) m = std::max(m, std::abs(v));
    return m;
}

CsrMatrix CsrMatrix::identity(int n) {
    CsrMatrix a;
    a.rows = a.cols = n;
    a.row_ptr.resize(n + 1);
    std::iota(a.row_ptr.begin(), a.row_ptr.end(), 0);
    a.col_idx.resize(n);
    std::iota(a.col_idx.begin(), a.col_idx.end(), 0);
    a.values.assign(n, cplx{1.0, 0.0});
    return a;
}

CsrMatrix CsrMatrix::from_triplets(int rows, int cols, std::vector<int> ri, std::vector<int> ci, std::vector<cplx> v) {
    if (ri.size() != ci.size() || ri.size() != v.size()) throw Error("from_triplets: size mismatch");
    std::vector<std::size_t> order(ri.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return ri[a] != ri[b] ? ri[a] < ri[b] : ci[a] < ci[b];
    });
    CsrMatrix a;
    a.rows = rows;
    a.cols = cols;
    a.row_ptr.assign(rows + 1, 0);
    int last_r = -1;
    int last_c = -1;
    for (std::size_t t : order) {
        if (ri[t] < 0 || ri[t] >= rows || ci[t] < 0 || ci[t] >= cols) throw Error("from_triplets: index out of range");
        if (ri[t] == last_r && ci[t] == last_c) {
            a.values.back() += v[t];
            continue;
        }
        last_r = ri[t];
        last_c = ci[t];
        a.col_idx.push_back(ci[t]);
        a.values.push_back(v[t]);
        a.row_ptr[ri[t] + 1] = static_cast<int>(a.col_idx.size());
    }
    // Rows without entries inherit the previous offset.
    for (int r = 1; r <= rows; ++r) a.row_ptr[r] = std::max(a.row_ptr[r], a.row_ptr[r - 1]);
    return a;
}

CVector matvec(const CsrMatrix& a, std::span<const cplx> x) {
    if (static_cast<int>(x.size()) != a.cols) throw Error("matvec: dimension mismatch");
    CVector y(a.rows);
#pragma omp parallel for schedule(static)
    for (int r = 0; r < a.rows; ++r) {
        cplx s{};
        for (int p = a.row_ptr[r]; p < a.row_ptr[r + 1]; ++p) s += a.values[p] * x[a.col_idx[p]];
        y[r] = s;
    }
    return y;
}

CVector matvec_serial(const CsrMatrix& a, std::span<const cplx> x) {
    if (static_cast<int>(x.size()) != a.cols) throw Error("matvec: dimension mismatch");
    CVector y(a.rows);
    for (int r = 0; r < a.rows; ++r) {
        cplx s{};
        for (int p = a.row_ptr[r]; p < a.row_ptr[r + 1]; ++p) s += a.values[p] * x[a.col_idx[p]];
        y[r] = s;
    }
    return y;
}

double norm2(std::span<const cplx> v) {
    double s = 0.0;
    for (const cplx& z : v) s += std::norm(z);
    return std::sqrt(s);
}

double residual_norm(const CsrMatrix& a, std::span<const cplx> x, std::span<const cplx> b) {
    if (static_cast<int>(b.size()) != a.rows) throw Error("residual_norm: dimension mismatch");
    CVector r = matvec(a, x);
    for (int i = 0; i < a.rows; ++i) r[i] = b[i] - r[i];
    return norm2(r);
}

// ---------------------------------------------------------------------------
// Factorization
//
// UMFPACK works on compressed columns. The CSR arrays of A are the CSC arrays of A^T, so we
// factor A^T and solve with the array-transpose system (UMFPACK_Aat), which is A x = b.

Factorization::Factorization(const CsrMatrix& a) {
    if (a.rows != a.cols) throw Error("factorize: matrix is not square");
    n_ = a.rows;
    if (n_ == 0) return;
    ap_ = a.row_ptr;
    ai_ = a.col_idx;
    ax_ = a.values;
    double control[UMFPACK_CONTROL];
    double info[UMFPACK_INFO];
    umfpack_zi_defaults(control);
    void* symbolic = nullptr;
    auto* ax = reinterpret_cast<const double*>(ax_.data());
    int status = umfpack_zi_symbolic(n_, n_, ap_.data(), ai_.data(), ax, nullptr, &symbolic, control, info);
    if (status != UMFPACK_OK) {
        std::ostringstream os;
        os << "factorize: symbolic analysis failed (umfpack status " << status << ")";
        throw Error(os.str());
    }
    status = umfpack_zi_numeric(ap_.data(), ai_.data(), ax, nullptr, symbolic, &numeric_, control, info);
    umfpack_zi_free_symbolic(&symbolic);
    if (status != UMFPACK_OK && status != UMFPACK_WARNING_singular_matrix) {
        release();
        std::ostringstream os;
        os << "factorize: numeric factorization failed (umfpack status " << status << ")";
        throw Error(os.str());
    }
    int lnz = 0, unz = 0, nr = 0, nc = 0, nz_udiag = 0;
    umfpack_zi_get_lunz(&lnz, &unz, &nr, &nc, &nz_udiag, numeric_);
    factor_nnz_ = static_cast<long long>(lnz) + unz;

    // Pivots of the row-scaled matrix; a pivot tiny relative to the largest one is singular.
    std::vector<cplx> diag(n_);
    int do_recip = 0;
    umfpack_zi_get_numeric(nullptr, nullptr, nullptr, nullptr, nullptr, nullptr, nullptr, nullptr, nullptr, nullptr,
                           reinterpret_cast<double*>(diag.data()), nullptr, &do_recip, nullptr, numeric_);
    double dmax = 0.0;
    for (const cplx& d : diag) dmax = std::max(dmax, std::abs(d));
    for (int i = 0; i < n_; ++i) {
        if (std::abs(diag[i]) <= 1e-14 * dmax) {
            release();
            std::ostringstream os;
            os << "factorize: numerically singular pivot at position " << i << " (|pivot| = " << std::abs(diag[i])
               << ", max |pivot| = " << dmax << ")";
            throw Error(os.str());
        }
    }
}

Factorization::~Factorization() { release(); }

Factorization::Factorization(Factorization&& o) noexcept
    : n_(o.n_), factor_nnz_(o.factor_nnz_), ap_(std::move(o.ap_)), ai_(std::move(o.ai_)), ax_(std::move(o.ax_)),
      numeric_(o.numeric_) {
    o.numeric_ = nullptr;
    o.n_ = 0;
}

Factorization& Factorization::operator=(Factorization&& o) noexcept {
    if (this != &o) {
        release();
        n_ = o.n_;
        factor_nnz_ = o.factor_nnz_;
        ap_ = std::move(o.ap_);
        ai_ = std::move(o.ai_);
        ax_ = std::move(o.ax_);
        numeric_ = o.numeric_;
        o.numeric_ = nullptr;
        o.n_ = 0;
    }
    return *this;
}

void Factorization::release() {
    if (numeric_ != nullptr) umfpack_zi_free_numeric(&numeric_);
    numeric_ = nullptr;
}

CVector Factorization::solve(std::span<const cplx> b) const {
    if (static_cast<int>(b.size()) != n_) throw Error("solve: dimension mismatch");
    CVector x(n_);
    if (n_ == 0) return x;
    if (numeric_ == nullptr) throw Error("solve: empty factorization");
    double control[UMFPACK_CONTROL];
    double info[UMFPACK_INFO];
    umfpack_zi_defaults(control);
    const int status = umfpack_zi_solve(UMFPACK_Aat, ap_.data(), ai_.data(), reinterpret_cast<const double*>(ax_.data()),
                                        nullptr, reinterpret_cast<double*>(x.data()), nullptr,
                                        reinterpret_cast<const double*>(b.data()), nullptr, numeric_, control, info);
    if (status != UMFPACK_OK) {
        std::ostringstream os;
        os << "solve: umfpack status " << status;
        throw Error(os.str());
    }
    return x;
}

Factorization factorize(const CsrMatrix& a) { return Factorization(a); }

// ---------------------------------------------------------------------------

void write_coo(std::ostream& os, const CsrMatrix& a) {
    os.precision(17);
    os << a.rows << ' ' << a.cols << ' ' << a.nnz() << '\n';
    for (int r = 0; r < a.rows; ++r)
        for (int p = a.row_ptr[r]; p < a.row_ptr[r + 1]; ++p)
            os << r << ' ' << a.col_idx[p] << ' ' << a.values[p].real() << ' ' << a.values[p].imag() << '\n';
}

void write_coo(std::ostream& os, std::span<const cplx> v) {
    os.precision(17);
    os << v.size() << " 1 " << v.size() << '\n';
    for (std::size_t i = 0; i < v.size(); ++i) os << i << " 0 " << v[i].real() << ' ' << v[i].imag() << '\n';
}

CsrMatrix read_coo(std::istream& is) {
    int rows = 0, cols = 0;
    long long nnz = 0;
    if (!(is >> rows >> cols >> nnz) || rows < 0 || cols < 0 || nnz < 0) throw Error("read_coo: bad header");
    std::vector<int> ri(nnz), ci(nnz);
    std::vector<cplx> v(nnz);
    for (long long t = 0; t < nnz; ++t) {
        double re = 0.0, im = 0.0;
        if (!(is >> ri[t] >> ci[t] >> re >> im)) throw Error("read_coo: truncated entry list");
        v[t] = {re, im};
    }
    return CsrMatrix::from_triplets(rows, cols, std::move(ri), std::move(ci), std::move(v));
}

}  // namespace helmdd
