#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace jr {

using cplx = std::complex<double>;

// Dense real matrix, row-major. Used by the brute-force solver and for
// small Rayleigh-Ritz problems; not meant for anything clever.
struct DMat {
    std::size_t rows = 0, cols = 0;
    std::vector<double> a;

    DMat() = default;
    DMat(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

    double& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }
};

// Eigendecomposition of a dense symmetric matrix: Householder reduction to
// tridiagonal form followed by implicit-shift QL. Eigenvalues ascending,
// eigenvectors in the columns of `vecs`.
struct SymEig {
    std::vector<double> values;
    DMat vecs;
};

SymEig sym_eigen(const DMat& m, bool want_vectors = true);

// Singular values (ascending) of a dense matrix via sym_eigen of A^T A.
std::vector<double> singular_values(const DMat& m);

// In-place lower Cholesky factorization; returns false if not positive
// definite. chol_solve then solves L L^T x = b.
bool cholesky(DMat& a);
void chol_solve(const DMat& l, std::vector<double>& x);

// Number of eigenvalues of the symmetric matrix strictly below mu, by the
// inertia of an unpivoted LDL^T factorization of (a - mu I); returns -1 when
// a zero pivot makes the factorization unreliable.
int eigen_count_below(DMat a, double mu);

// Dense complex matrix, row-major; sized for Clifford representations
// (dim <= 16) so everything is O(n^3) without apology.
struct CMat {
    std::size_t n = 0;
    std::vector<cplx> a;

    CMat() = default;
    explicit CMat(std::size_t n_) : n(n_), a(n_ * n_, cplx(0, 0)) {}

    cplx& operator()(std::size_t i, std::size_t j) { return a[i * n + j]; }
    cplx operator()(std::size_t i, std::size_t j) const { return a[i * n + j]; }

    static CMat identity(std::size_t n);
};

CMat operator*(const CMat& x, const CMat& y);
CMat operator+(const CMat& x, const CMat& y);
CMat operator-(const CMat& x, const CMat& y);
CMat operator*(cplx s, const CMat& x);
CMat dagger(const CMat& x);
CMat conjugate(const CMat& x);
CMat kron(const CMat& x, const CMat& y);
double max_abs(const CMat& x);

// || x - s*Id ||_max
double dist_to_scalar(const CMat& x, cplx s);

// Rank over C by row reduction with partial pivoting.
std::size_t cmat_rank(const CMat& x, double tol = 1e-10);

// Basic vector helpers (all sequential, deterministic).
double dot(const std::vector<double>& x, const std::vector<double>& y);
double norm2(const std::vector<double>& x);
void axpy(double a, const std::vector<double>& x, std::vector<double>& y);
void scal(double a, std::vector<double>& x);

// Least-squares slope of y against x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace jr
