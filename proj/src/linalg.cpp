#include "jr/linalg.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace jr {

namespace {

double hypot2(double x, double y) { return std::sqrt(x * x + y * y); }

// Householder reduction of a symmetric matrix to tridiagonal form,
// accumulating the orthogonal transform in z (EISPACK tred2 lineage).
void tred2(DMat& z, std::vector<double>& d, std::vector<double>& e, bool vectors) {
    const std::size_t n = z.rows;
    d.assign(n, 0.0);
    e.assign(n, 0.0);
    if (n == 0) return;

    for (std::size_t i = n - 1; i >= 1; --i) {
        std::size_t l = i - 1;
        double h = 0.0, scale = 0.0;
        if (l > 0) {
            for (std::size_t k = 0; k <= l; ++k) scale += std::fabs(z(i, k));
            if (scale == 0.0) {
                e[i] = z(i, l);
            } else {
                for (std::size_t k = 0; k <= l; ++k) {
                    z(i, k) /= scale;
                    h += z(i, k) * z(i, k);
                }
                double f = z(i, l);
                double g = (f >= 0.0) ? -std::sqrt(h) : std::sqrt(h);
                e[i] = scale * g;
                h -= f * g;
                z(i, l) = f - g;
                f = 0.0;
                for (std::size_t j = 0; j <= l; ++j) {
                    if (vectors) z(j, i) = z(i, j) / h;
                    g = 0.0;
                    for (std::size_t k = 0; k <= j; ++k) g += z(j, k) * z(i, k);
                    for (std::size_t k = j + 1; k <= l; ++k) g += z(k, j) * z(i, k);
                    e[j] = g / h;
                    f += e[j] * z(i, j);
                }
                double hh = f / (h + h);
                for (std::size_t j = 0; j <= l; ++j) {
                    f = z(i, j);
                    e[j] = g = e[j] - hh * f;
                    for (std::size_t k = 0; k <= j; ++k)
                        z(j, k) -= (f * e[k] + g * z(i, k));
                }
            }
        } else {
            e[i] = z(i, l);
        }
        d[i] = h;
    }
    if (vectors) d[0] = 0.0;
    e[0] = 0.0;

    for (std::size_t i = 0; i < n; ++i) {
        if (vectors) {
            if (d[i] != 0.0) {
                std::size_t l = i;  // i >= 1 whenever d[i] != 0
                for (std::size_t j = 0; j < l; ++j) {
                    double g = 0.0;
                    for (std::size_t k = 0; k < l; ++k) g += z(i, k) * z(k, j);
                    for (std::size_t k = 0; k < l; ++k) z(k, j) -= g * z(k, i);
                }
            }
            d[i] = z(i, i);
            z(i, i) = 1.0;
            for (std::size_t j = 0; j < i; ++j) {
                z(j, i) = 0.0;
                z(i, j) = 0.0;
            }
        } else {
            d[i] = z(i, i);
        }
    }
}

// Implicit-shift QL on the tridiagonal (d, e), vectors accumulated in z.
void tql2(std::vector<double>& d, std::vector<double>& e, DMat& z, bool vectors) {
    const std::size_t n = d.size();
    if (n == 0) return;
    for (std::size_t i = 1; i < n; ++i) e[i - 1] = e[i];
    e[n - 1] = 0.0;

    for (std::size_t l = 0; l < n; ++l) {
        int iter = 0;
        std::size_t m;
        do {
            for (m = l; m + 1 < n; ++m) {
                double dd = std::fabs(d[m]) + std::fabs(d[m + 1]);
                if (std::fabs(e[m]) <= 1e-300 || std::fabs(e[m]) <= 2.3e-16 * dd) break;
            }
            if (m != l) {
                if (++iter == 60) throw std::runtime_error("sym_eigen: QL failed to converge");
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = hypot2(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + (g >= 0 ? std::fabs(r) : -std::fabs(r)));
                double s = 1.0, c = 1.0, p = 0.0;
                bool underflow = false;
                for (std::size_t i = m; i-- > l;) {
                    double f = s * e[i];
                    double b = c * e[i];
                    r = hypot2(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        underflow = true;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                    if (vectors) {
                        for (std::size_t k = 0; k < n; ++k) {
                            f = z(k, i + 1);
                            z(k, i + 1) = s * z(k, i) + c * f;
                            z(k, i) = c * z(k, i) - s * f;
                        }
                    }
                }
                if (underflow) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }

    // sort ascending, carrying vectors along
    for (std::size_t i = 0; i + 1 < n; ++i) {
        std::size_t k = i;
        double p = d[i];
        for (std::size_t j = i + 1; j < n; ++j)
            if (d[j] < p) { k = j; p = d[j]; }
        if (k != i) {
            d[k] = d[i];
            d[i] = p;
            if (vectors)
                for (std::size_t j = 0; j < n; ++j) std::swap(z(j, i), z(j, k));
        }
    }
}

}  // namespace

SymEig sym_eigen(const DMat& m, bool want_vectors) {
    if (m.rows != m.cols) throw std::invalid_argument("sym_eigen: matrix not square");
    SymEig out;
    out.vecs = m;
    std::vector<double> e;
    tred2(out.vecs, out.values, e, want_vectors);
    tql2(out.values, e, out.vecs, want_vectors);
    if (!want_vectors) out.vecs = DMat();
    return out;
}

std::vector<double> singular_values(const DMat& m) {
    // Gram matrix route; adequate for the accuracy regime used here
    // (smallest singular values down to ~1e-8 * sigma_max).
    DMat g(m.cols, m.cols);
    for (std::size_t i = 0; i < m.cols; ++i)
        for (std::size_t j = i; j < m.cols; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < m.rows; ++k) s += m(k, i) * m(k, j);
            g(i, j) = s;
            g(j, i) = s;
        }
    SymEig eig = sym_eigen(g, false);
    std::vector<double> sv(eig.values.size());
    for (std::size_t i = 0; i < sv.size(); ++i)
        sv[i] = std::sqrt(std::max(0.0, eig.values[i]));
    return sv;
}

bool cholesky(DMat& a) {
    const std::size_t n = a.rows;
    if (a.cols != n) throw std::invalid_argument("cholesky: matrix not square");
    for (std::size_t j = 0; j < n; ++j) {
        double d = a(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= a(j, k) * a(j, k);
        if (d <= 0.0) return false;
        d = std::sqrt(d);
        a(j, j) = d;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a(i, j);
            const double* ri = &a.a[i * n];
            const double* rj = &a.a[j * n];
            for (std::size_t k = 0; k < j; ++k) s -= ri[k] * rj[k];
            a(i, j) = s / d;
        }
    }
    // zero the strictly upper part so the factor is unambiguous
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) a(i, j) = 0.0;
    return true;
}

void chol_solve(const DMat& l, std::vector<double>& x) {
    const std::size_t n = l.rows;
    for (std::size_t i = 0; i < n; ++i) {
        double s = x[i];
        const double* ri = &l.a[i * n];
        for (std::size_t k = 0; k < i; ++k) s -= ri[k] * x[k];
        x[i] = s / ri[i];
    }
    for (std::size_t i = n; i-- > 0;) {
        double s = x[i];
        for (std::size_t k = i + 1; k < n; ++k) s -= l(k, i) * x[k];
        x[i] = s / l(i, i);
    }
}

int eigen_count_below(DMat a, double mu) {
    const std::size_t n = a.rows;
    double scale = 0;
    for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::fabs(a(i, i)));
    scale = std::max(scale, std::fabs(mu)) + 1e-300;
    for (std::size_t i = 0; i < n; ++i) a(i, i) -= mu;
    int negatives = 0;
    for (std::size_t j = 0; j < n; ++j) {
        double d = a(j, j);
        if (std::fabs(d) < 1e-13 * scale) return -1;
        if (d < 0) ++negatives;
        const double* rowj = &a.a[j * n];
        for (std::size_t i = j + 1; i < n; ++i) {
            double f = a(i, j) / d;
            if (f == 0.0) continue;
            double* rowi = &a.a[i * n];
            for (std::size_t k = j + 1; k <= i; ++k) rowi[k] -= f * rowj[k];
        }
        for (std::size_t i = j + 1; i < n; ++i) a(j, i) = 0;
    }
    return negatives;
}

CMat CMat::identity(std::size_t n) {
    CMat m(n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

CMat operator*(const CMat& x, const CMat& y) {
    if (x.n != y.n) throw std::invalid_argument("CMat: size mismatch");
    CMat r(x.n);
    for (std::size_t i = 0; i < x.n; ++i)
        for (std::size_t k = 0; k < x.n; ++k) {
            cplx v = x(i, k);
            if (v == cplx(0, 0)) continue;
            for (std::size_t j = 0; j < x.n; ++j) r(i, j) += v * y(k, j);
        }
    return r;
}

CMat operator+(const CMat& x, const CMat& y) {
    CMat r = x;
    for (std::size_t i = 0; i < r.a.size(); ++i) r.a[i] += y.a[i];
    return r;
}

CMat operator-(const CMat& x, const CMat& y) {
    CMat r = x;
    for (std::size_t i = 0; i < r.a.size(); ++i) r.a[i] -= y.a[i];
    return r;
}

CMat operator*(cplx s, const CMat& x) {
    CMat r = x;
    for (auto& v : r.a) v *= s;
    return r;
}

CMat dagger(const CMat& x) {
    CMat r(x.n);
    for (std::size_t i = 0; i < x.n; ++i)
        for (std::size_t j = 0; j < x.n; ++j) r(i, j) = std::conj(x(j, i));
    return r;
}

CMat conjugate(const CMat& x) {
    CMat r = x;
    for (auto& v : r.a) v = std::conj(v);
    return r;
}

CMat kron(const CMat& x, const CMat& y) {
    CMat r(x.n * y.n);
    for (std::size_t i = 0; i < x.n; ++i)
        for (std::size_t j = 0; j < x.n; ++j) {
            if (x(i, j) == cplx(0, 0)) continue;
            for (std::size_t k = 0; k < y.n; ++k)
                for (std::size_t l = 0; l < y.n; ++l)
                    r(i * y.n + k, j * y.n + l) = x(i, j) * y(k, l);
        }
    return r;
}

double max_abs(const CMat& x) {
    double m = 0.0;
    for (const auto& v : x.a) m = std::max(m, std::abs(v));
    return m;
}

double dist_to_scalar(const CMat& x, cplx s) {
    double m = 0.0;
    for (std::size_t i = 0; i < x.n; ++i)
        for (std::size_t j = 0; j < x.n; ++j) {
            cplx want = (i == j) ? s : cplx(0, 0);
            m = std::max(m, std::abs(x(i, j) - want));
        }
    return m;
}

std::size_t cmat_rank(const CMat& x, double tol) {
    CMat w = x;
    const std::size_t n = w.n;
    std::size_t rank = 0;
    std::vector<bool> used(n, false);
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = n;
        double best = tol;
        for (std::size_t r = 0; r < n; ++r)
            if (!used[r] && std::abs(w(r, col)) > best) {
                best = std::abs(w(r, col));
                piv = r;
            }
        if (piv == n) continue;
        used[piv] = true;
        ++rank;
        cplx p = w(piv, col);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == piv || std::abs(w(r, col)) == 0.0) continue;
            cplx f = w(r, col) / p;
            for (std::size_t c = col; c < n; ++c) w(r, c) -= f * w(piv, c);
        }
    }
    return rank;
}

double dot(const std::vector<double>& x, const std::vector<double>& y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

double norm2(const std::vector<double>& x) { return std::sqrt(dot(x, x)); }

void axpy(double a, const std::vector<double>& x, std::vector<double>& y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

void scal(double a, std::vector<double>& x) {
    for (auto& v : x) v *= a;
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("fit_slope: need >= 2 points");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) { mx += x[i]; my += y[i]; }
    mx /= double(x.size());
    my /= double(x.size());
    double num = 0, den = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        num += (x[i] - mx) * (y[i] - my);
        den += (x[i] - mx) * (x[i] - mx);
    }
    return num / den;
}

}  // namespace jr
